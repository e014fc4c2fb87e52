"""Command-line interface.

Subcommands mirror the library: poset queries, chain construction,
lumping verification and application, spectra, group orbits, and
exhaustive lumping search. Every input is a JSON file ('-' reads
standard input) and every output is JSON on standard output, so the
worked examples in the README compose as shell pipes.

Exit codes: 0 success, 1 domain error (structured JSON error object),
2 malformed input.
"""

from __future__ import annotations

import argparse
import json
import random
import sys

from .errors import PosetLumpError
from .lumping import (
    GeneralizedLumpingSpec,
    Partition,
    deletion_partition,
    direct_product_partition,
    generalized_product_partition,
    is_lumping,
    lump,
)
from .poset import Poset, chain_poset, elements_of, fibered_over
from .products import CrestedSpec, crested_product, insect_coefficients, insect_operator
from .spectral import spectrum, tree_spectrum
from .stochastic import MarkovOperator, Measure, ProductIndex, parse_rational, uniform
from .wreath import (
    WreathGenerator,
    enumerate_lumpings,
    is_group_induced,
    orbit_lump,
    orbits,
    reconstruct_group,
)


class _InputError(Exception):
    """Bad input; maps to exit code 2."""

    def __init__(self, detail, name="MalformedInput"):
        self.name = name
        super().__init__(detail)


def _read_json(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise _InputError(f"cannot read {path}: {exc}") from exc


def _loading(fn, *parts):
    """Run a parse step; any domain error here counts as malformed input."""
    try:
        return fn(*parts)
    except PosetLumpError as exc:
        raise _InputError(str(exc), type(exc).__name__) from exc


def _emit(args, obj) -> int:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if args.output and args.output != "-":
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip() != ""]
    except ValueError as exc:
        raise _InputError(f"bad integer list {text!r}") from exc


def _load_poset(path: str) -> Poset:
    return _loading(Poset.from_json, _read_json(path))


def _load_chain(path: str) -> MarkovOperator:
    return _loading(MarkovOperator.from_json, _read_json(path))


def _load_partition(path: str) -> Partition:
    return _loading(Partition.from_json, _read_json(path))


def _load_group(path: str):
    obj = _read_json(path)

    def build(obj):
        p = Poset.from_json(obj["poset"])
        q = int(obj["q"])
        sizes = (q,) * p.n
        gens = [WreathGenerator.from_json(g, p, sizes) for g in obj["generators"]]
        return p, q, gens

    try:
        return _loading(build, obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise _InputError(f"bad group JSON: {exc}") from exc


# -- poset ------------------------------------------------------------------


def cmd_poset_check(args) -> int:
    p = _load_poset(args.poset)
    return _emit(args, p.to_json())


def cmd_poset_ancestrals(args) -> int:
    p = _load_poset(args.poset)
    fam = p.ancestral_family()
    out = {
        "per_element": {
            str(i): {
                "A": list(elements_of(p.ancestral(i))),
                "A_closed": list(elements_of(p.ancestral_closed(i))),
                "H": list(elements_of(p.hereditary(i))),
                "H_closed": list(elements_of(p.hereditary_closed(i))),
            }
            for i in range(1, p.n + 1)
        },
        "ancestral_subsets": [list(elements_of(m)) for m in fam.sets],
        "covers": [
            [list(elements_of(a)), list(elements_of(b))] for a, b in fam.covers
        ],
    }
    return _emit(args, out)


def cmd_poset_antichains(args) -> int:
    p = _load_poset(args.poset)
    return _emit(args, {"antichains": [list(elements_of(m)) for m in p.antichains()]})


def cmd_poset_fibered(args) -> int:
    p = _load_poset(args.poset)
    result = fibered_over(p, _int_list(args.remove))
    return _emit(args, result.to_json())


# -- chain ------------------------------------------------------------------


def _crested_spec(args, p: Poset) -> CrestedSpec:
    weights = [_loading(parse_rational, w) for w in args.weights.split(",")]
    if args.factors:
        factors = [_load_chain(f) for f in args.factors.split(",")]
    elif args.q:
        factors = [_loading(uniform, args.q) for _ in range(p.n)]
    else:
        raise _InputError("give either -q or --factors")
    return _loading(CrestedSpec, p, factors, weights)


def cmd_chain_crested(args) -> int:
    p = _load_poset(args.poset)
    spec = _crested_spec(args, p)
    return _emit(args, crested_product(spec).to_json())


def cmd_chain_insect(args) -> int:
    p = _load_poset(args.poset)
    if args.coefficients:
        return _emit(args, insect_coefficients(p, args.q).to_json())
    return _emit(args, insect_operator(p, args.q).to_json())


# -- lump -------------------------------------------------------------------


def cmd_lump_verify(args) -> int:
    P = _load_chain(args.chain)
    L = _load_partition(args.partition)
    ok, wit = is_lumping(P, L)
    if ok:
        lumped = lump(P, L)
        return _emit(args, {"lumpable": True, "lumped": lumped.operator.to_json()["rows"]})
    return _emit(args, {"lumpable": False, "witness": wit.to_json()})


def cmd_lump_apply(args) -> int:
    P = _load_chain(args.chain)
    L = _load_partition(args.partition)
    return _emit(args, lump(P, L).to_json())


def cmd_lump_delete(args) -> int:
    P = _load_chain(args.chain)
    if P.index is None:
        raise _InputError("chain JSON needs radices for coordinate deletion")
    L = deletion_partition(P.index, _int_list(args.remove))
    return _emit(args, {"partition": L.to_json(), "lumped": lump(P, L).operator.to_json()})


def cmd_lump_product(args) -> int:
    P = _load_chain(args.chain)
    spec = _read_json(args.spec)
    try:
        partitions = [_loading(Partition.from_json, p) for p in spec["partitions"]]
        if "factors" in spec:
            factors = [_loading(MarkovOperator.from_json, f) for f in spec["factors"]]
        else:
            if P.index is None:
                raise _InputError("chain JSON needs radices when factors are omitted")
            factors = [uniform(q) for q in P.index.radices]
    except (KeyError, TypeError) as exc:
        raise _InputError(f"bad product lumping spec: {exc}") from exc
    L = direct_product_partition(factors, partitions, check_against=P)
    return _emit(args, {"partition": L.to_json(), "lumped": lump(P, L).operator.to_json()})


def cmd_lump_generalized(args) -> int:
    P = _load_chain(args.chain)
    obj = _read_json(args.spec)
    if P.index is None:
        raise _InputError("chain JSON needs radices")
    sizes = list(P.index.radices)
    spec = _loading(GeneralizedLumpingSpec.from_json, obj, sizes)
    if "factors" in obj:
        factors = [_loading(MarkovOperator.from_json, f) for f in obj["factors"]]
    else:
        factors = [uniform(q) for q in sizes]
    L = generalized_product_partition(spec, factors, check_against=P)
    return _emit(args, {"partition": L.to_json(), "lumped": lump(P, L).operator.to_json()})


def cmd_lump_orbit(args) -> int:
    P = _load_chain(args.chain)
    _, _, gens = _load_group(args.group)
    lumped = orbit_lump(P, gens)
    return _emit(
        args, {"partition": lumped.partition.to_json(), "lumped": lumped.operator.to_json()}
    )


# -- spectrum ----------------------------------------------------------------


def cmd_spectrum(args) -> int:
    P = _load_chain(args.chain)
    pi = None
    if args.measure:
        obj = _read_json(args.measure)
        try:
            pi = _loading(Measure, [parse_rational(w) for w in obj["weights"]])
        except (KeyError, TypeError) as exc:
            raise _InputError(f"bad measure JSON: {exc}") from exc
    spec = spectrum(P, pi)
    out = spec.to_json()
    if args.exact_check:
        q, n = (int(t) for t in args.exact_check.split(","))
        closed = tree_spectrum(q, n)
        numeric = spec.values()
        exact = closed.values()
        agrees = len(numeric) == len(exact) and all(
            abs(a - float(b)) <= 1e-9 for a, b in zip(numeric, exact)
        )
        out["exact_check"] = {"matches": agrees, "closed_form": closed.to_json()["eigenvalues"]}
    return _emit(args, out)


# -- group -------------------------------------------------------------------


def cmd_group_orbits(args) -> int:
    p, q, gens = _load_group(args.group)
    part = orbits(gens, ProductIndex((q,) * p.n))
    return _emit(args, part.to_json())


def cmd_group_reconstruct(args) -> int:
    L = _load_partition(args.partition)
    gens = reconstruct_group(L, args.q, args.n)
    out = {
        "poset": chain_poset(args.n).to_json(),
        "q": args.q,
        "generators": [g.to_json() for g in gens],
    }
    return _emit(args, out)


def cmd_group_induced(args) -> int:
    P = _load_chain(args.chain)
    L = _load_partition(args.partition)
    p = _load_poset(args.poset)
    induced = is_group_induced(P, L, p, (args.q,) * p.n, cap=args.cap)
    return _emit(args, {"group_induced": induced})


# -- search ------------------------------------------------------------------


def cmd_search_lumpings(args) -> int:
    P = _load_chain(args.chain)
    lumpings = enumerate_lumpings(P, cap=args.cap)
    classify = args.group_induced_only or args.not_group_induced or args.classify
    ambient = None
    if classify:
        if not args.poset or not args.q:
            raise _InputError("classification needs --poset and -q for the ambient group")
        p = _load_poset(args.poset)
        ambient = (p, (args.q,) * p.n)
    rows = []
    for L in lumpings:
        item = {"parts": [list(p) for p in L.parts]}
        if ambient:
            item["group_induced"] = is_group_induced(P, L, ambient[0], ambient[1])
        rows.append(item)
    if args.group_induced_only:
        rows = [r for r in rows if r["group_induced"]]
    elif args.not_group_induced:
        rows = [r for r in rows if not r["group_induced"]]
    out = {"dim": P.dim, "count": len(rows), "lumpings": rows}
    if ambient:
        out["group_induced_count"] = sum(1 for r in rows if r["group_induced"])
    return _emit(args, out)


# -- driver ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="posetlump", description=__doc__)
    top.add_argument("--seed", type=int, default=None, help="seed for randomized corpora")
    top.add_argument("--output", default=None, help="write JSON here instead of stdout")
    sub = top.add_subparsers(dest="command", required=True)

    poset = sub.add_parser("poset").add_subparsers(dest="action", required=True)
    g = poset.add_parser("check")
    g.add_argument("poset")
    g.set_defaults(func=cmd_poset_check)
    g = poset.add_parser("ancestrals")
    g.add_argument("poset")
    g.set_defaults(func=cmd_poset_ancestrals)
    g = poset.add_parser("antichains")
    g.add_argument("poset")
    g.set_defaults(func=cmd_poset_antichains)
    g = poset.add_parser("fibered")
    g.add_argument("poset")
    g.add_argument("--remove", required=True)
    g.set_defaults(func=cmd_poset_fibered)

    chain = sub.add_parser("chain").add_subparsers(dest="action", required=True)
    g = chain.add_parser("crested")
    g.add_argument("poset")
    g.add_argument("--weights", required=True)
    g.add_argument("-q", type=int, default=None)
    g.add_argument("--factors", default=None)
    g.set_defaults(func=cmd_chain_crested)
    g = chain.add_parser("insect")
    g.add_argument("poset")
    g.add_argument("-q", type=int, required=True)
    g.add_argument("--coefficients", action="store_true")
    g.set_defaults(func=cmd_chain_insect)

    lump_p = sub.add_parser("lump").add_subparsers(dest="action", required=True)
    g = lump_p.add_parser("verify")
    g.add_argument("chain")
    g.add_argument("partition")
    g.set_defaults(func=cmd_lump_verify)
    g = lump_p.add_parser("apply")
    g.add_argument("chain")
    g.add_argument("partition")
    g.set_defaults(func=cmd_lump_apply)
    g = lump_p.add_parser("delete")
    g.add_argument("chain")
    g.add_argument("--remove", required=True)
    g.set_defaults(func=cmd_lump_delete)
    g = lump_p.add_parser("product")
    g.add_argument("chain")
    g.add_argument("spec")
    g.set_defaults(func=cmd_lump_product)
    g = lump_p.add_parser("generalized")
    g.add_argument("chain")
    g.add_argument("spec")
    g.set_defaults(func=cmd_lump_generalized)
    g = lump_p.add_parser("orbit")
    g.add_argument("chain")
    g.add_argument("group")
    g.set_defaults(func=cmd_lump_orbit)

    g = sub.add_parser("spectrum")
    g.add_argument("chain")
    g.add_argument("--measure", default=None)
    g.add_argument("--exact-check", default=None, metavar="Q,N")
    g.set_defaults(func=cmd_spectrum)

    group = sub.add_parser("group").add_subparsers(dest="action", required=True)
    g = group.add_parser("orbits")
    g.add_argument("group")
    g.set_defaults(func=cmd_group_orbits)
    g = group.add_parser("reconstruct")
    g.add_argument("partition")
    g.add_argument("-q", type=int, required=True)
    g.add_argument("-n", type=int, required=True)
    g.set_defaults(func=cmd_group_reconstruct)
    g = group.add_parser("induced")
    g.add_argument("chain")
    g.add_argument("partition")
    g.add_argument("--poset", required=True)
    g.add_argument("-q", type=int, required=True)
    g.add_argument("--cap", type=int, default=10**6)
    g.set_defaults(func=cmd_group_induced)

    search = sub.add_parser("search").add_subparsers(dest="action", required=True)
    g = search.add_parser("lumpings")
    g.add_argument("chain")
    g.add_argument("--poset", default=None)
    g.add_argument("-q", type=int, default=None)
    g.add_argument("--cap", type=int, default=12)
    g.add_argument("--classify", action="store_true")
    g.add_argument("--group-induced-only", action="store_true")
    g.add_argument("--not-group-induced", action="store_true")
    g.set_defaults(func=cmd_search_lumpings)

    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed is not None:
        random.seed(args.seed)
    try:
        return args.func(args)
    except _InputError as exc:
        payload = {"error": exc.name, "detail": str(exc)}
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return 2
    except PosetLumpError as exc:
        payload = {"error": type(exc).__name__, "detail": str(exc)}
        witness = getattr(exc, "witness", None)
        if witness is not None and hasattr(witness, "to_json"):
            payload["witness"] = witness.to_json()
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
