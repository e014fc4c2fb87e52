"""Partitions of state spaces and exact lumping machinery.

A partition is a lumping of a chain when the row mass sent into every
part is constant across each part; the quotient chain is then well
defined. All checks here are exact rational comparisons, so a failure
always comes with a concrete witness: two states in one part whose
mass into some part differs.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import products
from .errors import (
    FactorNotLumpable,
    FormatError,
    InternalCheckFailed,
    NotLumpable,
    TableIncomplete,
    ValueNotLumping,
)
from .poset import Poset, as_mask, elements_of, fibered_over, reduced_poset
from .stochastic import (
    MarkovOperator,
    Measure,
    ProductIndex,
    convex_combination,
    format_rational,
    identity,
    kron,
    uniform,
)


class Partition:
    """Disjoint cover of 0..dim-1 in canonical form.

    Parts are sorted by their minimum element and states inside a part
    ascend, so structural equality is partition equality.
    """

    __slots__ = ("dim", "parts", "lookup")

    def __init__(self, dim: int, parts):
        cleaned = tuple(sorted((tuple(sorted(p)) for p in parts), key=lambda p: p[0]))
        lookup = [None] * dim
        for pid, part in enumerate(cleaned):
            if not part:
                raise FormatError("empty part")
            for s in part:
                if not 0 <= s < dim:
                    raise FormatError(f"state {s} not in 0..{dim - 1}")
                if lookup[s] is not None:
                    raise FormatError(f"state {s} appears in two parts")
                lookup[s] = pid
        if any(v is None for v in lookup):
            missing = [s for s, v in enumerate(lookup) if v is None]
            raise FormatError(f"states {missing} not covered")
        self.dim = dim
        self.parts = cleaned
        self.lookup = tuple(lookup)

    @property
    def k(self) -> int:
        return len(self.parts)

    def part_of(self, state: int) -> int:
        return self.lookup[state]

    @staticmethod
    def identity(dim: int) -> "Partition":
        return Partition(dim, [[s] for s in range(dim)])

    @staticmethod
    def universal(dim: int) -> "Partition":
        return Partition(dim, [range(dim)])

    def __eq__(self, other):
        return (
            isinstance(other, Partition)
            and self.dim == other.dim
            and self.parts == other.parts
        )

    def __hash__(self):
        return hash((self.dim, self.parts))

    def __repr__(self):
        return f"Partition({self.dim}, {[list(p) for p in self.parts]})"

    def to_json(self) -> dict:
        return {"dim": self.dim, "parts": [list(p) for p in self.parts]}

    @staticmethod
    def from_json(obj) -> "Partition":
        try:
            return Partition(int(obj["dim"]), [[int(s) for s in p] for p in obj["parts"]])
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"bad partition JSON: {exc}") from exc


@dataclass(frozen=True)
class LumpWitness:
    """Two states of one part whose mass into some part differs."""

    part: int
    target: int
    x: int
    y: int
    sum_x: Fraction
    sum_y: Fraction

    def __str__(self):
        return (
            f"states {self.x} and {self.y} share part {self.part} but send "
            f"{self.sum_x} vs {self.sum_y} into part {self.target}"
        )

    def to_json(self) -> dict:
        return {
            "part": self.part,
            "target": self.target,
            "x": self.x,
            "y": self.y,
            "sum_x": format_rational(self.sum_x),
            "sum_y": format_rational(self.sum_y),
        }


def part_sums(P: MarkovOperator, L: Partition):
    """sums[x][j] = exact mass state x sends into part j."""
    if P.dim != L.dim:
        raise FormatError(f"operator dim {P.dim} != partition dim {L.dim}")
    sums = []
    for row in P.rows:
        acc = [Fraction(0)] * L.k
        for y, v in enumerate(row):
            if v:
                acc[L.lookup[y]] += v
        sums.append(acc)
    return sums


def is_lumping(P: MarkovOperator, L: Partition):
    """Exact constancy check; returns (ok, witness_or_None)."""
    sums = part_sums(P, L)
    for pid, part in enumerate(L.parts):
        base = part[0]
        for x in part[1:]:
            for j in range(L.k):
                if sums[x][j] != sums[base][j]:
                    return False, LumpWitness(pid, j, base, x, sums[base][j], sums[x][j])
    return True, None


@dataclass(frozen=True)
class LumpedChain:
    partition: Partition
    operator: MarkovOperator

    def to_json(self) -> dict:
        return {"partition": self.partition.to_json(), "operator": self.operator.to_json()}


def lump(P: MarkovOperator, L: Partition) -> LumpedChain:
    """Quotient chain on the parts; raises NotLumpable with a witness."""
    sums = part_sums(P, L)
    for pid, part in enumerate(L.parts):
        base = part[0]
        for x in part[1:]:
            for j in range(L.k):
                if sums[x][j] != sums[base][j]:
                    raise NotLumpable(LumpWitness(pid, j, base, x, sums[base][j], sums[x][j]))
    rows = [sums[part[0]] for part in L.parts]
    return LumpedChain(L, MarkovOperator(rows))


def lump_measure(pi: Measure, L: Partition) -> Measure:
    """Push a measure down to the parts by summation."""
    return Measure([sum(pi[s] for s in part) for part in L.parts])


def compose_lumpings(P: MarkovOperator, L: Partition, M) -> Partition:
    """Coarsen a lumping by a lumping of the lumped chain.

    M partitions the part ids of L. The union partition is returned and
    checked against P directly; by the two-stage argument it is always
    a lumping, so a failure here is a bug.
    """
    lumped = lump(P, L)
    if not isinstance(M, Partition):
        M = Partition(L.k, M)
    if M.dim != L.k:
        raise FormatError(f"outer partition covers {M.dim} parts, chain has {L.k}")
    ok, wit = is_lumping(lumped.operator, M)
    if not ok:
        raise NotLumpable(wit, "outer partition does not lump the lumped chain")
    merged = Partition(
        P.dim, [[s for pid in group for s in L.parts[pid]] for group in M.parts]
    )
    ok, wit = is_lumping(P, merged)
    if not ok:
        raise InternalCheckFailed(f"composed partition failed the direct check: {wit}")
    return merged


# -- deletion lumpings ---------------------------------------------------


def deletion_partition(index: ProductIndex, remove) -> Partition:
    """Identify states agreeing on every coordinate outside the removal set."""
    rmask = as_mask(remove)
    n = len(index.radices)
    kept = [e for e in range(1, n + 1) if not rmask >> (e - 1) & 1]
    groups: dict[tuple, list[int]] = {}
    for state, coords in enumerate(index.states()):
        key = tuple(coords[e - 1] for e in kept)
        groups.setdefault(key, []).append(state)
    return Partition(index.size, list(groups.values()))


def deletion_closed_form(p: Poset, remove, weights, sizes) -> MarkovOperator:
    """Lumped operator after deleting coordinates, all factors uniform.

    Every term keeps a uniform block on what remains of the closed
    down-set of its element and the identity elsewhere. Valid only for
    all-uniform factor chains.
    """
    rmask = as_mask(remove)
    weights = [Fraction(w) for w in weights]
    sizes = list(sizes)
    kept = [e for e in range(1, p.n + 1) if not rmask >> (e - 1) & 1]
    if not kept:
        raise FormatError("cannot delete every coordinate")
    terms = []
    for i in range(1, p.n + 1):
        hset = p.hereditary_closed(i)
        factors = []
        for e in kept:
            if hset >> (e - 1) & 1:
                factors.append(uniform(sizes[e - 1]))
            else:
                factors.append(identity(sizes[e - 1]))
        terms.append(kron(factors))
    return convex_combination(weights, terms)


@dataclass(frozen=True)
class ReducedCrested:
    """Deletion lumping recognized as a crested product on the reduced poset."""

    poset: Poset
    kept: tuple[int, ...]
    weights: tuple[Fraction, ...]
    operator: MarkovOperator

    def __bool__(self):
        return True


@dataclass(frozen=True)
class NotCrested:
    """Deletion lumping that is no crested product; carries the reason."""

    element: int
    reason: str
    candidates: tuple[int, ...] = ()

    def __bool__(self):
        return False


def reduced_crested_equivalence(p: Poset, remove, weights, sizes):
    """Classify a deletion lumping of an all-uniform crested product.

    When the removal set is fibered, the lumped chain is again a
    crested product on the reduced poset: each anchor absorbs the
    weight of its fiber. Otherwise returns NotCrested with the element
    that breaks the fibration. The reduced product is rebuilt and
    compared with the closed-form lumped operator entry by entry.
    """
    rmask = as_mask(remove)
    weights = [Fraction(w) for w in weights]
    sizes = list(sizes)
    fib = fibered_over(p, rmask)
    if not fib:
        return NotCrested(fib.element, fib.reason, fib.candidates)
    reduced, kept = reduced_poset(p, rmask)
    new_weights = []
    for e in kept:
        w = weights[e - 1]
        if e in fib.fibers:
            w += sum(weights[r - 1] for r in fib.fibers[e])
        new_weights.append(w)
    factors = [uniform(sizes[e - 1]) for e in kept]
    spec = products.CrestedSpec(reduced, factors, new_weights)
    rebuilt = products.crested_product(spec)
    direct = deletion_closed_form(p, rmask, weights, sizes)
    if rebuilt != direct:
        raise InternalCheckFailed("reduced crested product differs from the lumped chain")
    return ReducedCrested(reduced, kept, tuple(new_weights), rebuilt)


# -- product lumpings ----------------------------------------------------


def direct_product_partition(factors, parts, check_against: MarkovOperator | None = None):
    """Product of per-factor lumpings.

    Verifies each factor partition against its factor chain first
    (FactorNotLumpable names the offender). With check_against given,
    the product partition is also verified against that operator.
    """
    factors = list(factors)
    parts = list(parts)
    if len(factors) != len(parts):
        raise FormatError("one partition per factor required")
    for i, (op, part) in enumerate(zip(factors, parts), start=1):
        ok, wit = is_lumping(op, part)
        if not ok:
            raise FactorNotLumpable(i, wit)
    index = ProductIndex(tuple(op.dim for op in factors))
    groups: dict[tuple, list[int]] = {}
    for state, coords in enumerate(index.states()):
        key = tuple(part.lookup[c] for part, c in zip(parts, coords))
        groups.setdefault(key, []).append(state)
    result = Partition(index.size, list(groups.values()))
    if check_against is not None:
        ok, wit = is_lumping(check_against, result)
        if not ok:
            raise NotLumpable(wit, "product partition does not lump the given chain")
    return result


@dataclass(frozen=True)
class GeneralizedLumpingSpec:
    """Per-element partition tables keyed by ancestor part labels.

    Maximal elements get one fixed base partition; every other element
    gets a table sending each reachable tuple of ancestor part labels
    (ancestors in increasing element order) to a partition of that
    element's alphabet.
    """

    poset: Poset
    base: dict
    tables: dict

    def to_json(self) -> dict:
        out = {"poset": self.poset.to_json(), "elements": {}}
        for e, part in sorted(self.base.items()):
            out["elements"][str(e)] = {"base": [list(p) for p in part.parts]}
        for e, table in sorted(self.tables.items()):
            enc = {}
            for key, part in sorted(table.items()):
                enc["(" + ",".join(str(v) for v in key) + ")"] = [list(p) for p in part.parts]
            out["elements"][str(e)] = {"table": enc}
        return out

    @staticmethod
    def from_json(obj, sizes) -> "GeneralizedLumpingSpec":
        try:
            p = Poset.from_json(obj["poset"])
            base = {}
            tables = {}
            for key, val in obj["elements"].items():
                e = int(key)
                if "base" in val:
                    base[e] = Partition(sizes[e - 1], val["base"])
                else:
                    table = {}
                    for cell, parts in val["table"].items():
                        tup = tuple(
                            int(t) for t in cell.strip("()").split(",") if t.strip() != ""
                        )
                        table[tup] = Partition(sizes[e - 1], parts)
                    tables[e] = table
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"bad generalized lumping JSON: {exc}") from exc
        return GeneralizedLumpingSpec(p, base, tables)


def generalized_product_partition(
    spec: GeneralizedLumpingSpec,
    factors,
    order=None,
    check_against: MarkovOperator | None = None,
) -> Partition:
    """Build the partition induced by ancestor-dependent factor lumpings.

    Two states are identified when, element by element, their letters
    fall in the same cell of the partition selected by their (equal)
    ancestor labels. Elements are processed along a linear extension
    that puts each element after all of its ancestors; the result does
    not depend on which one.
    """
    p = spec.poset
    factors = list(factors)
    if len(factors) != p.n:
        raise FormatError(f"expected {p.n} factor chains, got {len(factors)}")
    for e in range(1, p.n + 1):
        if p.ancestral(e) == 0:
            if e not in spec.base:
                raise TableIncomplete(e, "base")
        elif e not in spec.tables:
            raise TableIncomplete(e, "table")
    for e, part in spec.base.items():
        ok, wit = is_lumping(factors[e - 1], part)
        if not ok:
            raise ValueNotLumping(e, "base", wit)
    for e, table in spec.tables.items():
        for key, part in table.items():
            ok, wit = is_lumping(factors[e - 1], part)
            if not ok:
                raise ValueNotLumping(e, key, wit)
    if order is None:
        order = sorted(range(1, p.n + 1), key=lambda e: bin(p.ancestral(e)).count("1"))
    else:
        order = list(order)
        seen = set()
        for e in order:
            if any(a not in seen for a in elements_of(p.ancestral(e))):
                raise FormatError(f"element {e} ordered before one of its ancestors")
            seen.add(e)
        if len(seen) != p.n:
            raise FormatError("order must list every element once")
    index = ProductIndex(tuple(op.dim for op in factors))
    groups: dict[tuple, list[int]] = {}
    for state, coords in enumerate(index.states()):
        labels = {}
        for e in order:
            anc = elements_of(p.ancestral(e))
            if not anc:
                cell = spec.base[e]
            else:
                key = tuple(labels[a] for a in anc)
                cell = spec.tables[e].get(key)
                if cell is None:
                    raise TableIncomplete(e, key)
            labels[e] = cell.lookup[coords[e - 1]]
        groups.setdefault(tuple(labels[e] for e in range(1, p.n + 1)), []).append(state)
    result = Partition(index.size, list(groups.values()))
    if check_against is not None:
        ok, wit = is_lumping(check_against, result)
        if not ok:
            raise NotLumpable(wit, "generalized product does not lump the given chain")
    return result


def indicator_invariance(P: MarkovOperator, L: Partition) -> bool:
    """Invariance of the span of part indicators under the operator.

    Exact: P applied to each indicator must again be constant on every
    part. Agrees with is_lumping on all inputs.
    """
    if P.dim != L.dim:
        raise FormatError(f"operator dim {P.dim} != partition dim {L.dim}")
    for part in L.parts:
        ind = [Fraction(1) if s in part else Fraction(0) for s in range(P.dim)]
        image = P.apply(ind)
        for q in L.parts:
            first = image[q[0]]
            if any(image[s] != first for s in q[1:]):
                return False
    return True
