"""Spectra of reversible chains and eigenfunction transport.

Floating point lives here and only here: a cyclic rotation
eigensolver runs on the symmetrized matrix sqrt(pi(x)/pi(y)) p(x,y).
Everything upstream (operators, measures, lumpings) stays exact, and
the closed-form spectra in this module are exact rationals so numeric
output can be checked against them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    DimMismatch,
    FormatError,
    InternalCheckFailed,
    NotInvariant,
    NotReversible,
)
from .lumping import Partition, lump, lump_measure
from .poset import Poset, elements_of
from .stochastic import (
    MarkovOperator,
    Measure,
    ProductIndex,
    detailed_balance,
    format_rational,
    uniform_measure,
)
from .wreath import _invariance_witness, orbits

JACOBI_TOL = 1e-12
GROUP_TOL = 1e-9


def jacobi_eigh(matrix, tol: float = JACOBI_TOL, max_sweeps: int = 100):
    """Eigensystem of a symmetric matrix by cyclic plane rotations.

    Deterministic sweep order (p < q row major); converges when the
    off-diagonal Frobenius norm drops below tol. Returns (values,
    vectors) with vectors[k] the eigenvector for values[k], unsorted.
    """
    n = len(matrix)
    a = [list(map(float, row)) for row in matrix]
    v = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
    for _ in range(max_sweeps):
        off = math.sqrt(sum(a[p][q] ** 2 for p in range(n) for q in range(n) if p != q))
        if off < tol:
            break
        for p in range(n):
            for q in range(p + 1, n):
                apq = a[p][q]
                if apq == 0.0:
                    continue
                theta = (a[q][q] - a[p][p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = a[k][p]
                    akq = a[k][q]
                    a[k][p] = c * akp - s * akq
                    a[k][q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p][k]
                    aqk = a[q][k]
                    a[p][k] = c * apk - s * aqk
                    a[q][k] = s * apk + c * aqk
                for k in range(n):
                    vkp = v[k][p]
                    vkq = v[k][q]
                    v[k][p] = c * vkp - s * vkq
                    v[k][q] = s * vkp + c * vkq
    else:
        raise ArithmeticError("rotation eigensolver failed to converge")
    values = [a[i][i] for i in range(n)]
    vectors = [[v[k][i] for k in range(n)] for i in range(n)]
    return values, vectors


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues grouped into multiplicities, sorted descending.

    entries hold (value, multiplicity, label); raw_values keeps the
    ungrouped eigenvalue list and vectors, when present, align with it.
    Values are floats unless built from a closed form, in which case
    they are exact Fractions.
    """

    entries: tuple
    raw_values: tuple = ()
    vectors: tuple | None = None

    @property
    def dim(self) -> int:
        return sum(m for _, m, _ in self.entries)

    def values(self):
        """Eigenvalues with multiplicity, descending."""
        out = []
        for value, mult, _ in self.entries:
            out.extend([value] * mult)
        return out

    def distinct(self) -> int:
        return len(self.entries)

    def to_json(self) -> dict:
        out = []
        for value, mult, label in self.entries:
            item = {
                "value": format_rational(value)
                if isinstance(value, (Fraction, int))
                else repr(float(value)),
                "multiplicity": mult,
            }
            if label:
                item["label"] = label
            out.append(item)
        return {"eigenvalues": out}


def group_eigenvalues(values, tol: float = GROUP_TOL, labels=None):
    """Cluster a descending value list into (value, multiplicity) runs."""
    entries = []
    run = []
    for x in sorted(values, reverse=True):
        if run and run[0] - x > tol:
            entries.append(run)
            run = []
        run.append(x)
    if run:
        entries.append(run)
    out = []
    for i, run in enumerate(entries):
        label = labels[i] if labels else None
        out.append((run[0], len(run), label))
    return tuple(out)


def spectrum(
    P: MarkovOperator,
    pi: Measure | None = None,
    group_tol: float = GROUP_TOL,
    with_vectors: bool = False,
) -> Spectrum:
    """Numeric spectrum of a reversible chain.

    The chain must be in detailed balance with pi (uniform by
    default); the symmetrized matrix is diagonalized by rotations and
    eigenvalues are grouped at group_tol. With with_vectors the right
    eigenvectors of P itself are attached.
    """
    if pi is None:
        pi = uniform_measure(P.dim)
    if not detailed_balance(P, pi):
        raise NotReversible("chain is not in detailed balance with the given measure")
    weights = [float(w) for w in pi]
    sym = [
        [
            math.sqrt(weights[x] / weights[y]) * float(P.rows[x][y])
            for y in range(P.dim)
        ]
        for x in range(P.dim)
    ]
    values, vectors = jacobi_eigh(sym)
    order = sorted(range(P.dim), key=lambda k: -values[k])
    raw = tuple(values[k] for k in order)
    vecs = None
    if with_vectors:
        # S = D^(1/2) P D^(-1/2): unscale to get eigenvectors of P itself
        vecs = tuple(
            tuple(vectors[k][x] / math.sqrt(weights[x]) for x in range(P.dim))
            for k in order
        )
    return Spectrum(group_eigenvalues(raw, group_tol), raw, vecs)


def spectrum_included(inner: Spectrum, outer: Spectrum, tol: float = GROUP_TOL) -> bool:
    """Multiset inclusion of eigenvalues at a tolerance.

    Each eigenvalue of the inner spectrum must consume a distinct
    eigenvalue of the outer one within tol.
    """
    pool = sorted(outer.values(), reverse=True)
    used = [False] * len(pool)
    for x in sorted(inner.values(), reverse=True):
        hit = None
        for i, y in enumerate(pool):
            if not used[i] and abs(x - y) <= tol:
                hit = i
                break
        if hit is None:
            return False
        used[hit] = True
    return True


# -- eigenfunction transport ------------------------------------------------


def lift_eigenfunction(values_on_parts, L: Partition):
    """Extend a function on parts to the full space, constant per part."""
    if len(values_on_parts) != L.k:
        raise DimMismatch(f"expected {L.k} part values")
    return tuple(values_on_parts[L.lookup[x]] for x in range(L.dim))


def project_eigenfunction(f, L: Partition, zero_tol: float = 1e-10):
    """Average a function over each part; None when everything cancels.

    For an eigenfunction of a chain invariant under a group with orbit
    partition L, the average is (up to scale) the group-symmetrized
    function, so a nonzero result is an eigenfunction of the lumped
    chain with the same eigenvalue.
    """
    if len(f) != L.dim:
        raise DimMismatch(f"expected {L.dim} values")
    exact = all(isinstance(v, (Fraction, int)) for v in f)
    out = []
    for part in L.parts:
        total = sum(f[s] for s in part)
        out.append(Fraction(total, len(part)) if exact else total / len(part))
    if exact:
        if all(v == 0 for v in out):
            return None
    elif all(abs(v) <= zero_tol for v in out):
        return None
    return tuple(out)


def apply_to_parts(P: MarkovOperator, L: Partition, values_on_parts):
    """Apply the chain to the lift and read the result back on parts."""
    lifted = P.apply(lift_eigenfunction(values_on_parts, L))
    return tuple(lifted[part[0]] for part in L.parts)


# -- closed forms on the rooted tree ----------------------------------------


def tree_spectrum(q: int, n: int):
    """Exact spectrum of the depth-n insect chain on the q-ary tree.

    Eigenvalue 1 - (q-1)/(q^(n-j+1) - 1) carries multiplicity
    q^(j-1) (q-1) for j = 1..n, on top of the simple eigenvalue 1; the
    multiplicities add up to q^n.
    """
    if q < 2 or n < 1:
        raise FormatError("need q >= 2 and n >= 1")
    entries = [(Fraction(1), 1, "W_0")]
    for j in range(1, n + 1):
        value = 1 - Fraction(q - 1, q ** (n - j + 1) - 1)
        entries.append((value, q ** (j - 1) * (q - 1), f"W_{j}"))
    return Spectrum(tuple(entries))


def spherical_eigenfunction(q: int, n: int, j: int):
    """Eigenvector of the sphere-lumped tree chain for the j-th eigenvalue.

    Value 1 inside radius n-j+1, 1/(1-q) on that sphere, 0 beyond.
    """
    if not 1 <= j <= n:
        raise FormatError(f"j must lie in 1..{n}")
    edge = n - j + 1
    out = []
    for r in range(n + 1):
        if r < edge:
            out.append(Fraction(1))
        elif r == edge:
            out.append(Fraction(1, 1 - q))
        else:
            out.append(Fraction(0))
    return tuple(out)


# -- antichain bookkeeping for general posets -------------------------------


@dataclass(frozen=True)
class AntichainModules:
    """Dimension and orbit-size tables indexed by antichains.

    For antichain S the module dimension is q^|A(S)| (q-1)^|S| and the
    basepoint-stabilizer orbit has size q^|H(S)| (q-1)^|S|; the orbits
    (free below S, nonzero on S, zero elsewhere) partition the whole
    space.
    """

    poset: Poset
    q: int
    entries: tuple  # (antichain elements, module dim, orbit size)
    orbit_partition: Partition

    def total_dimension(self):
        return sum(d for _, d, _ in self.entries)

    def total_orbit_size(self):
        return sum(o for _, _, o in self.entries)

    def to_json(self) -> dict:
        return {
            "q": self.q,
            "modules": [
                {"antichain": list(s), "dim": d, "orbit": o} for s, d, o in self.entries
            ],
        }


def antichain_modules(p: Poset, q: int) -> AntichainModules:
    """Tabulate module dimensions and stabilizer orbits per antichain."""
    if q < 2:
        raise FormatError("need q >= 2")
    index = ProductIndex((q,) * p.n)
    antichains = p.antichains()
    entries = []
    order = {}
    for pos, s in enumerate(antichains):
        elements = elements_of(s)
        asize = bin(p.ancestral_mask(s)).count("1")
        hsize = bin(p.hereditary_mask(s)).count("1")
        entries.append(
            (elements, q**asize * (q - 1) ** len(elements), q**hsize * (q - 1) ** len(elements))
        )
        order[s] = pos
    # every state's orbit label is the maximal antichain of its support;
    # memoize per support mask since q^n >> 2^n
    tops = [p.maximal_of(m) for m in range(1 << p.n)]
    groups: dict[int, list[int]] = {}
    for state, coords in enumerate(index.states()):
        support = 0
        for pos, c in enumerate(coords):
            if c != 0:
                support |= 1 << pos
        groups.setdefault(tops[support], []).append(state)
    parts = []
    for s, part in groups.items():
        if s not in order:
            raise InternalCheckFailed("support maxima must form antichains")
        if len(part) != entries[order[s]][2]:
            raise InternalCheckFailed("orbit size disagrees with its closed form")
        parts.append(part)
    if len(parts) != len(antichains):
        raise InternalCheckFailed("one orbit per antichain expected")
    partition = Partition(index.size, parts)
    return AntichainModules(p, q, tuple(entries), partition)


# -- orbit-count reports ------------------------------------------------------


@dataclass(frozen=True)
class EigenvalueCountReport:
    distinct_eigenvalues: int
    orbit_count: int
    eigenvalues: tuple  # (value, multiplicity)
    eigenfunctions: tuple  # per distinct eigenvalue, one lumped eigenvector

    @property
    def counts_match(self) -> bool:
        return self.distinct_eigenvalues == self.orbit_count

    def to_json(self) -> dict:
        return {
            "distinct_eigenvalues": self.distinct_eigenvalues,
            "orbit_count": self.orbit_count,
            "counts_match": self.counts_match,
            "eigenvalues": [
                {"value": repr(float(v)), "multiplicity": m} for v, m in self.eigenvalues
            ],
            "eigenfunctions": [[repr(float(x)) for x in f] for f in self.eigenfunctions],
        }


def distinct_eigenvalue_count_check(
    P: MarkovOperator, gens, pi: Measure | None = None
) -> EigenvalueCountReport:
    """Compare distinct eigenvalues of the orbit lumping with orbit count.

    For a chain invariant under a transitive group whose basepoint
    stabilizer produced the orbits, the two numbers agree exactly when
    the module decomposition is multiplicity free with pairwise
    distinct eigenvalues; the report states both numbers either way.
    """
    witness = _invariance_witness(P, gens)
    if witness is not None:
        raise NotInvariant(*witness)
    if pi is None:
        pi = uniform_measure(P.dim)
    lumped = lump(P, orbits(gens, P.index))
    lumped_pi = lump_measure(pi, lumped.partition)
    spec = spectrum(lumped.operator, lumped_pi, with_vectors=True)
    funcs = []
    seen = 0
    for value, mult, _ in spec.entries:
        funcs.append(spec.vectors[seen])
        seen += mult
    return EigenvalueCountReport(
        distinct_eigenvalues=spec.distinct(),
        orbit_count=lumped.partition.k,
        eigenvalues=tuple((v, m) for v, m, _ in spec.entries),
        eigenfunctions=tuple(funcs),
    )
