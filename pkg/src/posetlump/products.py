"""Chains built over a poset: crested products and insect chains.

The crested product mixes one term per poset element: that element
moves by its own factor chain, everything strictly below it is
re-randomized uniformly, everything else stays put. The insect chain
is the special member whose mixture weights come from a recursion over
the lattice of ancestral subsets; on a chain poset it is the classical
walk on the boundary of a regular rooted tree.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    DegenerateDenominator,
    DimMismatch,
    FormatError,
    IndexOutOfRange,
    InternalCheckFailed,
    WeightSumMismatch,
)
from .poset import AncestralFamily, Poset, elements_of
from .stochastic import (
    MarkovOperator,
    ProductIndex,
    convex_combination,
    format_rational,
    identity,
    kron,
    uniform,
)

ONE = Fraction(1)


@dataclass(frozen=True)
class CrestedSpec:
    """Poset, one factor chain per element, and strict mixture weights."""

    poset: Poset
    factors: tuple
    weights: tuple

    def __init__(self, poset, factors, weights):
        factors = tuple(factors)
        weights = tuple(Fraction(w) for w in weights)
        if len(factors) != poset.n or len(weights) != poset.n:
            raise DimMismatch(f"need {poset.n} factors and weights")
        if any(op.dim < 2 for op in factors):
            raise FormatError("factor state spaces must have at least 2 states")
        if any(w <= 0 for w in weights):
            raise WeightSumMismatch("weights must be strictly positive")
        if sum(weights) != ONE:
            raise WeightSumMismatch(f"weights sum to {sum(weights)}, not 1")
        object.__setattr__(self, "poset", poset)
        object.__setattr__(self, "factors", factors)
        object.__setattr__(self, "weights", weights)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(op.dim for op in self.factors)

    @property
    def index(self) -> ProductIndex:
        return ProductIndex(self.sizes)


def crested_product(spec: CrestedSpec) -> MarkovOperator:
    """Assemble the full product operator exactly."""
    p = spec.poset
    terms = []
    for i in range(1, p.n + 1):
        hset = p.hereditary(i)
        slots = []
        for j in range(1, p.n + 1):
            if j == i:
                slots.append(spec.factors[j - 1])
            elif hset >> (j - 1) & 1:
                slots.append(uniform(spec.factors[j - 1].dim))
            else:
                slots.append(identity(spec.factors[j - 1].dim))
        terms.append(kron(slots))
    return convex_combination(spec.weights, terms)


def crested_entry(spec: CrestedSpec, x, y) -> Fraction:
    """Pointwise transition probability, no matrix assembled."""
    p = spec.poset
    x = tuple(x)
    y = tuple(y)
    if len(x) != p.n or len(y) != p.n:
        raise IndexOutOfRange(f"tuples must have {p.n} coordinates")
    for c, op in zip(x, spec.factors):
        if not 0 <= c < op.dim:
            raise IndexOutOfRange(f"coordinate {c} out of range")
    for c, op in zip(y, spec.factors):
        if not 0 <= c < op.dim:
            raise IndexOutOfRange(f"coordinate {c} out of range")
    total = Fraction(0)
    for i in range(1, p.n + 1):
        v = spec.weights[i - 1] * spec.factors[i - 1].rows[x[i - 1]][y[i - 1]]
        if not v:
            continue
        hset = p.hereditary(i)
        for j in range(1, p.n + 1):
            if j == i:
                continue
            if hset >> (j - 1) & 1:
                v /= spec.factors[j - 1].dim
            elif x[j - 1] != y[j - 1]:
                v = Fraction(0)
                break
        total += v
    return total


@dataclass(frozen=True)
class InsectCoefficients:
    """Climb/stop coefficients over the ancestral-subset lattice.

    alpha maps each cover pair (bigger set, smaller set) to the chance
    of climbing that edge; weights maps each ancestral subset except
    the full one to the mixture weight of its term.
    """

    family: AncestralFamily
    alpha: dict
    weights: dict
    q: int

    def weight(self, subset_mask: int) -> Fraction:
        return self.weights[subset_mask]

    def to_json(self) -> dict:
        def label(mask):
            return "{" + ",".join(str(e) for e in elements_of(mask)) + "}"

        alphas = {
            f"{label(src)}<{label(dst)}": format_rational(v)
            for (src, dst), v in sorted(self.alpha.items(), reverse=True)
        }
        weights = {
            label(m): format_rational(v) for m, v in sorted(self.weights.items(), reverse=True)
        }
        return {"alphas": alphas, "weights": weights}


def insect_coefficients(p: Poset, q: int) -> InsectCoefficients:
    """Coefficient recursion over the cover relation of the ancestral lattice.

    Walk coefficients alpha are computed from the full set outward; a
    set covered directly by the full set with climb chance 1 switches
    its outgoing edges to the special denominator q + (number of
    outgoing covers). The weight of a set sums, over all maximal cover
    chains reaching it, the chain's climb product times the chance of
    stopping there; stopping is certain at the empty set.
    """
    if q < 2:
        raise FormatError("insect chains need at least 2 letters per coordinate")
    fam = p.ancestral_family()
    full = p.full_mask
    alpha: dict[tuple[int, int], Fraction] = {}
    # sets come sorted by decreasing size, so parents precede children
    for src in fam.sets:
        kids = fam.children(src)
        if not kids:
            continue
        if src == full:
            val = Fraction(1, len(kids))
            for dst in kids:
                alpha[(src, dst)] = val
            continue
        if (full, src) in alpha and alpha[(full, src)] == 1:
            val = Fraction(1, q + len(kids))
            for dst in kids:
                alpha[(src, dst)] = val
            continue
        ups = fam.parents(src)
        den = len(ups) * q + len(kids) - q * sum(alpha[(j, src)] for j in ups)
        if den <= 0:
            raise DegenerateDenominator(
                f"denominator {den} for edges out of {elements_of(src)}"
            )
        val = Fraction(1, 1) / den
        for dst in kids:
            alpha[(src, dst)] = val
    reach: dict[int, Fraction] = {full: ONE}
    for src in fam.sets:
        if src == full:
            continue
        reach[src] = sum(
            (reach[j] * alpha[(j, src)] for j in fam.parents(src)), Fraction(0)
        )
    weights: dict[int, Fraction] = {}
    for m in fam.sets:
        if m == full:
            continue
        stay = ONE - sum((alpha[(m, c)] for c in fam.children(m)), Fraction(0))
        weights[m] = reach[m] * stay
    total = sum(weights.values())
    if total != ONE:
        raise InternalCheckFailed(f"insect weights sum to {total}, not 1")
    if any(w < 0 for w in weights.values()) or any(
        not 0 <= a <= 1 for a in alpha.values()
    ):
        raise InternalCheckFailed("insect coefficients left [0, 1]")
    return InsectCoefficients(fam, alpha, weights, q)


def insect_operator(p: Poset, q: int) -> MarkovOperator:
    """Mixture of freeze-inside/randomize-outside terms per ancestral subset."""
    coeffs = insect_coefficients(p, q)
    used = [(m, w) for m, w in sorted(coeffs.weights.items(), reverse=True) if w]
    terms = []
    for m, _ in used:
        slots = [
            identity(q) if m >> (j - 1) & 1 else uniform(q) for j in range(1, p.n + 1)
        ]
        terms.append(kron(slots))
    return convex_combination([w for _, w in used], terms)


def block_distance(p: Poset, x, y) -> int:
    """n minus the size of the largest ancestral subset where x and y agree.

    The largest such subset is the agreement set pruned to coordinates
    whose whole strict up-set also agrees; no lattice enumeration is
    needed.
    """
    x = tuple(x)
    y = tuple(y)
    if len(x) != p.n or len(y) != p.n:
        raise IndexOutOfRange(f"tuples must have {p.n} coordinates")
    agree = 0
    for j in range(p.n):
        if x[j] == y[j]:
            agree |= 1 << j
    best = 0
    for j in range(1, p.n + 1):
        if agree >> (j - 1) & 1 and not p.ancestral(j) & ~agree:
            best += 1
    return p.n - best


def block_distance_matrix(p: Poset, q: int):
    """Distance table over all states of the q-ary product space."""
    index = ProductIndex((q,) * p.n)
    states = list(index.states())
    return [[block_distance(p, a, b) for b in states] for a in states]


# -- the rooted-tree special case ---------------------------------------


def tree_alphas(q: int, n: int) -> list[Fraction]:
    """Climb coefficients on the depth-n chain lattice, closed form."""
    out = [ONE]
    for j in range(1, n):
        out.append(Fraction(q**j - 1, q ** (j + 1) - 1))
    out.append(Fraction(0))
    return out


def tree_insect_entry(q: int, n: int, j: int) -> Fraction:
    """Transition probability at distance j on the depth-n q-ary tree.

    Closed form; the j = 0 and j = 1 values coincide. Built
    independently of the general lattice recursion so the two routes
    can be compared.
    """
    if not 0 <= j <= n:
        raise IndexOutOfRange(f"distance {j} not in 0..{n}")
    a = tree_alphas(q, n)
    lo = max(j, 1)
    total = Fraction(0)
    climb = ONE
    for m in range(1, lo):
        climb *= a[m]
    for i in range(lo, n + 1):
        total += Fraction(1, q**i) * climb * (ONE - a[i])
        climb *= a[i]
    return total


def tree_insect_operator(q: int, n: int) -> MarkovOperator:
    """Insect chain on the tree boundary, assembled from the closed form."""
    index = ProductIndex((q,) * n)
    entries = [tree_insect_entry(q, n, j) for j in range(n + 1)]
    states = list(index.states())
    rows = []
    for x in states:
        row = []
        for y in states:
            agree = 0
            for xa, ya in zip(x, y):
                if xa != ya:
                    break
                agree += 1
            row.append(entries[n - agree])
        rows.append(row)
    return MarkovOperator(rows, index)
