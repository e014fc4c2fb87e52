"""Finite posets and the combinatorial structure derived from them.

Elements are the integers 1..n. Subsets are bitmasks (bit e-1 holds
element e), which keeps the set algebra cheap at the desk scales this
library targets (n <= 64). Every object here is immutable after
construction and safe to share.

Vocabulary: the ancestral set of i is the strict up-set
A(i) = {j : j > i}; the hereditary set H(i) is the strict down-set;
A[i], H[i] include i itself. A subset is ancestral when it is closed
upward, and the ancestral subsets ordered by reverse inclusion form a
lattice whose cover chains drive the chain-product coefficients
elsewhere in the package.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import (
    AntisymmetryViolation,
    EmptyResult,
    FormatError,
    IndexOutOfRange,
    RedundantCovers,
    ReflexivityViolation,
    SizeLimit,
    TransitivityViolation,
    Unreachable,
)

DEFAULT_ENUMERATION_CAP = 1 << 20


def mask_of(elements) -> int:
    """Bitmask of an iterable of 1-based elements."""
    m = 0
    for e in elements:
        m |= 1 << (e - 1)
    return m


def elements_of(mask: int) -> tuple[int, ...]:
    """Sorted 1-based elements of a bitmask."""
    out = []
    e = 1
    while mask:
        if mask & 1:
            out.append(e)
        mask >>= 1
        e += 1
    return tuple(out)


def as_mask(subset) -> int:
    """Accept either a bitmask or an iterable of elements."""
    if isinstance(subset, int):
        return subset
    return mask_of(subset)


class Poset:
    """A finite partial order on 1..n with cached up/down closures."""

    __slots__ = ("n", "_up", "_down", "covers", "full_mask")

    def __init__(self, up_masks: tuple[int, ...]):
        # up_masks[i] = bitmask of {j : element i+1 <= element j+1}, self bit set.
        self.n = len(up_masks)
        self._up = tuple(up_masks)
        down = [0] * self.n
        for i in range(self.n):
            m = up_masks[i]
            while m:
                j = (m & -m).bit_length() - 1
                down[j] |= 1 << i
                m &= m - 1
        self._down = tuple(down)
        self.full_mask = (1 << self.n) - 1
        self.covers = self._transitive_reduction()

    def _transitive_reduction(self) -> tuple[tuple[int, int], ...]:
        pairs = []
        for i in range(self.n):
            strict_up = self._up[i] & ~(1 << i)
            m = strict_up
            while m:
                j = (m & -m).bit_length() - 1
                m &= m - 1
                # j covers i unless something sits strictly between them
                between = strict_up & (self._down[j] & ~(1 << j))
                if between == 0:
                    pairs.append((j + 1, i + 1))  # (upper, lower)
        return tuple(sorted(pairs))

    # -- element queries (1-based) -------------------------------------

    def _check(self, i: int) -> int:
        if not 1 <= i <= self.n:
            raise IndexOutOfRange(f"element {i} not in 1..{self.n}")
        return i - 1

    def leq(self, i: int, j: int) -> bool:
        """True when i is below or equal to j."""
        a = self._check(i)
        b = self._check(j)
        return bool(self._up[a] >> b & 1)

    def ancestral(self, i: int) -> int:
        """A(i), the strict up-set of i, as a mask."""
        k = self._check(i)
        return self._up[k] & ~(1 << k)

    def ancestral_closed(self, i: int) -> int:
        return self._up[self._check(i)]

    def hereditary(self, i: int) -> int:
        """H(i), the strict down-set of i, as a mask."""
        k = self._check(i)
        return self._down[k] & ~(1 << k)

    def hereditary_closed(self, i: int) -> int:
        return self._down[self._check(i)]

    # -- set-lifted variants: unions over the members of a subset ------

    def ancestral_mask(self, subset) -> int:
        m = as_mask(subset)
        out = 0
        for e in elements_of(m):
            out |= self.ancestral(e)
        return out

    def ancestral_closed_mask(self, subset) -> int:
        m = as_mask(subset)
        out = 0
        for e in elements_of(m):
            out |= self.ancestral_closed(e)
        return out

    def hereditary_mask(self, subset) -> int:
        m = as_mask(subset)
        out = 0
        for e in elements_of(m):
            out |= self.hereditary(e)
        return out

    def hereditary_closed_mask(self, subset) -> int:
        m = as_mask(subset)
        out = 0
        for e in elements_of(m):
            out |= self.hereditary_closed(e)
        return out

    # -- structure tests ------------------------------------------------

    def is_ancestral(self, subset) -> bool:
        """True when the subset is upward closed."""
        m = as_mask(subset)
        for e in elements_of(m):
            if self.ancestral(e) & ~m:
                return False
        return True

    def is_antichain(self, subset) -> bool:
        m = as_mask(subset)
        for e in elements_of(m):
            if self.ancestral(e) & m:
                return False
        return True

    def maximal_of(self, subset) -> int:
        """Elements of the subset with nothing above them inside it."""
        m = as_mask(subset)
        out = 0
        for e in elements_of(m):
            if not self.ancestral(e) & m:
                out |= 1 << (e - 1)
        return out

    def minimal_of(self, subset) -> int:
        m = as_mask(subset)
        out = 0
        for e in elements_of(m):
            if not self.hereditary(e) & m:
                out |= 1 << (e - 1)
        return out

    # -- enumerations ----------------------------------------------------

    def antichains(self, cap: int = DEFAULT_ENUMERATION_CAP):
        """All antichains (the empty one included), sorted by size then elements."""
        if 1 << self.n > cap:
            raise SizeLimit(f"2^{self.n} antichain candidates exceed cap {cap}")
        found = []

        def grow(start: int, current: int):
            found.append(current)
            for e in range(start, self.n + 1):
                bit = 1 << (e - 1)
                if (self.ancestral(e) | self.hereditary(e)) & current:
                    continue
                grow(e + 1, current | bit)

        grow(1, 0)
        found.sort(key=lambda m: (bin(m).count("1"), elements_of(m)))
        return found

    def ancestral_family(self, cap: int = DEFAULT_ENUMERATION_CAP) -> "AncestralFamily":
        return ancestral_subsets(self, cap)

    # -- plumbing ----------------------------------------------------------

    def __eq__(self, other):
        return isinstance(other, Poset) and self._up == other._up

    def __hash__(self):
        return hash(self._up)

    def __repr__(self):
        return f"Poset(n={self.n}, covers={list(self.covers)})"

    def relation(self) -> list[list[bool]]:
        return [[bool(self._up[i] >> j & 1) for j in range(self.n)] for i in range(self.n)]

    def to_json(self) -> dict:
        return {"n": self.n, "covers": [list(c) for c in self.covers]}

    @staticmethod
    def from_json(obj) -> "Poset":
        try:
            n = int(obj["n"])
            covers = [(int(a), int(b)) for a, b in obj["covers"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"bad poset JSON: {exc}") from exc
        return poset_from_covers(n, covers)


def validate_poset(relation) -> Poset:
    """Build a poset from an n x n boolean relation, rejecting non-orders.

    relation[i][j] truthy means element i+1 is below or equal to
    element j+1. Raises ReflexivityViolation, AntisymmetryViolation or
    TransitivityViolation naming the offending pair or triple.
    """
    n = len(relation)
    if n < 1:
        raise FormatError("poset needs at least one element")
    up = [0] * n
    for i, row in enumerate(relation):
        if len(row) != n:
            raise FormatError(f"relation row {i + 1} has length {len(row)}, expected {n}")
        for j, v in enumerate(row):
            if v:
                up[i] |= 1 << j
    for i in range(n):
        if not up[i] >> i & 1:
            raise ReflexivityViolation(i + 1)
    for i in range(n):
        for j in range(i + 1, n):
            if up[i] >> j & 1 and up[j] >> i & 1:
                raise AntisymmetryViolation(i + 1, j + 1)
    for i in range(n):
        m = up[i] & ~(1 << i)
        while m:
            j = (m & -m).bit_length() - 1
            m &= m - 1
            missing = up[j] & ~up[i]
            if missing:
                k = (missing & -missing).bit_length() - 1
                raise TransitivityViolation(i + 1, j + 1, k + 1)
    return Poset(tuple(up))


def poset_from_covers(n: int, covers) -> Poset:
    """Build a poset from its cover pairs [upper, lower].

    The pair list must be exactly the transitive reduction; implied
    pairs are rejected (RedundantCovers) with the reduction spelled out.
    """
    if n < 1:
        raise FormatError("poset needs at least one element")
    given = []
    for a, b in covers:
        if not (1 <= a <= n and 1 <= b <= n) or a == b:
            raise FormatError(f"bad cover pair ({a}, {b}) for n={n}")
        given.append((a, b))
    up = [1 << i for i in range(n)]
    # relax until closure: b below a propagates a's up-set into b's
    changed = True
    guard = 0
    while changed:
        changed = False
        guard += 1
        if guard > n + 1:
            # a cycle keeps the closure growing past any linear extension
            for a, b in given:
                if up[b - 1] >> (a - 1) & 1 and up[a - 1] >> (b - 1) & 1:
                    raise AntisymmetryViolation(a, b)
            raise AntisymmetryViolation(given[0][0], given[0][1])
        for a, b in given:
            new = up[b - 1] | up[a - 1]
            if new != up[b - 1]:
                up[b - 1] = new
                changed = True
    for i in range(n):
        for j in range(n):
            if i != j and up[i] >> j & 1 and up[j] >> i & 1:
                raise AntisymmetryViolation(i + 1, j + 1)
    p = Poset(tuple(up))
    if set(given) != set(p.covers):
        redundant = sorted(set(given) - set(p.covers))
        raise RedundantCovers(redundant, p.covers)
    return p


def chain_poset(n: int) -> Poset:
    """Total order with 1 on top: i below j exactly when i >= j."""
    return Poset(tuple(mask_of(range(1, i + 2)) for i in range(n)))


def antichain_poset(n: int) -> Poset:
    """The identity relation: no two distinct elements comparable."""
    return Poset(tuple(1 << i for i in range(n)))


class AncestralFamily:
    """All upward closed subsets of a poset, ordered by reverse inclusion.

    In this order the full set I is the minimum and the empty set the
    maximum; A covers B when A contains B with exactly one extra
    element. The family is a lattice (closed under union and
    intersection).
    """

    __slots__ = ("poset", "sets", "_pos", "covers", "_children", "_parents")

    def __init__(self, poset: Poset, sets):
        self.poset = poset
        self.sets = tuple(sorted(sets, key=lambda m: (-bin(m).count("1"), elements_of(m))))
        self._pos = {m: i for i, m in enumerate(self.sets)}
        covers = []
        children = {m: [] for m in self.sets}
        parents = {m: [] for m in self.sets}
        by_size = {}
        for m in self.sets:
            by_size.setdefault(bin(m).count("1"), []).append(m)
        for m in self.sets:
            size = bin(m).count("1")
            for t in by_size.get(size - 1, ()):
                if m & t == t:  # t subset of m, one element smaller
                    covers.append((m, t))
                    children[m].append(t)
                    parents[t].append(m)
        self.covers = tuple(covers)
        self._children = {m: tuple(v) for m, v in children.items()}
        self._parents = {m: tuple(v) for m, v in parents.items()}

    def __len__(self):
        return len(self.sets)

    def __iter__(self):
        return iter(self.sets)

    def __contains__(self, mask):
        return mask in self._pos

    def children(self, mask: int) -> tuple[int, ...]:
        """Sets covered from mask walking toward the empty set."""
        return self._children[mask]

    def parents(self, mask: int) -> tuple[int, ...]:
        return self._parents[mask]

    def leq(self, a: int, b: int) -> bool:
        """Reverse inclusion: a below b exactly when a contains b."""
        return a | b == a

    def maximal_chains(self, frm, to) -> list[tuple[int, ...]]:
        """All cover chains from one member down-to-up toward another.

        Raises Unreachable when `to` is not above `frm` in the reverse
        inclusion order (i.e. not a subset of it).
        """
        a = as_mask(frm)
        b = as_mask(to)
        if a not in self._pos or b not in self._pos:
            raise IndexOutOfRange("chain endpoints must belong to the family")
        if not self.leq(a, b):
            raise Unreachable(f"{elements_of(b)} is not above {elements_of(a)}")
        out = []

        def walk(current, path):
            if current == b:
                out.append(tuple(path))
                return
            for nxt in self._children[current]:
                if self.leq(nxt, b):
                    path.append(nxt)
                    walk(nxt, path)
                    path.pop()

        walk(a, [a])
        return out

    def is_lattice(self) -> bool:
        """Closure under union and intersection, checked exhaustively."""
        for a in self.sets:
            for b in self.sets:
                if (a | b) not in self._pos or (a & b) not in self._pos:
                    return False
        return True


def ancestral_subsets(p: Poset, cap: int = DEFAULT_ENUMERATION_CAP) -> AncestralFamily:
    """Enumerate every upward closed subset of the poset."""
    if 1 << p.n > cap:
        raise SizeLimit(f"2^{p.n} subsets exceed enumeration cap {cap}")
    sets = [m for m in range(1 << p.n) if p.is_ancestral(m)]
    return AncestralFamily(p, sets)


@dataclass(frozen=True)
class FiberedWitness:
    """Witness that a deletion set splits into fibers over outside elements.

    Each removed element r descends through the removed set along the
    recorded cover chain to its anchor s(r), the maximum of what lies
    below r outside the removed set. Fibers group removed elements by
    anchor.
    """

    base: tuple[int, ...]
    fibers: dict = field(hash=False)
    chains: dict = field(hash=False)

    def __bool__(self):
        return True

    def anchor(self, r: int) -> int:
        return self.chains[r][-1]

    def to_json(self) -> dict:
        return {
            "fibered": True,
            "S": list(self.base),
            "fibers": {str(s): list(v) for s, v in sorted(self.fibers.items())},
            "chains": {str(r): list(c) for r, c in sorted(self.chains.items())},
        }


@dataclass(frozen=True)
class NotFibered:
    """Diagnostic result: which element fails and why."""

    element: int
    reason: str  # "no_outside_descendant" or "multiple_maximal" or "no_cover_chain"
    candidates: tuple[int, ...] = ()

    def __bool__(self):
        return False

    def to_json(self) -> dict:
        return {
            "fibered": False,
            "element": self.element,
            "reason": self.reason,
            "candidates": list(self.candidates),
        }


def fibered_over(p: Poset, remove):
    """Decide whether a subset is fibered over the elements just below it.

    Returns a FiberedWitness on success and a NotFibered diagnostic
    otherwise (a result, not an error). For every removed r the set of
    non-removed elements below r must have a unique maximal element
    s(r) (then automatically its maximum), reachable from r by a
    descending cover chain whose interior stays inside the removed set.
    """
    rmask = as_mask(remove)
    if rmask & ~p.full_mask:
        raise IndexOutOfRange("removal set contains elements outside the poset")
    fibers: dict[int, list[int]] = {}
    chains: dict[int, tuple[int, ...]] = {}
    lower = {a: [] for a in range(1, p.n + 1)}
    for a, b in p.covers:
        lower[a].append(b)
    for r in elements_of(rmask):
        outside = p.hereditary(r) & ~rmask
        if outside == 0:
            return NotFibered(r, "no_outside_descendant")
        tops = p.maximal_of(outside)
        if bin(tops).count("1") != 1:
            return NotFibered(r, "multiple_maximal", elements_of(tops))
        s = tops.bit_length()  # single bit -> its element
        chain = _descend_chain(lower, r, s, rmask)
        if chain is None:
            return NotFibered(r, "no_cover_chain", (s,))
        fibers.setdefault(s, []).append(r)
        chains[r] = chain
    base = tuple(sorted(fibers))
    return FiberedWitness(base, {s: tuple(sorted(v)) for s, v in fibers.items()}, chains)


def _descend_chain(lower, r, s, rmask):
    """One descending cover chain r -> s through the removed set, if any."""
    stack = [(r, (r,))]
    seen = {r}
    while stack:
        node, path = stack.pop()
        for nxt in lower[node]:
            if nxt == s:
                return path + (s,)
            if (rmask >> (nxt - 1)) & 1 and nxt not in seen:
                seen.add(nxt)
                stack.append((nxt, path + (nxt,)))
    return None


def reduced_poset(p: Poset, remove) -> tuple[Poset, tuple[int, ...]]:
    """Delete elements and keep the induced order.

    Returns the reduced poset together with the kept original labels in
    increasing order (new element k corresponds to kept[k-1]).
    """
    rmask = as_mask(remove)
    if rmask & ~p.full_mask:
        raise IndexOutOfRange("removal set contains elements outside the poset")
    if rmask == p.full_mask:
        raise EmptyResult("cannot delete every element")
    kept = [e for e in range(1, p.n + 1) if not rmask >> (e - 1) & 1]
    up = []
    for e in kept:
        m = 0
        for pos, f in enumerate(kept):
            if p.leq(e, f):
                m |= 1 << pos
        up.append(m)
    return Poset(tuple(up)), tuple(kept)


# -- whole-corpus enumeration (used by the verification suites) ---------


def all_posets(n: int, up_to_iso: bool = False):
    """Every partial order on 1..n, optionally one per isomorphism class.

    Deterministic order. Sizes beyond n=6 are rejected: the point of
    this helper is exhaustive desk-scale corpora.
    """
    if n < 1 or n > 6:
        raise SizeLimit("poset corpus enumeration is limited to 1 <= n <= 6")
    pairs = list(itertools.combinations(range(n), 2))
    seen_keys = set()
    for choice in itertools.product((0, 1, 2), repeat=len(pairs)):
        up = [1 << i for i in range(n)]
        for (i, j), c in zip(pairs, choice):
            if c == 1:  # i strictly below j
                up[i] |= 1 << j
            elif c == 2:
                up[j] |= 1 << i
        if not _transitive(up, n):
            continue
        p = Poset(tuple(up))
        if up_to_iso:
            key = canonical_key(p)
            if key in seen_keys:
                continue
            seen_keys.add(key)
        yield p


def _transitive(up, n) -> bool:
    for i in range(n):
        m = up[i] & ~(1 << i)
        while m:
            j = (m & -m).bit_length() - 1
            m &= m - 1
            if up[j] & ~up[i]:
                return False
    return True


def canonical_key(p: Poset) -> tuple[int, ...]:
    """Smallest relabeling of the relation; equal keys mean isomorphic."""
    if p.n > 7:
        raise SizeLimit("canonical form uses all n! relabelings; n <= 7 only")
    best = None
    rng = range(p.n)
    for perm in itertools.permutations(rng):
        rows = []
        for i in rng:
            m = 0
            src = p._up[perm[i]]
            for j in rng:
                if src >> perm[j] & 1:
                    m |= 1 << j
            rows.append(m)
        key = tuple(rows)
        if best is None or key < best:
            best = key
    return best
