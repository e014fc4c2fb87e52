"""Generalized wreath product actions, orbits, and lumping search.

A group element is a per-poset-element table sending each tuple of
ancestor letters to a permutation of that element's alphabet; all
lookups read the original point, so the action is simultaneous. Tables
are stored sparsely: a missing table or cell means the identity, which
is also how the JSON format spells generators.
"""

from __future__ import annotations

import itertools
from math import factorial, prod

from .errors import (
    AmbientTooLarge,
    FormatError,
    IndexOutOfRange,
    NotInvariant,
    NotLumpable,
    ProjectionClash,
    ReconstructionMismatch,
    TableIncomplete,
)
from .lumping import LumpedChain, Partition, is_lumping, lump
from .poset import Poset, chain_poset, elements_of
from .products import tree_insect_operator
from .stochastic import MarkovOperator, ProductIndex


def identity_perm(q: int) -> tuple[int, ...]:
    return tuple(range(q))


def is_permutation(t) -> bool:
    return sorted(t) == list(range(len(t)))


def perm_inverse(p):
    out = [0] * len(p)
    for i, v in enumerate(p):
        out[v] = i
    return tuple(out)


def cycle_perm(letters, q: int) -> tuple[int, ...]:
    """Cycle the given letters in ascending order, fix everything else."""
    perm = list(range(q))
    letters = sorted(letters)
    for a, b in zip(letters, letters[1:] + letters[:1]):
        perm[a] = b
    return tuple(perm)


class WreathGenerator:
    """One group element, given by sparse per-element permutation tables.

    tables[i] maps tuples of letters over the ancestors of i (ancestors
    in increasing element order) to permutations of 0..q_i-1. Missing
    tables and missing cells act as the identity.
    """

    __slots__ = ("poset", "sizes", "tables")

    def __init__(self, poset: Poset, sizes, tables):
        self.poset = poset
        self.sizes = tuple(int(q) for q in sizes)
        if len(self.sizes) != poset.n:
            raise FormatError(f"need {poset.n} coordinate sizes")
        clean = {}
        for i, table in tables.items():
            i = int(i)
            if not 1 <= i <= poset.n:
                raise IndexOutOfRange(f"element {i} not in 1..{poset.n}")
            anc = elements_of(poset.ancestral(i))
            entries = {}
            for key, perm in table.items():
                key = tuple(int(v) for v in key)
                if len(key) != len(anc):
                    raise TableIncomplete(i, key)
                for v, a in zip(key, anc):
                    if not 0 <= v < self.sizes[a - 1]:
                        raise TableIncomplete(i, key)
                perm = tuple(int(v) for v in perm)
                if len(perm) != self.sizes[i - 1] or not is_permutation(perm):
                    raise FormatError(f"bad permutation {perm} for element {i}")
                entries[key] = perm
            if entries:
                clean[i] = entries
        self.tables = clean

    def act(self, x) -> tuple[int, ...]:
        """Apply the element; every table lookup uses the original point."""
        x = tuple(x)
        if len(x) != self.poset.n:
            raise IndexOutOfRange(f"point must have {self.poset.n} coordinates")
        out = list(x)
        for i, table in self.tables.items():
            anc = elements_of(self.poset.ancestral(i))
            perm = table.get(tuple(x[a - 1] for a in anc))
            if perm is not None:
                out[i - 1] = perm[x[i - 1]]
        return tuple(out)

    def state_permutation(self, index: ProductIndex) -> tuple[int, ...]:
        return tuple(index.encode(self.act(coords)) for coords in index.states())

    def to_json(self) -> list:
        out = []
        for i, table in sorted(self.tables.items()):
            enc = {}
            for key, perm in sorted(table.items()):
                enc["(" + ",".join(str(v) for v in key) + ")"] = list(perm)
            out.append({"element": i, "table": enc})
        return out

    @staticmethod
    def from_json(obj, poset: Poset, sizes) -> "WreathGenerator":
        tables = {}
        try:
            for entry in obj:
                i = int(entry["element"])
                table = {}
                for cell, perm in entry["table"].items():
                    key = tuple(int(t) for t in cell.strip("()").split(",") if t.strip() != "")
                    table[key] = tuple(int(v) for v in perm)
                tables[i] = table
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise FormatError(f"bad generator JSON: {exc}") from exc
        return WreathGenerator(poset, sizes, tables)


class OrbitPartition(Partition):
    """A partition together with the generators that produced it."""

    __slots__ = ("generators",)

    def __init__(self, dim, parts, generators):
        super().__init__(dim, parts)
        self.generators = tuple(generators)


def orbits(gens, index: ProductIndex) -> OrbitPartition:
    """Orbit partition of the group generated by the given elements.

    Breadth-first closure treating generator edges as undirected, which
    folds the inverses in for free.
    """
    dim = index.size
    perms = [g.state_permutation(index) for g in gens]
    seen = [False] * dim
    parts = []
    for start in range(dim):
        if seen[start]:
            continue
        queue = [start]
        seen[start] = True
        orbit = []
        while queue:
            x = queue.pop()
            orbit.append(x)
            for perm in perms:
                for y in (perm[x], perm.index(x)):
                    if not seen[y]:
                        seen[y] = True
                        queue.append(y)
        parts.append(orbit)
    return OrbitPartition(dim, parts, gens)


def _invariance_witness(P: MarkovOperator, gens):
    index = P.index
    if index is None:
        raise FormatError("operator carries no product index")
    for gi, g in enumerate(gens):
        perm = g.state_permutation(index)
        for x in range(P.dim):
            px = perm[x]
            for y in range(P.dim):
                if P.rows[px][perm[y]] != P.rows[x][y]:
                    return gi, x, y
    return None


def check_invariance(P: MarkovOperator, gens) -> bool:
    """Exact p(gx, gy) == p(x, y) for every generator and state pair."""
    return _invariance_witness(P, gens) is None


def orbit_lump(P: MarkovOperator, gens) -> LumpedChain:
    """Lump by the orbit partition; invariance makes this always legal."""
    witness = _invariance_witness(P, gens)
    if witness is not None:
        raise NotInvariant(*witness)
    return lump(P, orbits(gens, P.index))


# -- canned generating sets ----------------------------------------------


def _sym_generators(q: int):
    if q < 2:
        return []
    swap = tuple([1, 0] + list(range(2, q)))
    if q == 2:
        return [swap]
    cycle = tuple(list(range(1, q)) + [0])
    return [swap, cycle]


def _sym_point_stabilizer_generators(q: int):
    # permutations fixing the letter 0
    if q < 3:
        return []
    swap = tuple([0, 2, 1] + list(range(3, q)))
    if q == 3:
        return [swap]
    cycle = tuple([0] + list(range(2, q)) + [1])
    return [swap, cycle]


def full_wreath_generators(poset: Poset, sizes) -> list[WreathGenerator]:
    """Single-cell generators of the whole generalized wreath product."""
    sizes = tuple(sizes)
    gens = []
    for i in range(1, poset.n + 1):
        anc = elements_of(poset.ancestral(i))
        cells = itertools.product(*(range(sizes[a - 1]) for a in anc))
        for cell in cells:
            for perm in _sym_generators(sizes[i - 1]):
                gens.append(WreathGenerator(poset, sizes, {i: {cell: perm}}))
    return gens


def stabilizer_generators(poset: Poset, sizes, basepoint=None) -> list[WreathGenerator]:
    """Single-cell generators of the stabilizer of a point.

    Only the table cell seen by the basepoint is constrained: there the
    permutation must fix the basepoint letter; every other cell is
    free.
    """
    sizes = tuple(sizes)
    if basepoint is None:
        basepoint = (0,) * poset.n
    basepoint = tuple(basepoint)
    gens = []
    for i in range(1, poset.n + 1):
        anc = elements_of(poset.ancestral(i))
        home = tuple(basepoint[a - 1] for a in anc)
        cells = itertools.product(*(range(sizes[a - 1]) for a in anc))
        for cell in cells:
            if cell == home:
                perms = _sym_point_stabilizer_generators(sizes[i - 1])
                if basepoint[i - 1] != 0:
                    raise FormatError("stabilizer generators assume a zero basepoint")
            else:
                perms = _sym_generators(sizes[i - 1])
            for perm in perms:
                gens.append(WreathGenerator(poset, sizes, {i: {cell: perm}}))
    return gens


def random_wreath_generators(poset: Poset, sizes, rng, count: int) -> list[WreathGenerator]:
    """Random sparse generators, for test corpora."""
    sizes = tuple(sizes)
    gens = []
    for _ in range(count):
        tables = {}
        touched = rng.sample(range(1, poset.n + 1), k=rng.randint(1, poset.n))
        for i in touched:
            anc = elements_of(poset.ancestral(i))
            table = {}
            for cell in itertools.product(*(range(sizes[a - 1]) for a in anc)):
                perm = list(range(sizes[i - 1]))
                rng.shuffle(perm)
                table[cell] = tuple(perm)
            tables[i] = table
        gens.append(WreathGenerator(poset, sizes, tables))
    return gens


# -- sphere profiles on the rooted tree -----------------------------------


def tree_distance(x, y) -> int:
    """n minus the longest common prefix; the boundary ultrametric."""
    n = len(x)
    for k, (a, b) in enumerate(zip(x, y)):
        if a != b:
            return n - k
    return 0


def sphere_partition(q: int, n: int, center=None) -> Partition:
    index = ProductIndex((q,) * n)
    if center is None:
        center = (0,) * n
    groups: dict[int, list[int]] = {}
    for state, coords in enumerate(index.states()):
        groups.setdefault(tree_distance(center, coords), []).append(state)
    return Partition(index.size, [groups[d] for d in sorted(groups)])


def sphere_profile(q: int, n: int, x0, L: Partition):
    """Counts of each part inside each sphere around x0.

    Row i, column s holds how many states of part s sit at distance i
    from x0.
    """
    index = ProductIndex((q,) * n)
    x0 = tuple(x0)
    table = [[0] * L.k for _ in range(n + 1)]
    for state, coords in enumerate(index.states()):
        table[tree_distance(x0, coords)][L.lookup[state]] += 1
    return table


def profile_invariance_check(L: Partition, q: int, n: int):
    """Whether all members of each part see identical sphere profiles.

    The input must lump the tree insect chain; for such partitions the
    profiles provably agree, so a violating pair would expose an
    implementation bug, not a counterexample.
    """
    P = tree_insect_operator(q, n)
    ok, wit = is_lumping(P, L)
    if not ok:
        raise NotLumpable(wit)
    index = P.index
    states = list(index.states())
    for part in L.parts:
        base = sphere_profile(q, n, states[part[0]], L)
        for x in part[1:]:
            if sphere_profile(q, n, states[x], L) != base:
                return False, (part[0], x)
    return True, None


def project_partition(L: Partition, q: int, n: int) -> Partition:
    """Drop the last letter and merge parts with equal projections.

    Distinct parts whose projections overlap without agreeing raise
    ProjectionClash: the input was not a lumping. The projected
    partition is verified against the shallower insect chain.
    """
    if n < 2:
        raise FormatError("projection needs depth at least 2")
    m = q ** (n - 1)
    assigned: dict[int, frozenset] = {}
    parts = []
    for part in L.parts:
        proj = frozenset(s // q for s in part)
        fresh = True
        for z in proj:
            old = assigned.get(z)
            if old is not None:
                if old != proj:
                    raise ProjectionClash(tuple(sorted(old)), tuple(sorted(proj)))
                fresh = False
        if fresh:
            parts.append(sorted(proj))
            for z in proj:
                assigned[z] = proj
    result = Partition(m, parts)
    ok, wit = is_lumping(tree_insect_operator(q, n - 1), result)
    if not ok:
        raise NotLumpable(wit, "projection does not lump the shallower chain")
    return result


# -- group reconstruction on the rooted tree ------------------------------


def reconstruct_group(L: Partition, q: int, n: int) -> list[WreathGenerator]:
    """Generators of a tree automorphism group whose orbits realize L.

    L must lump the tree insect chain. Depth one takes a cycle per
    part. Deeper trees recurse on the projected partition, extend each
    recovered generator to the new level by matching, within every
    moved subtree, the k-th smallest letter of each part trace to the
    k-th smallest letter of the image trace, and add a cycle on every
    nontrivial trace. The orbit partition of the output is verified
    exactly.
    """
    P = tree_insect_operator(q, n)
    ok, wit = is_lumping(P, L)
    if not ok:
        raise NotLumpable(wit)
    gens = _reconstruct(L, q, n)
    got = orbits(gens, ProductIndex((q,) * n))
    if got != L:
        raise ReconstructionMismatch(
            f"reconstructed orbits {got.parts} differ from target {L.parts}"
        )
    return gens


def _reconstruct(L: Partition, q: int, n: int) -> list[WreathGenerator]:
    chain = chain_poset(n)
    sizes = (q,) * n
    if n == 1:
        return [
            WreathGenerator(chain, sizes, {1: {(): cycle_perm(part, q)}})
            for part in L.parts
            if len(part) >= 2
        ]
    projected = project_partition(L, q, n)
    sub = _reconstruct(projected, q, n - 1)
    m = q ** (n - 1)
    traces: list[dict[int, list[int]]] = [{} for _ in range(m)]
    for z in range(m):
        for x in range(q):
            traces[z].setdefault(L.lookup[z * q + x], []).append(x)
    subindex = ProductIndex((q,) * (n - 1))
    prefixes = list(subindex.states())
    gens = []
    for h in sub:
        perm = h.state_permutation(subindex)
        last_table = {}
        for z in range(m):
            z2 = perm[z]
            if z2 == z:
                continue
            sigma: list[int | None] = [None] * q
            for j, letters in traces[z].items():
                letters2 = traces[z2].get(j)
                if letters2 is None or len(letters2) != len(letters):
                    raise ReconstructionMismatch(
                        f"trace sizes for part {j} differ between prefixes {z} and {z2}"
                    )
                for a, b in zip(letters, letters2):
                    sigma[a] = b
            if None in sigma or not is_permutation(sigma):
                raise ReconstructionMismatch(f"trace matching at prefix {z} is not a bijection")
            last_table[prefixes[z]] = tuple(sigma)
        tables = {i: dict(t) for i, t in h.tables.items()}
        if last_table:
            tables[n] = last_table
        gens.append(WreathGenerator(chain, sizes, tables))
    for z in range(m):
        for j in sorted(traces[z]):
            letters = traces[z][j]
            if len(letters) >= 2:
                gens.append(
                    WreathGenerator(chain, sizes, {n: {prefixes[z]: cycle_perm(letters, q)}})
                )
    return gens


# -- ambient group enumeration and the induced test ------------------------


def group_order(poset: Poset, sizes) -> int:
    """Order of the full generalized wreath product of symmetric groups."""
    sizes = tuple(sizes)
    total = 1
    for i in range(1, poset.n + 1):
        anc = elements_of(poset.ancestral(i))
        cells = prod(sizes[a - 1] for a in anc) if anc else 1
        total *= factorial(sizes[i - 1]) ** cells
    return total


def enumerate_group_elements(poset: Poset, sizes, cap: int = 10**6):
    """Yield every element of the full wreath product as a state permutation."""
    sizes = tuple(sizes)
    order = group_order(poset, sizes)
    if order > cap:
        raise AmbientTooLarge(order, cap)
    index = ProductIndex(sizes)
    states = list(index.states())
    anc_positions = []
    cell_lists = []
    perm_lists = []
    for i in range(1, poset.n + 1):
        anc = elements_of(poset.ancestral(i))
        anc_positions.append(tuple(a - 1 for a in anc))
        cell_lists.append(list(itertools.product(*(range(sizes[a - 1]) for a in anc))))
        perm_lists.append(list(itertools.permutations(range(sizes[i - 1]))))
    table_choices = []
    for cells, perms in zip(cell_lists, perm_lists):
        table_choices.append(
            [dict(zip(cells, combo)) for combo in itertools.product(perms, repeat=len(cells))]
        )
    for combo in itertools.product(*table_choices):
        perm = []
        for coords in states:
            out = list(coords)
            for pos in range(poset.n):
                cell = tuple(coords[a] for a in anc_positions[pos])
                out[pos] = combo[pos][cell][coords[pos]]
            perm.append(index.encode(tuple(out)))
        yield tuple(perm)


def setwise_stabilizer_orbits(L: Partition, poset: Poset, sizes, cap: int = 10**6) -> Partition:
    """Orbit partition of the subgroup preserving every part setwise."""
    stab = [
        perm
        for perm in enumerate_group_elements(poset, sizes, cap)
        if all(L.lookup[perm[x]] == L.lookup[x] for x in range(L.dim))
    ]
    parts = []
    seen = [False] * L.dim
    for x in range(L.dim):
        if seen[x]:
            continue
        orbit = sorted({perm[x] for perm in stab})
        for y in orbit:
            seen[y] = True
        parts.append(orbit)
    return Partition(L.dim, parts)


def is_group_induced(
    P: MarkovOperator, L: Partition, poset: Poset, sizes, cap: int = 10**6
) -> bool:
    """Whether some subgroup of the wreath product has orbit partition L.

    Any such subgroup sits inside the setwise stabilizer of L, whose
    orbits refine L while containing the orbits of the subgroup; so L
    is group induced exactly when the stabilizer's orbits equal L.
    """
    ok, wit = is_lumping(P, L)
    if not ok:
        raise NotLumpable(wit)
    return setwise_stabilizer_orbits(L, poset, sizes, cap) == L


# -- exhaustive lumping search ---------------------------------------------


def enumerate_lumpings(P: MarkovOperator, cap: int = 12) -> list[Partition]:
    """Every partition that lumps the chain, found by block backtracking.

    Blocks are chosen smallest-free-state first, so each block is
    complete the moment it is placed; constancy of finished rows onto
    finished blocks is checked as soon as it is decidable, pruning the
    subtree. The full constraint set has been checked exactly once
    when a partition completes.
    """
    d = P.dim
    if d > cap:
        raise AmbientTooLarge(d, cap)
    rows = P.rows
    results: list[Partition] = []

    def block_sum(x, block):
        row = rows[x]
        return sum(row[y] for y in block)

    def recurse(remaining, blocks):
        if not remaining:
            results.append(Partition(d, [list(b) for b in blocks]))
            return
        head = remaining[0]
        rest = remaining[1:]
        for r in range(len(rest) + 1):
            for extra in itertools.combinations(rest, r):
                block = (head,) + extra
                ok = True
                targets = [block_sum(head, b) for b in blocks]
                targets.append(block_sum(head, block))
                for x in extra:
                    for b, t in zip(blocks, targets):
                        if block_sum(x, b) != t:
                            ok = False
                            break
                    if ok and block_sum(x, block) != targets[-1]:
                        ok = False
                    if not ok:
                        break
                if ok:
                    for b in blocks:
                        t0 = block_sum(b[0], block)
                        if any(block_sum(x, block) != t0 for x in b[1:]):
                            ok = False
                            break
                if ok:
                    chosen = set(extra)
                    recurse(tuple(s for s in rest if s not in chosen), blocks + [block])

    recurse(tuple(range(d)), [])
    return results
