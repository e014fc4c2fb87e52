from fractions import Fraction as F

import pytest

from conftest import random_stochastic
from posetlump.errors import (
    AmbientTooLarge,
    NotInvariant,
    NotLumpable,
    ProjectionClash,
)
from posetlump.lumping import Partition, is_lumping, lump
from posetlump.poset import all_posets, antichain_poset, chain_poset
from posetlump.products import insect_operator, tree_insect_operator
from posetlump.stochastic import (
    MarkovOperator,
    ProductIndex,
    convex_combination,
    identity,
    kron,
    uniform,
)
from posetlump.wreath import (
    WreathGenerator,
    check_invariance,
    enumerate_lumpings,
    full_wreath_generators,
    group_order,
    is_group_induced,
    orbit_lump,
    orbits,
    profile_invariance_check,
    project_partition,
    random_wreath_generators,
    reconstruct_group,
    setwise_stabilizer_orbits,
    sphere_partition,
    sphere_profile,
    stabilizer_generators,
)


class TestAction:
    def test_antichain_acts_coordinatewise(self):
        p = antichain_poset(3)
        g = WreathGenerator(p, (2, 2, 2), {2: {(): (1, 0)}})
        assert g.act((0, 0, 0)) == (0, 1, 0)
        assert g.act((1, 1, 1)) == (1, 0, 1)

    def test_chain_action_depends_on_prefix(self):
        p = chain_poset(3)
        g = WreathGenerator(p, (2, 2, 2), {3: {(0, 1): (1, 0)}})
        assert g.act((0, 1, 0)) == (0, 1, 1)
        assert g.act((0, 0, 0)) == (0, 0, 0)
        assert g.act((1, 1, 0)) == (1, 1, 0)

    def test_lookups_use_original_point(self):
        # both tables read the untouched input even though both move it
        p = chain_poset(2)
        g = WreathGenerator(p, (2, 2), {1: {(): (1, 0)}, 2: {(0,): (1, 0)}})
        assert g.act((0, 0)) == (1, 1)
        assert g.act((1, 0)) == (0, 0)

    def test_identity_tables(self):
        p = chain_poset(2)
        g = WreathGenerator(p, (2, 2), {})
        assert all(g.act(x) == x for x in [(0, 0), (0, 1), (1, 0), (1, 1)])

    def test_json_round_trip(self):
        p = chain_poset(3)
        g = WreathGenerator(p, (2, 2, 2), {3: {(0, 1): (1, 0)}, 1: {(): (1, 0)}})
        again = WreathGenerator.from_json(g.to_json(), p, (2, 2, 2))
        assert again.tables == g.tables


class TestOrbits:
    def test_no_generators(self):
        part = orbits([], ProductIndex((2, 2)))
        assert part == Partition.identity(4)

    def test_single_swap(self):
        p = chain_poset(1)
        g = WreathGenerator(p, (2,), {1: {(): (1, 0)}})
        assert orbits([g], ProductIndex((2,))) == Partition.universal(2)

    def test_stabilizer_orbits_are_spheres(self):
        for q, n in [(2, 3), (3, 2), (2, 2)]:
            gens = stabilizer_generators(chain_poset(n), (q,) * n)
            got = orbits(gens, ProductIndex((q,) * n))
            assert got == sphere_partition(q, n)

    def test_full_group_transitive_on_chain(self):
        gens = full_wreath_generators(chain_poset(3), (2, 2, 2))
        assert orbits(gens, ProductIndex((2, 2, 2))) == Partition.universal(8)

    def test_orbit_closure_respects_composition(self, rng):
        # orbits computed from generators match orbits of all products of
        # two generators, i.e. BFS closure already saw the group
        p = chain_poset(2)
        gens = random_wreath_generators(p, (3, 3), rng, 2)
        idx = ProductIndex((3, 3))
        base = orbits(gens, idx)
        perms = [g.state_permutation(idx) for g in gens]
        for a in perms:
            for b in perms:
                comp = tuple(a[b[x]] for x in range(idx.size))
                for x in range(idx.size):
                    assert base.lookup[comp[x]] == base.lookup[x]


class TestInvariance:
    def test_insect_invariant_under_full_group(self, fork3):
        P = insect_operator(fork3, 2)
        assert check_invariance(P, full_wreath_generators(fork3, (2, 2, 2)))

    def test_absorbing_state_breaks_invariance(self):
        P = MarkovOperator(
            [[F(1), F(0)], [F(1, 2), F(1, 2)]], ProductIndex((2,))
        )
        g = WreathGenerator(chain_poset(1), (2,), {1: {(): (1, 0)}})
        assert not check_invariance(P, [g])
        with pytest.raises(NotInvariant):
            orbit_lump(P, [g])

    def test_identity_generator_always_invariant(self, rng):
        P = random_stochastic(rng, 4)
        P = MarkovOperator(P.rows, ProductIndex((2, 2)))
        g = WreathGenerator(antichain_poset(2), (2, 2), {})
        assert check_invariance(P, [g])


class TestOrbitLump:
    def test_tree_sphere_lumping(self):
        T = tree_insect_operator(2, 3)
        gens = stabilizer_generators(chain_poset(3), (2, 2, 2))
        lumped = orbit_lump(T, gens)
        expected = [
            (67, 67, 22, 12),
            (67, 67, 22, 12),
            (11, 11, 134, 12),
            (3, 3, 6, 156),
        ]
        assert lumped.operator.rows == tuple(tuple(F(v, 168) for v in r) for r in expected)

    def test_full_group_gives_point(self):
        T = tree_insect_operator(2, 3)
        lumped = orbit_lump(T, full_wreath_generators(chain_poset(3), (2, 2, 2)))
        assert lumped.operator.rows == ((F(1),),)

    def test_trivial_group_gives_back_chain(self):
        T = tree_insect_operator(2, 2)
        lumped = orbit_lump(T, [])
        assert lumped.operator == T


class TestSphereProfile:
    def test_center_row(self):
        L = sphere_partition(2, 3)
        table = sphere_profile(2, 3, (0, 0, 0), L)
        assert table[0] == [1, 0, 0, 0]

    def test_row_sums_are_part_sizes(self):
        L = sphere_partition(2, 3)
        table = sphere_profile(2, 3, (0, 1, 0), L)
        for s, part in enumerate(L.parts):
            assert sum(table[i][s] for i in range(4)) == len(part)

    def test_sphere_partition_diagonal(self):
        L = sphere_partition(2, 3)
        table = sphere_profile(2, 3, (0, 0, 0), L)
        for i in range(4):
            for s in range(4):
                assert (table[i][s] > 0) == (i == s)

    def test_profile_invariance_on_sphere_partition(self):
        ok, pair = profile_invariance_check(sphere_partition(2, 3), 2, 3)
        assert ok and pair is None

    def test_profile_invariance_on_identity(self):
        ok, _ = profile_invariance_check(Partition.identity(8), 2, 3)
        assert ok

    def test_profile_invariance_on_random_orbit_lumpings(self, rng):
        for _ in range(20):
            q = rng.choice([2, 3])
            n = rng.choice([2, 3])
            gens = random_wreath_generators(chain_poset(n), (q,) * n, rng, rng.randint(1, 2))
            L = orbits(gens, ProductIndex((q,) * n))
            ok, _ = profile_invariance_check(L, q, n)
            assert ok

    def test_rejects_non_lumping(self):
        with pytest.raises(NotLumpable):
            profile_invariance_check(Partition(8, [[0, 7], [1, 2, 3, 4, 5, 6]]), 2, 3)


class TestProjection:
    def test_spheres_project_to_spheres(self):
        got = project_partition(sphere_partition(2, 3), 2, 3)
        assert got == sphere_partition(2, 2)

    def test_identity_projects_to_identity(self):
        got = project_partition(Partition.identity(8), 2, 3)
        assert got == Partition.identity(4)

    def test_partial_overlap_clashes(self):
        # a non-lumping whose projections overlap without agreeing
        bad = Partition(8, [[0, 2], [1], [3], [4, 5, 6, 7]])
        with pytest.raises(ProjectionClash):
            project_partition(bad, 2, 3)

    def test_orbit_partitions_project_to_orbit_partitions(self, rng):
        for _ in range(15):
            q, n = rng.choice([(2, 3), (3, 2), (3, 3)])
            gens = random_wreath_generators(chain_poset(n), (q,) * n, rng, rng.randint(1, 2))
            L = orbits(gens, ProductIndex((q,) * n))
            got = project_partition(L, q, n)
            # the projected parts are orbits of the same generators on prefixes
            truncated = [
                WreathGenerator(
                    chain_poset(n - 1),
                    (q,) * (n - 1),
                    {i: t for i, t in g.tables.items() if i < n},
                )
                for g in gens
            ]
            assert got == orbits(truncated, ProductIndex((q,) * (n - 1)))


class TestReconstruction:
    def test_sphere_partition_round_trip(self):
        S = sphere_partition(2, 3)
        gens = reconstruct_group(S, 2, 3)
        assert orbits(gens, ProductIndex((2, 2, 2))) == S

    def test_identity_partition_gives_no_generators(self):
        assert reconstruct_group(Partition.identity(8), 2, 3) == []

    def test_depth_one_cycles(self):
        L = Partition(3, [[0, 2], [1]])
        gens = reconstruct_group(L, 3, 1)
        assert len(gens) == 1
        assert orbits(gens, ProductIndex((3,))) == L

    def test_round_trip_random_orbit_partitions(self, rng):
        for _ in range(40):
            q = rng.choice([2, 3])
            n = rng.choice([2, 3])
            gens = random_wreath_generators(chain_poset(n), (q,) * n, rng, rng.randint(1, 3))
            L = orbits(gens, ProductIndex((q,) * n))
            rebuilt = reconstruct_group(L, q, n)
            assert orbits(rebuilt, ProductIndex((q,) * n)) == L

    def test_rejects_non_lumpings(self):
        with pytest.raises(NotLumpable):
            reconstruct_group(Partition(8, [[0, 7], [1, 2, 3, 4, 5, 6]]), 2, 3)


class TestGroupInduced:
    def test_sphere_partition_is_induced(self):
        T = tree_insect_operator(2, 3)
        assert is_group_induced(T, sphere_partition(2, 3), chain_poset(3), (2, 2, 2))

    def test_universal_is_induced_by_transitivity(self):
        T = tree_insect_operator(2, 3)
        assert is_group_induced(T, Partition.universal(8), chain_poset(3), (2, 2, 2))

    def test_sorted_pair_partition_is_not_induced(self):
        # on the antichain square the unordered-pair identification lumps
        # the chain but no coordinate-wise subgroup has those orbits
        P = convex_combination(
            [F(1, 2), F(1, 2)],
            [kron(uniform(3), identity(3)), kron(identity(3), uniform(3))],
        )
        idx = ProductIndex((3, 3))
        parts = {}
        for s in range(9):
            a, b = idx.decode(s)
            parts.setdefault(tuple(sorted((a, b))), []).append(s)
        L = Partition(9, list(parts.values()))
        assert is_lumping(P, L)[0]
        assert not is_group_induced(P, L, antichain_poset(2), (3, 3))

    def test_group_order(self):
        assert group_order(chain_poset(3), (2, 2, 2)) == 2 * 4 * 16
        assert group_order(antichain_poset(2), (3, 3)) == 36

    def test_ambient_cap(self):
        T = tree_insect_operator(2, 3)
        with pytest.raises(AmbientTooLarge):
            is_group_induced(T, sphere_partition(2, 3), chain_poset(3), (2, 2, 2), cap=10)


class TestEnumerateLumpings:
    def test_uniform_chain_every_partition(self):
        # rows are identical so every partition lumps: Bell numbers
        assert len(enumerate_lumpings(uniform(3))) == 5
        assert len(enumerate_lumpings(uniform(4))) == 15

    def test_identity_chain_every_partition(self):
        assert len(enumerate_lumpings(identity(4))) == 15

    def test_block4_contains_both_pairings(self, block4):
        found = set(enumerate_lumpings(block4))
        assert Partition(4, [[0, 1], [2, 3]]) in found
        assert Partition(4, [[0, 2], [1, 3]]) in found

    def test_matches_naive_filter(self, rng):
        from test_lumping import all_partitions

        for P in (random_stochastic(rng, 5), tree_insect_operator(2, 2)):
            naive = {L for L in all_partitions(P.dim) if is_lumping(P, L)[0]}
            assert set(enumerate_lumpings(P)) == naive

    def test_every_enumerated_lumping_verifies(self):
        T = tree_insect_operator(2, 3)
        found = enumerate_lumpings(T)
        assert len(found) == 76
        for L in found:
            assert is_lumping(T, L)[0]


class TestOrbitPartitionsLumpInsectChains:
    def test_all_poset_shapes_small(self, rng):
        # invariance makes every orbit partition a lumping, any poset shape
        from posetlump.poset import all_posets

        for n in (2, 3):
            for p in all_posets(n, up_to_iso=True):
                for q in (2, 3):
                    P = insect_operator(p, q)
                    for _ in range(3):
                        gens = random_wreath_generators(p, (q,) * n, rng, rng.randint(1, 2))
                        L = orbits(gens, P.index)
                        ok, wit = is_lumping(P, L)
                        assert ok, (p.covers, q, wit)


class TestStabilizerOrbitsHelper:
    def test_block_partition_stabilizer(self):
        # diagonal-preserving subgroup of Sym(3) x Sym(3) is the diagonal copy
        P = convex_combination(
            [F(1, 2), F(1, 2)],
            [kron(uniform(3), identity(3)), kron(identity(3), uniform(3))],
        )
        idx = ProductIndex((3, 3))
        diag = [idx.encode((a, a)) for a in range(3)]
        rest = [s for s in range(9) if s not in diag]
        L = Partition(9, [diag, rest])
        got = setwise_stabilizer_orbits(L, antichain_poset(2), (3, 3))
        assert got == L  # so this lumping IS group induced
