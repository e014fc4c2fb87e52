import random
from fractions import Fraction as F

import pytest

from posetlump.lumping import Partition
from posetlump.poset import antichain_poset, chain_poset, poset_from_covers
from posetlump.stochastic import MarkovOperator


@pytest.fixture
def fork3():
    """Two maximal elements 1, 2 above a common bottom 3."""
    return poset_from_covers(3, [(1, 3), (2, 3)])


@pytest.fixture
def fence4():
    """The N-shaped poset: 1 above 3 and 4, 2 above 4."""
    return poset_from_covers(4, [(1, 3), (1, 4), (2, 4)])


@pytest.fixture
def fibered6():
    """1 above 2, 3, 4; 5 below 2 and 3; 6 below 4."""
    return poset_from_covers(6, [(1, 2), (1, 3), (1, 4), (2, 5), (3, 5), (4, 6)])


@pytest.fixture
def chain3():
    return chain_poset(3)


@pytest.fixture
def anti2():
    return antichain_poset(2)


@pytest.fixture
def block4():
    """4-state chain with two communicating 2-blocks, entries over /12."""
    a, b = F(5, 12), F(1, 12)
    return MarkovOperator([[a, a, b, b], [a, a, b, b], [b, b, a, a], [b, b, a, a]])


@pytest.fixture
def block4_lumping():
    return Partition(4, [[0, 2], [1, 3]])


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)


def random_stochastic(rng, dim, den=12):
    """Random exact stochastic matrix with denominator-bounded entries."""
    rows = []
    for _ in range(dim):
        cuts = [rng.randint(0, den) for _ in range(dim - 1)]
        cuts = sorted(cuts) + [den]
        prev = 0
        row = []
        for c in cuts:
            row.append(F(c - prev, den))
            prev = c
        rows.append(row)
    return MarkovOperator(rows)


def random_symmetric_stochastic(rng, dim, den=24):
    """Random symmetric (hence doubly stochastic, uniform-reversible) matrix."""
    while True:
        m = [[0] * dim for _ in range(dim)]
        for i in range(dim):
            for j in range(i + 1, dim):
                m[i][j] = m[j][i] = rng.randint(0, den // dim)
        ok = True
        for i in range(dim):
            off = sum(m[i]) - m[i][i]
            if off > den:
                ok = False
                break
            m[i][i] = den - off
        if ok:
            return MarkovOperator([[F(v, den) for v in row] for row in m])
