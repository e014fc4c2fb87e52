"""Exact stochastic matrices over the rationals.

Operators are dense tuples of fractions.Fraction entries; construction
validates nonnegativity and exact row sums. Floating point never
enters this module, so lumpability checks downstream are free of
tolerance questions. Values are immutable and freely shareable.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import prod

from .errors import (
    DimMismatch,
    DimOverflow,
    FormatError,
    IndexOutOfRange,
    NotStochastic,
    WeightSumMismatch,
)

DEFAULT_DIM_CAP = 1 << 24

ONE = Fraction(1)
ZERO = Fraction(0)


def parse_rational(text) -> Fraction:
    """Parse "num/den" (or a plain integer string) into a Fraction."""
    try:
        return Fraction(text) if isinstance(text, str) else Fraction(text)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise FormatError(f"bad rational {text!r}") from exc


def format_rational(x: Fraction) -> str:
    return str(Fraction(x))


@dataclass(frozen=True)
class ProductIndex:
    """Mixed-radix codec between coordinate tuples and flat state ids.

    Coordinate 1 is most significant: states enumerate in lexicographic
    order of their tuples.
    """

    radices: tuple[int, ...]

    def __post_init__(self):
        if not self.radices or any(q < 1 for q in self.radices):
            raise FormatError(f"bad radices {self.radices}")
        object.__setattr__(self, "radices", tuple(int(q) for q in self.radices))

    @property
    def size(self) -> int:
        return prod(self.radices)

    def encode(self, coords) -> int:
        coords = tuple(coords)
        if len(coords) != len(self.radices):
            raise IndexOutOfRange(f"expected {len(self.radices)} coordinates, got {len(coords)}")
        x = 0
        for c, q in zip(coords, self.radices):
            if not 0 <= c < q:
                raise IndexOutOfRange(f"coordinate {c} not in 0..{q - 1}")
            x = x * q + c
        return x

    def decode(self, state: int) -> tuple[int, ...]:
        if not 0 <= state < self.size:
            raise IndexOutOfRange(f"state {state} not in 0..{self.size - 1}")
        out = []
        for q in reversed(self.radices):
            out.append(state % q)
            state //= q
        return tuple(reversed(out))

    def states(self):
        """All coordinate tuples in flat-state order."""
        import itertools

        return itertools.product(*(range(q) for q in self.radices))


class MarkovOperator:
    """Square row-stochastic matrix of exact rationals.

    Optionally carries the ProductIndex describing how its states
    factor. Equality is entrywise; the index is bookkeeping only.
    """

    __slots__ = ("dim", "rows", "index")

    def __init__(self, rows, index: ProductIndex | None = None):
        mat = tuple(tuple(Fraction(v) for v in row) for row in rows)
        dim = len(mat)
        if dim == 0:
            raise NotStochastic("empty matrix")
        for x, row in enumerate(mat):
            if len(row) != dim:
                raise NotStochastic(f"row {x} has length {len(row)}, expected {dim}")
            total = ZERO
            for y, v in enumerate(row):
                if v < 0:
                    raise NotStochastic(f"negative entry at ({x}, {y})")
                total += v
            if total != ONE:
                raise NotStochastic(f"row {x} sums to {total}, not 1")
        if index is not None and index.size != dim:
            raise DimMismatch(f"index size {index.size} != dim {dim}")
        self.dim = dim
        self.rows = mat
        self.index = index

    def __getitem__(self, x: int):
        return self.rows[x]

    def entry(self, x: int, y: int) -> Fraction:
        return self.rows[x][y]

    def apply(self, f):
        """Operator action on a function: (Pf)(x) = sum_y p(x,y) f(y)."""
        if len(f) != self.dim:
            raise DimMismatch(f"function length {len(f)} != dim {self.dim}")
        return tuple(sum(p * fv for p, fv in zip(row, f) if p) for row in self.rows)

    def trace(self) -> Fraction:
        return sum(self.rows[i][i] for i in range(self.dim))

    def is_symmetric(self) -> bool:
        return all(
            self.rows[x][y] == self.rows[y][x]
            for x in range(self.dim)
            for y in range(x + 1, self.dim)
        )

    def __eq__(self, other):
        return isinstance(other, MarkovOperator) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return f"MarkovOperator(dim={self.dim})"

    def to_json(self) -> dict:
        out = {"dim": self.dim, "rows": [[format_rational(v) for v in row] for row in self.rows]}
        if self.index is not None:
            out["radices"] = list(self.index.radices)
        return out

    @staticmethod
    def from_json(obj) -> "MarkovOperator":
        try:
            rows = [[parse_rational(v) for v in row] for row in obj["rows"]]
        except (KeyError, TypeError) as exc:
            raise FormatError(f"bad matrix JSON: {exc}") from exc
        index = ProductIndex(tuple(obj["radices"])) if obj.get("radices") else None
        return MarkovOperator(rows, index)


def uniform(q: int) -> MarkovOperator:
    """All entries 1/q."""
    if q < 1:
        raise FormatError("size must be positive")
    w = Fraction(1, q)
    rows = [[w] * q for _ in range(q)]
    return MarkovOperator(rows, ProductIndex((q,)) if q >= 2 else None)


def identity(q: int) -> MarkovOperator:
    if q < 1:
        raise FormatError("size must be positive")
    rows = [[ONE if i == j else ZERO for j in range(q)] for i in range(q)]
    return MarkovOperator(rows, ProductIndex((q,)) if q >= 2 else None)


def kron(*ops, cap: int = DEFAULT_DIM_CAP) -> MarkovOperator:
    """Tensor product; the first factor is most significant.

    Accepts the factors as separate arguments or one iterable. The
    result carries the concatenated ProductIndex.
    """
    if len(ops) == 1 and not isinstance(ops[0], MarkovOperator):
        ops = tuple(ops[0])
    if not ops:
        raise FormatError("kron needs at least one operator")
    dims = [op.dim for op in ops]
    total = prod(dims)
    if total > cap:
        raise DimOverflow(f"tensor dimension {total} exceeds cap {cap}")
    radices = []
    for op in ops:
        radices.extend(op.index.radices if op.index is not None else (op.dim,))
    coords = _factor_coords(dims, total)
    rows = []
    for x in range(total):
        xc = coords[x]
        row = []
        for y in range(total):
            yc = coords[y]
            v = ONE
            for op, a, b in zip(ops, xc, yc):
                e = op.rows[a][b]
                if not e:
                    v = ZERO
                    break
                v *= e
            row.append(v)
        rows.append(row)
    return MarkovOperator(rows, ProductIndex(tuple(radices)))


def _factor_coords(dims, total):
    out = []
    for x in range(total):
        c = []
        rem = x
        for q in reversed(dims):
            c.append(rem % q)
            rem //= q
        out.append(tuple(reversed(c)))
    return out


def convex_combination(weights, ops) -> MarkovOperator:
    """Exact weighted sum of conformable operators; weights must sum to 1."""
    weights = [Fraction(w) for w in weights]
    ops = list(ops)
    if len(weights) != len(ops) or not ops:
        raise DimMismatch("one weight per operator required")
    if any(w < 0 for w in weights):
        raise WeightSumMismatch("weights must be nonnegative")
    if sum(weights) != ONE:
        raise WeightSumMismatch(f"weights sum to {sum(weights)}, not 1")
    dim = ops[0].dim
    if any(op.dim != dim for op in ops):
        raise DimMismatch("operators must share a dimension")
    rows = [
        [sum(w * op.rows[x][y] for w, op in zip(weights, ops)) for y in range(dim)]
        for x in range(dim)
    ]
    index = ops[0].index
    if index is not None and any(op.index != index for op in ops):
        index = None
    return MarkovOperator(rows, index)


class Measure:
    """A probability measure on a finite state space, exact."""

    __slots__ = ("weights",)

    def __init__(self, weights, strict: bool = True):
        w = tuple(Fraction(v) for v in weights)
        if not w:
            raise FormatError("measure needs at least one state")
        if sum(w) != ONE:
            raise FormatError(f"measure sums to {sum(w)}, not 1")
        if any(v < 0 for v in w):
            raise FormatError("measure has a negative weight")
        if strict and any(v == 0 for v in w):
            raise FormatError("strict measure has a zero weight")
        self.weights = w

    def __len__(self):
        return len(self.weights)

    def __getitem__(self, i):
        return self.weights[i]

    def __iter__(self):
        return iter(self.weights)

    def __eq__(self, other):
        return isinstance(other, Measure) and self.weights == other.weights


def uniform_measure(dim: int) -> Measure:
    return Measure([Fraction(1, dim)] * dim)


def detailed_balance(P: MarkovOperator, pi: Measure) -> bool:
    """Exact check of pi(x) p(x,y) == pi(y) p(y,x) for all pairs."""
    if len(pi) != P.dim:
        raise DimMismatch(f"measure length {len(pi)} != dim {P.dim}")
    for x in range(P.dim):
        for y in range(x + 1, P.dim):
            if pi[x] * P.rows[x][y] != pi[y] * P.rows[y][x]:
                return False
    return True
