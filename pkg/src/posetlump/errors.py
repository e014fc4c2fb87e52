"""Exceptions raised across the package.

Every deliberate failure is a PosetLumpError subclass. The CLI maps
errors raised while loading inputs to exit code 2 and errors raised
during computation to exit code 1.
"""


class PosetLumpError(Exception):
    """Base class for every error this package raises deliberately."""


class FormatError(PosetLumpError):
    """Malformed external input: bad JSON shape, bad rational string, etc."""


class ReflexivityViolation(PosetLumpError):
    def __init__(self, element):
        self.element = element
        super().__init__(f"relation not reflexive at element {element}")


class AntisymmetryViolation(PosetLumpError):
    def __init__(self, i, j):
        self.pair = (i, j)
        super().__init__(f"antisymmetry fails: {i} <= {j} and {j} <= {i} with {i} != {j}")


class TransitivityViolation(PosetLumpError):
    def __init__(self, i, j, k):
        self.triple = (i, j, k)
        super().__init__(f"transitivity fails: {i} <= {j} and {j} <= {k} but not {i} <= {k}")


class RedundantCovers(PosetLumpError):
    """Cover list contains pairs already implied by transitivity."""

    def __init__(self, redundant, reduction):
        self.redundant = tuple(sorted(redundant))
        self.reduction = tuple(sorted(reduction))
        super().__init__(
            f"non-cover pairs {list(self.redundant)} in cover list; "
            f"transitive reduction is {list(self.reduction)}"
        )


class IndexOutOfRange(PosetLumpError):
    pass


class SizeLimit(PosetLumpError):
    """An enumeration would exceed its configured cap."""


class EmptyResult(PosetLumpError):
    pass


class Unreachable(PosetLumpError):
    pass


class NotStochastic(PosetLumpError):
    """Matrix rows do not sum to one exactly, or an entry is negative."""


class DimOverflow(PosetLumpError):
    pass


class DimMismatch(PosetLumpError):
    pass


class WeightSumMismatch(PosetLumpError):
    pass


class NotReversible(PosetLumpError):
    pass


class DegenerateDenominator(PosetLumpError):
    """A coefficient denominator came out nonpositive; reported, never patched."""


class NotLumpable(PosetLumpError):
    """Partition fails the constant-row-sum test; carries a witness."""

    def __init__(self, witness, message="partition is not a lumping"):
        self.witness = witness
        super().__init__(f"{message}: {witness}")


class FactorNotLumpable(PosetLumpError):
    def __init__(self, factor, witness):
        self.factor = factor
        self.witness = witness
        super().__init__(f"partition for factor {factor} is not a lumping: {witness}")


class TableIncomplete(PosetLumpError):
    def __init__(self, element, key):
        self.element = element
        self.key = key
        super().__init__(f"table for element {element} has no entry for cell {key}")


class ValueNotLumping(PosetLumpError):
    def __init__(self, element, key, witness):
        self.element = element
        self.key = key
        self.witness = witness
        super().__init__(
            f"table value for element {element} at cell {key} is not a lumping: {witness}"
        )


class NotInvariant(PosetLumpError):
    def __init__(self, generator, x, y):
        self.generator = generator
        self.pair = (x, y)
        super().__init__(
            f"chain is not invariant under generator {generator} at state pair ({x}, {y})"
        )


class ProjectionClash(PosetLumpError):
    def __init__(self, a, b):
        self.parts = (a, b)
        super().__init__(
            f"projected parts {sorted(a)} and {sorted(b)} overlap without being equal"
        )


class ReconstructionMismatch(PosetLumpError):
    """Reconstructed generators do not reproduce the requested partition."""


class AmbientTooLarge(PosetLumpError):
    def __init__(self, size, cap):
        self.size = size
        self.cap = cap
        super().__init__(f"ambient group has {size} elements, enumeration cap is {cap}")


class InternalCheckFailed(PosetLumpError):
    """A postcondition guaranteed by the theory failed; indicates a bug."""
