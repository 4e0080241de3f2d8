"""Exception types shared across the package."""


class LowRankBPError(Exception):
    """Base class for errors raised by this package."""


class DimensionMismatchError(LowRankBPError):
    """Operands have incompatible dimensions."""


class AllZeroError(LowRankBPError):
    """Every supplied vector is (numerically) zero."""


class EmptyInputError(LowRankBPError):
    """An operation that needs at least one value received none."""


class ZeroDirectionError(LowRankBPError):
    """A direction vector has (numerically) zero norm."""


class IterationLimitError(LowRankBPError):
    """An iterative solver exceeded its cycling guard."""


class DegenerateSampleError(LowRankBPError):
    """Too few samples, or every candidate fit was singular."""


class ConsensusFailureError(LowRankBPError):
    """A majority vote or consensus regression lacks >1/2 agreement.

    Signals that the corruption rate is too high for the recovery regime.
    """


class TooLargeError(LowRankBPError):
    """Problem size exceeds the documented limit of an exhaustive routine."""


class NoValidQError(LowRankBPError):
    """No admissible field order exists for the requested packing."""


class OverlappingPartsError(LowRankBPError):
    """Column-aggregation parts are not pairwise disjoint."""


class EmptyReportError(LowRankBPError):
    """A recovery report contains no estimates."""
