"""Exception types shared across the package."""


class ElasticMineError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(ElasticMineError, ValueError):
    """Malformed input text. Carries the 1-based line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class LabelCardinalityError(ParseError):
    """More than two distinct raw labels in a binary classification source."""


class ClassMissingError(ElasticMineError, ValueError):
    """A per-class structure was requested but a class has no points."""


class DepthNotFoundError(ElasticMineError, LookupError):
    """The requested code depth does not exist in the codebook."""


class BudgetTooSmallError(ElasticMineError, ValueError):
    """No code fits within the given length budget."""


class InsufficientCandidatesError(ElasticMineError):
    """State filtering left fewer candidate nodes than the requested k."""


class InsufficientBudgetError(ElasticMineError, ValueError):
    """An anytime baseline was given a budget below its minimum."""


class DivergenceError(ElasticMineError):
    """Gradient-descent training produced a non-finite loss."""

    def __init__(self, message, feature=None, epoch=None):
        self.feature = feature
        self.epoch = epoch
        super().__init__(message)


class UndefinedMetricError(ElasticMineError, ValueError):
    """A quality metric is undefined for the given inputs."""


class ResolutionInfeasibleError(ElasticMineError, ValueError):
    """A derived possible-point count fell below the dataset size.

    ``min_cell_volume`` is the largest cell volume that would have kept
    every count feasible, or None when no constant can work.
    """

    def __init__(self, message, min_cell_volume=None):
        self.min_cell_volume = min_cell_volume
        super().__init__(message)


class AssumptionRequiredError(ElasticMineError, ValueError):
    """An elasticity equivalence was requested without declaring its assumptions."""


class ClockResolutionError(ElasticMineError):
    """A profiling run elapsed zero time on the available clock."""
