"""Exception hierarchy shared across the package."""


class TailContagionError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ParameterError(TailContagionError, ValueError):
    """A parameter lies outside its admissible domain."""

    exit_code = 3


class UnsupportedModelError(TailContagionError):
    """The requested quantity is not available for this model family or branch."""

    exit_code = 5


class InsufficientDataError(TailContagionError, ValueError):
    """Too few observations (or exceedances) to compute a statistic."""

    exit_code = 4


class InsufficientExceedancesError(InsufficientDataError):
    def __init__(self, message, observed):
        super().__init__(f"{message} (observed {observed} exceedances)")
        self.observed = observed


class DegenerateDataError(InsufficientDataError):
    """The data carry no tail information (e.g. all top order statistics tie)."""


class NonHeavyTailError(InsufficientDataError):
    def __init__(self, shape):
        super().__init__(f"fitted generalized Pareto shape {shape:.6g} is not positive")
        self.shape = shape


class EmptyOverlapError(InsufficientDataError):
    """Two return series share no calendar dates."""
