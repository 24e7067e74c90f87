"""Marginal mean excess and marginal expected shortfall under asymptotic tail independence."""
from .errors import (
    DegenerateDataError,
    EmptyOverlapError,
    InsufficientDataError,
    InsufficientExceedancesError,
    NonHeavyTailError,
    ParameterError,
    TailContagionError,
    UnsupportedModelError,
)
from .models import (
    AdditiveModelC,
    BernoulliMixture,
    BivariateSample,
    GaussianCopulaPareto,
    MarshallOlkinPareto,
    ModelSpec,
    TheoreticalIndices,
    aggregate_system,
    model_from_params,
    sample,
    theoretical_indices,
)

__version__ = "0.1.0"
