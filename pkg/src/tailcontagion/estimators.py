"""Empirical and extrapolated MME/MES estimators.

The empirical estimators average over the ``k`` largest ``z2`` values and
estimate the risk measure at level ``k/n``.  The extreme value versions push
that anchor to a smaller level ``p`` with a power of ``k/(np)``: the
exponent is ``(beta - alpha0 + 1)/beta`` under asymptotic tail independence,
or ``1/alpha1`` when ``Z1`` is assumed tail dependent on ``Z2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .models import BivariateSample
from .tail_index import default_k, hill, lmoment_tail_index, min_transform

EXPONENT_OUT_OF_RANGE = "exponent_out_of_range"
ANCHOR_EQUALS_TARGET = "anchor_equals_target"


@dataclass(frozen=True)
class RiskEstimate:
    measure: str
    p: float
    value: float
    method: str
    n: int
    k: int
    k0: int | None = None
    k1: int | None = None
    k2: int | None = None
    indices_used: dict = field(default_factory=dict)
    exponent: float | None = None
    flags: frozenset = frozenset()

    def to_dict(self):
        return {
            "measure": self.measure,
            "p": self.p,
            "value": self.value,
            "method": self.method,
            "n": self.n,
            "k": self.k,
            "k0": self.k0,
            "k1": self.k1,
            "k2": self.k2,
            "indices_used": dict(self.indices_used),
            "exponent": self.exponent,
            "flags": sorted(self.flags),
        }


def _check_k(k, n, name="k"):
    if isinstance(k, bool) or int(k) != k or not (1 <= int(k) < n):
        raise ParameterError(f"{name} must be an integer with 1 <= {name} < n = {n}, got {k!r}")
    return int(k)


def _check_p(p):
    if not (0.0 < p < 1.0):
        raise ParameterError(f"target level p must lie in (0, 1), got {p!r}")


def _anchor(sample: BivariateSample, k: int, measure: str) -> float:
    n = sample.n
    k = _check_k(k, n)
    # T is the k-th largest z2; only strictly larger z2 count
    t = np.partition(sample.z2, n - k)[n - k]
    over = sample.z2 > t
    if measure == "MME":
        return float(np.maximum(sample.z1[over] - t, 0.0).sum() / k)
    return float(sample.z1[over].sum() / k)


def empirical_mme(sample: BivariateSample, k: int) -> RiskEstimate:
    value = _anchor(sample, k, "MME")
    return RiskEstimate("MME", k / sample.n, value, "empirical", sample.n, int(k))


def empirical_mes(sample: BivariateSample, k: int) -> RiskEstimate:
    value = _anchor(sample, k, "MES")
    return RiskEstimate("MES", k / sample.n, value, "empirical", sample.n, int(k))


def _factor(k, n, p, exponent):
    ratio = k / (n * p)
    if abs(ratio - 1.0) <= 4 * np.finfo(float).eps:
        return 1.0, {ANCHOR_EQUALS_TARGET}
    return ratio**exponent, set()


def ai_exponent(beta: float, alpha0: float) -> float:
    return (beta - alpha0 + 1.0) / beta


@dataclass(frozen=True)
class FittedIndices:
    """Hill indices of a sample, reusable across target levels."""

    beta: float | None = None
    alpha0: float | None = None
    alpha1: float | None = None


INDEX_METHODS = {"hill": hill, "lmoment": lmoment_tail_index}


def _index_fn(index_method):
    try:
        return INDEX_METHODS[index_method]
    except KeyError:
        raise ParameterError(f"index_method must be one of {sorted(INDEX_METHODS)}, got {index_method!r}") from None


def fit_indices_ai(sample: BivariateSample, k0: int, k2: int, index_method: str = "hill") -> FittedIndices:
    fit = _index_fn(index_method)
    n = sample.n
    k0, k2 = _check_k(k0, n, "k0"), _check_k(k2, n, "k2")
    return FittedIndices(beta=fit(sample.z2, k2).index, alpha0=fit(min_transform(sample), k0).index)


def fit_indices_dependent(sample: BivariateSample, k1: int, index_method: str = "hill") -> FittedIndices:
    fit = _index_fn(index_method)
    return FittedIndices(alpha1=fit(sample.z1, _check_k(k1, sample.n, "k1")).index)


def evt_from_anchor(anchor: float, measure: str, n: int, k: int, p: float, fitted: FittedIndices,
                    k0=None, k1=None, k2=None) -> RiskEstimate:
    """Extrapolate a precomputed empirical anchor at ``k/n`` to level ``p``."""
    _check_p(p)
    if fitted.alpha1 is not None:
        exponent = 1.0 / fitted.alpha1
        method, used = "evt_dependent", {"alpha1": fitted.alpha1}
        flags = set()
    else:
        exponent = ai_exponent(fitted.beta, fitted.alpha0)
        method, used = "evt_ai", {"beta": fitted.beta, "alpha0": fitted.alpha0}
        flags = set() if 0.0 < exponent <= 1.0 else {EXPONENT_OUT_OF_RANGE}
    factor, extra = _factor(k, n, p, exponent)
    return RiskEstimate(measure, p, anchor * factor, method, n, k, k0, k1, k2, used, exponent,
                        frozenset(flags | extra))


def _evt(sample, k, k0, k2, p, measure, index_method="hill"):
    n = sample.n
    k = _check_k(k, n)
    k0 = default_k(n) if k0 is None else k0
    k2 = default_k(n) if k2 is None else k2
    _check_p(p)
    fitted = fit_indices_ai(sample, k0, k2, index_method)
    return evt_from_anchor(_anchor(sample, k, measure), measure, n, k, p, fitted, k0=int(k0), k2=int(k2))


def _evt_dep(sample, k, k1, p, measure, index_method="hill"):
    n = sample.n
    k = _check_k(k, n)
    k1 = default_k(n) if k1 is None else k1
    _check_p(p)
    fitted = fit_indices_dependent(sample, k1, index_method)
    return evt_from_anchor(_anchor(sample, k, measure), measure, n, k, p, fitted, k1=int(k1))


def evt_mme(sample: BivariateSample, k: int, k0: int | None, k2: int | None, p: float,
            index_method: str = "hill") -> RiskEstimate:
    """``(k/(np))**((beta - alpha0 + 1)/beta)`` times the empirical MME at ``k/n``.

    ``beta`` is the Hill index of ``z2`` (``k2`` order statistics) and
    ``alpha0`` the Hill index of ``min(z1, z2)`` (``k0``); ``index_method="lmoment"``
    swaps in the L-moment fit.  Exponents outside ``(0, 1]`` are kept and flagged.
    """
    return _evt(sample, k, k0, k2, p, "MME", index_method)


def evt_mes(sample: BivariateSample, k: int, k0: int | None, k2: int | None, p: float,
            index_method: str = "hill") -> RiskEstimate:
    return _evt(sample, k, k0, k2, p, "MES", index_method)


def evt_mme_dependent(sample: BivariateSample, k: int, k1: int | None, p: float,
                      index_method: str = "hill") -> RiskEstimate:
    """``(k/(np))**(1/alpha1)`` times the empirical MME, ``alpha1`` the Hill index of ``z1``."""
    return _evt_dep(sample, k, k1, p, "MME", index_method)


def evt_mes_dependent(sample: BivariateSample, k: int, k1: int | None, p: float,
                      index_method: str = "hill") -> RiskEstimate:
    return _evt_dep(sample, k, k1, p, "MES", index_method)


METHODS = ("empirical", "evt_ai", "evt_dependent")


def estimate(sample: BivariateSample, measure: str, method: str, p: float | None = None,
             k: int | None = None, k0: int | None = None, k1: int | None = None,
             k2: int | None = None, index_method: str = "hill") -> RiskEstimate:
    """Dispatch on ``measure`` (MME/MES) and ``method``; ``k`` defaults to ten percent of ``n``."""
    measure = measure.upper()
    if measure not in ("MME", "MES"):
        raise ParameterError(f"measure must be MME or MES, got {measure!r}")
    k = default_k(sample.n) if k is None else k
    if method == "empirical":
        if p is not None and not math.isclose(p, k / sample.n, rel_tol=1e-12):
            raise ParameterError("the empirical estimator targets p = k/n; choose k = n*p")
        return (empirical_mme if measure == "MME" else empirical_mes)(sample, k)
    if p is None:
        raise ParameterError("extrapolated estimators need a target level p")
    if method == "evt_ai":
        return _evt(sample, k, k0, k2, p, measure, index_method)
    if method == "evt_dependent":
        return _evt_dep(sample, k, k1, p, measure, index_method)
    raise ParameterError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}")
