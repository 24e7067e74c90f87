"""Tail-index estimators on the alpha scale (``P(X > x) ~ x**-index``)."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DegenerateDataError, InsufficientDataError, NonHeavyTailError, ParameterError
from .models import BivariateSample


@dataclass(frozen=True)
class TailIndexEstimate:
    index: float
    k: int
    method: str
    n: int

    def to_dict(self):
        return asdict(self)


def default_k(n: int) -> int:
    """Ten percent of the sample, rounded up."""
    return max(1, math.ceil(0.1 * n))


def _prepare(data, k, k_min=1):
    x = np.asarray(data, dtype=float).reshape(-1)
    n = x.size
    if not np.all(np.isfinite(x)):
        raise ParameterError("data must be finite")
    if isinstance(k, bool) or int(k) != k:
        raise ParameterError(f"k must be an integer, got {k!r}")
    k = int(k)
    if n <= k_min:
        raise InsufficientDataError(f"need more than {k_min} observations, got {n}")
    if not (k_min <= k < n):
        raise ParameterError(f"k must satisfy {k_min} <= k < n = {n}, got {k}")
    return x, n, k


def _top(x, k):
    """The ``k + 1`` largest values in descending order."""
    part = np.partition(x, x.size - k - 1)[x.size - k - 1:]
    return np.sort(part)[::-1]


def hill(data, k: int) -> TailIndexEstimate:
    """Hill estimator: reciprocal mean log-excess of the top ``k`` values over ``X_(k+1:n)``.

    >>> round(hill([8, 4, 2, 1], 3).index, 4)
    0.7213
    """
    x, n, k = _prepare(data, k, k_min=2)
    if np.any(x <= 0):
        raise ParameterError("Hill estimation needs strictly positive data")
    top = _top(x, k)
    # log-ratios, so rescaling by a power of two leaves the estimate bit-identical
    h = float(np.mean(np.log(top[:k] / top[k])))
    if h <= 0:
        raise DegenerateDataError("the top order statistics are all equal; mean log-excess is zero")
    return TailIndexEstimate(1.0 / h, k, "hill", n)


def hill_plot(data, k_min: int, k_max: int) -> list[tuple[int, float]]:
    """``(k, hill(data, k).index)`` for every ``k`` in ``[k_min, k_max]``."""
    x = np.asarray(data, dtype=float).reshape(-1)
    n = x.size
    if not (2 <= k_min <= k_max < n):
        raise ParameterError(f"need 2 <= k_min <= k_max < n = {n}, got [{k_min}, {k_max}]")
    if np.any(x <= 0) or not np.all(np.isfinite(x)):
        raise ParameterError("Hill estimation needs strictly positive finite data")
    logs = np.log(_top(x, k_max))
    # running mean of the top-k logs minus the (k+1)-th
    csum = np.cumsum(logs)
    out = []
    for k in range(k_min, k_max + 1):
        h = csum[k - 1] / k - logs[k]
        if h <= 0:
            raise DegenerateDataError(f"mean log-excess is zero at k = {k}")
        out.append((k, float(1.0 / h)))
    return out


def hill_plot_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "index"])
    for k, idx in rows:
        w.writerow([k, repr(float(idx))])
    return buf.getvalue()


def min_transform(sample: BivariateSample) -> np.ndarray:
    """Pairwise minimum, whose tail index is the hidden index ``alpha0``."""
    return np.minimum(sample.z1, sample.z2)


def lmoment_tail_index(data, k: int) -> TailIndexEstimate:
    """Generalized Pareto shape from the first two sample L-moments of the top-``k`` excesses.

    The excesses are taken over ``X_(k+1:n)``; the shape is ``2 - l1/l2`` and
    the index its reciprocal.
    """
    x, n, k = _prepare(data, k, k_min=4)
    top = _top(x, k)
    exc = np.sort(top[:k] - top[k])
    l1 = float(exc.mean())
    # unbiased probability-weighted moment b1
    b1 = float(np.dot(np.arange(k) / (k - 1), exc) / k)
    l2 = 2.0 * b1 - l1
    if l2 <= 0:
        raise NonHeavyTailError(-math.inf)
    shape = 2.0 - l1 / l2
    if shape <= 0:
        raise NonHeavyTailError(shape)
    return TailIndexEstimate(1.0 / shape, k, "lmoment", n)
