"""Angular-density check for asymptotic tail independence.

After a rank transform to standard Pareto margins, the angles of the most
extreme points concentrate near the two axes when the pair is
asymptotically independent, and in the interior when it is tail dependent.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import InsufficientDataError, ParameterError
from .models import BivariateSample

ASYMPTOTICALLY_INDEPENDENT = "asymptotically_independent"
DEPENDENT = "dependent"
INCONCLUSIVE = "inconclusive"


def rank_transform(sample: BivariateSample) -> BivariateSample:
    """Replace each coordinate by its average rank divided by ``n + 1``."""
    n = sample.n
    return BivariateSample(rankdata(sample.z1) / (n + 1), rankdata(sample.z2) / (n + 1))


@dataclass(frozen=True)
class AngularHistogram:
    """Normalized histogram of angles in ``[0, 1]`` (0 is the first axis, 1 the second)."""

    bins: int
    masses: tuple
    threshold_fraction: float
    retained: int

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.bins + 1)

    @property
    def extreme_mass(self) -> float:
        return self.masses[0] + self.masses[-1]

    @property
    def max_interior_mass(self) -> float:
        return max(self.masses[1:-1], default=0.0)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin_left", "bin_right", "mass"])
        e = self.edges
        for i, m in enumerate(self.masses):
            w.writerow([repr(float(e[i])), repr(float(e[i + 1])), repr(float(m))])
        return buf.getvalue()

    def to_dict(self):
        return {"bins": self.bins, "masses": list(self.masses),
                "threshold_fraction": self.threshold_fraction, "retained": self.retained}


def _half_bins(lo, hi, bins):
    """Bin of the angle ``(2/pi) atan(lo/hi)`` with ``lo <= hi``; lies in the lower half."""
    a = (2.0 / math.pi) * np.arctan2(lo, hi)
    return np.minimum(np.floor(a * bins).astype(int), (bins - 1) // 2 if bins % 2 else bins // 2 - 1)


def angular_histogram(sample: BivariateSample, threshold_fraction: float = 0.1,
                      bins: int = 20) -> AngularHistogram:
    """Angles ``(2/pi) atan(x2/x1)`` of the largest points by ``x1 + x2``.

    ``x = 1/(1 - u)`` with ``u`` the rank transform, so margins are standard
    Pareto.  The ``ceil(threshold_fraction * n)`` points with the largest sum
    are kept.  Each half of ``[0, 1]`` is binned from its own axis, so swapping
    coordinates reverses the histogram exactly; points on the diagonal split
    their mass between the two central bins when ``bins`` is even.
    """
    if isinstance(bins, bool) or int(bins) != bins or bins < 2:
        raise ParameterError(f"bins must be an integer >= 2, got {bins!r}")
    bins = int(bins)
    if not (0.0 < threshold_fraction < 1.0):
        raise ParameterError(f"threshold_fraction must lie in (0, 1), got {threshold_fraction!r}")
    n = sample.n
    m = math.ceil(threshold_fraction * n)
    if m < bins:
        raise InsufficientDataError(f"only {m} points retained; need at least bins = {bins}")
    u = rank_transform(sample)
    x1 = 1.0 / (1.0 - u.z1)
    x2 = 1.0 / (1.0 - u.z2)
    order = np.argsort(-(x1 + x2), kind="stable")[:m]
    x1, x2 = x1[order], x2[order]

    counts = np.zeros(bins)
    below, above, diag = x2 < x1, x2 > x1, x2 == x1
    np.add.at(counts, _half_bins(x2[below], x1[below], bins), 1.0)
    np.add.at(counts, bins - 1 - _half_bins(x1[above], x2[above], bins), 1.0)
    nd = int(diag.sum())
    if bins % 2:
        counts[bins // 2] += nd
    else:
        counts[bins // 2 - 1] += nd / 2
        counts[bins // 2] += nd / 2
    return AngularHistogram(bins, tuple(float(c) for c in counts / m), float(threshold_fraction), m)


def ai_verdict(hist: AngularHistogram, extreme_threshold: float = 0.5,
               interior_cap: float = 0.15, dependent_threshold: float = 0.25) -> str:
    """Heuristic reading of an angular histogram.

    Asymptotically independent when the two end bins hold more than
    ``extreme_threshold`` of the mass and no interior bin exceeds
    ``interior_cap``; dependent when some interior bin exceeds
    ``dependent_threshold``; otherwise inconclusive.
    """
    if hist.extreme_mass > extreme_threshold and hist.max_interior_mass <= interior_cap:
        return ASYMPTOTICALLY_INDEPENDENT
    if hist.max_interior_mass > dependent_threshold:
        return DEPENDENT
    return INCONCLUSIVE
