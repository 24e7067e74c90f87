"""Bivariate heavy-tailed model families and seeded samplers.

All Pareto variables use the standard convention ``P(X > x) = x**-index`` on
``[1, inf)``, generated as ``U**(-1/index)`` from ``U ~ Uniform(0, 1)``.

Randomness comes from numpy's PCG64 generator.  A stream is identified by
``(seed, stream_id)``, hashed through :class:`numpy.random.SeedSequence`, so
replication ``r`` of an experiment always sees the same numbers no matter how
replications are scheduled.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar

import numpy as np
from scipy import integrate
from scipy.special import ndtr, ndtri

from .bvn import bvnu
from .errors import ParameterError, UnsupportedModelError

_TINY = np.finfo(float).tiny


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """PCG64 generator for the stream ``(seed, stream)``."""
    if int(seed) < 0 or int(stream) < 0:
        raise ParameterError("seed and stream must be nonnegative integers")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(stream)])))


def pareto_survival(x, index):
    x = np.asarray(x, dtype=float)
    return np.where(x <= 1.0, 1.0, np.power(np.maximum(x, 1.0), -index))


def _pareto(u, index):
    return np.power(np.maximum(u, _TINY), -1.0 / index)


def _pareto_above(m, u, index):
    """Pareto(index) conditioned to exceed ``m`` (``m`` may be below 1)."""
    return np.maximum(m, 1.0) * _pareto(u, index)


def pareto_excess_mean(s, index):
    """``E[(Y - s)_+]`` for ``Y ~ Pareto(index)``, ``index > 1``."""
    s = np.asarray(s, dtype=float)
    low = index / (index - 1.0) - s
    high = np.power(np.maximum(s, 1.0), 1.0 - index) / (index - 1.0)
    return np.where(s <= 1.0, low, high)


def pareto_partial_mean(s, index):
    """``E[Y 1{Y > s}]`` for ``Y ~ Pareto(index)``."""
    s = np.asarray(s, dtype=float)
    return index / (index - 1.0) * np.power(np.maximum(s, 1.0), 1.0 - index)


def pareto_sum_survival(t: float, a: float, b: float, c: float = 1.0) -> float:
    """``P(A + c B > t)`` for independent ``A ~ Pareto(a)``, ``B ~ Pareto(b)``."""
    if t <= 1.0 + c:
        return 1.0
    upper = (t - 1.0) / c
    certain = upper ** -b
    mid = min(t / (2.0 * c), upper)

    # B below mid: integrate in log(B); A must exceed t - cB
    def near(y):
        x = math.exp(y)
        return (t - c * x) ** -a * b * x ** -b

    # B in [mid, upper]: integrate in log(W), W = t - cB the level A must exceed
    def far(u):
        w = math.exp(u)
        x = (t - w) / c
        return w ** (1.0 - a) * b * x ** (-b - 1.0) / c

    part = 0.0
    if mid > 1.0:
        part += integrate.quad(near, 0.0, math.log(mid), epsabs=0.0, epsrel=1e-12, limit=200)[0]
    w_hi = t - c * max(mid, 1.0)
    if w_hi > 1.0:
        part += integrate.quad(far, 0.0, math.log(w_hi), epsabs=0.0, epsrel=1e-12, limit=200)[0]
    return certain + part


@dataclass(frozen=True, eq=False)
class BivariateSample:
    """Ordered nonnegative pairs ``(z1, z2)``, stored as two read-only arrays."""

    z1: np.ndarray
    z2: np.ndarray

    def __post_init__(self):
        z1 = np.array(self.z1, dtype=float).reshape(-1)
        z2 = np.array(self.z2, dtype=float).reshape(-1)
        if z1.shape != z2.shape:
            raise ParameterError("z1 and z2 must have the same length")
        if z1.size == 0:
            raise ParameterError("a sample needs at least one pair")
        if not (np.all(np.isfinite(z1)) and np.all(np.isfinite(z2))):
            raise ParameterError("sample coordinates must be finite")
        if np.any(z1 < 0) or np.any(z2 < 0):
            raise ParameterError("sample coordinates must be nonnegative")
        z1.flags.writeable = False
        z2.flags.writeable = False
        object.__setattr__(self, "z1", z1)
        object.__setattr__(self, "z2", z2)

    @classmethod
    def from_pairs(cls, pairs) -> BivariateSample:
        arr = np.asarray(pairs, dtype=float).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1])

    @property
    def n(self) -> int:
        return self.z1.size

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, BivariateSample):
            return NotImplemented
        return np.array_equal(self.z1, other.z1) and np.array_equal(self.z2, other.z2)

    @property
    def pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.z1.tolist(), self.z2.tolist()))

    def swapped(self) -> BivariateSample:
        return BivariateSample(self.z2, self.z1)

    def scaled(self, c: float) -> BivariateSample:
        return BivariateSample(c * self.z1, c * self.z2)


@dataclass(frozen=True)
class TheoreticalIndices:
    """Tail indices implied by a model.

    ``alpha1`` and ``beta`` are the tail indices of ``Z1`` and ``Z2``;
    ``alpha`` is the index of the joint regular variation (the heavier
    margin) and ``alpha0`` the hidden index on the interior cone.
    """

    alpha1: float
    beta: float
    alpha0: float

    @property
    def alpha(self) -> float:
        return min(self.alpha1, self.beta)

    @property
    def mme_rate(self) -> float:
        """Regular-variation index of ``t -> MME(1/t)``."""
        return (1.0 + self.beta - self.alpha0) / self.beta


def aggregate_system(sample: BivariateSample, mode: str) -> BivariateSample:
    """Replace the second coordinate by a system aggregate of both risks."""
    if mode == "sum":
        return BivariateSample(sample.z1, sample.z1 + sample.z2)
    if mode == "min":
        return BivariateSample(sample.z1, np.minimum(sample.z1, sample.z2))
    if mode == "max":
        return BivariateSample(sample.z1, np.maximum(sample.z1, sample.z2))
    raise ParameterError(f"unknown aggregation mode {mode!r}; expected sum, min or max")


def _check_index(name, value, lower=1.0):
    if not (math.isfinite(value) and value > lower):
        raise ParameterError(f"{name} must be a finite number > {lower:g}, got {value!r}")


class ModelSpec:
    """Common interface of the generative model families.

    Subclasses supply the sampler and every closed-form fact the oracles need:
    marginal and minimum survival functions, the hidden limit measure of
    rectangles, and (where cheap) exact draws conditional on ``Z2 > t``.
    """

    family: ClassVar[str]
    key: ClassVar[str]

    def params(self) -> dict:
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {"family": self.family, **self.params()}

    def indices(self) -> TheoreticalIndices:
        raise NotImplementedError

    def sample(self, n: int, seed: int, stream: int = 0) -> BivariateSample:
        if int(n) < 1:
            raise ParameterError("sample size n must be at least 1")
        z1, z2 = self._draw(int(n), make_rng(seed, stream))
        return BivariateSample(z1, z2)

    def _draw(self, n, rng):
        raise NotImplementedError

    def survival_z1(self, t):
        raise NotImplementedError

    def survival_z2(self, t):
        raise NotImplementedError

    def survival_min(self, t):
        """``P(min(Z1, Z2) > t)``."""
        raise NotImplementedError

    def survival_z(self, coord: int, t):
        return self.survival_z1(t) if coord == 1 else self.survival_z2(t)

    def joint_survival(self, x, y):
        """``P(Z1 > x, Z2 > y)``; only copula families have it in closed form."""
        raise UnsupportedModelError(f"{self.family} has no closed-form joint survival function")

    def nu0(self, x, y):
        """Hidden limit measure of the rectangle ``(x, inf) x (y, inf)``."""
        raise NotImplementedError

    def draw_given_z2_exceeds(self, t: float, n: int, rng):
        """Draws from the law of ``Z`` restricted to ``{Z2 > t}``.

        Returns ``(z1, z2, w)``; ``E[g(Z) | Z2 > t]`` is estimated by the
        ``w``-weighted mean of ``g``.  Exact conditional samplers return unit
        weights.
        """
        raise NotImplementedError

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}({args})"

    def __eq__(self, other):
        return type(self) is type(other) and self.params() == other.params()

    def __hash__(self):
        return hash((type(self).__name__, tuple(sorted(self.params().items()))))


class GaussianCopulaPareto(ModelSpec):
    """Equal Pareto(alpha) margins joined by a Gaussian copula with correlation rho."""

    family = "GaussianCopulaPareto"
    key = "gauss"

    def __init__(self, alpha: float, rho: float):
        self.alpha = float(alpha)
        self.rho = float(rho)
        _check_index("alpha", self.alpha)
        if not (-1.0 < self.rho < 1.0):
            raise ParameterError(f"rho must lie in (-1, 1), got {rho!r}")

    def params(self):
        return {"alpha": self.alpha, "rho": self.rho}

    def indices(self):
        return TheoreticalIndices(self.alpha, self.alpha, 2.0 * self.alpha / (1.0 + self.rho))

    def _draw(self, n, rng):
        g = rng.standard_normal((2, n))
        n1 = g[0]
        n2 = self.rho * g[0] + math.sqrt(1.0 - self.rho**2) * g[1]
        # upper normal tail maps to upper Pareto tail
        return _pareto(ndtr(-n1), self.alpha), _pareto(ndtr(-n2), self.alpha)

    def survival_z1(self, t):
        return pareto_survival(t, self.alpha)

    survival_z2 = survival_z1

    def _normal_level(self, x):
        x = np.asarray(x, dtype=float)
        u = np.power(np.maximum(x, 1.0), -self.alpha)
        return np.where(x <= 1.0, -np.inf, -ndtri(u))

    def joint_survival(self, x, y):
        return bvnu(self._normal_level(x), self._normal_level(y), self.rho)

    def survival_min(self, t):
        return self.joint_survival(t, t)

    def nu0(self, x, y):
        e = self.alpha / (1.0 + self.rho)
        return np.power(np.asarray(x, dtype=float) * np.asarray(y, dtype=float), -e)

    def draw_given_z2_exceeds(self, t, n, rng):
        p = float(self.survival_z2(t))
        u2 = p * rng.random(n)
        n2 = -ndtri(np.maximum(u2, _TINY))
        n1 = self.rho * n2 + math.sqrt(1.0 - self.rho**2) * rng.standard_normal(n)
        return _pareto(ndtr(-n1), self.alpha), _pareto(u2, self.alpha), np.ones(n)


class MarshallOlkinPareto(ModelSpec):
    """Equal Pareto(alpha) margins with the Marshall-Olkin survival copula.

    The survival copula is ``C(u, v) = u v min(u**-gamma1, v**-gamma2)``.
    Sampling uses the common-shock construction: exponential shocks with
    rates ``lam1, lam2, lam12 = 1`` where ``gamma_i = lam12 / (lam_i + lam12)``,
    lifetimes ``T_i = min(E_i, E12)``, and ``Z_i = exp(T_i / (gamma_i alpha))``.
    """

    family = "MarshallOlkinPareto"
    key = "mo"

    def __init__(self, alpha: float, gamma1: float, gamma2: float):
        self.alpha = float(alpha)
        self.gamma1 = float(gamma1)
        self.gamma2 = float(gamma2)
        _check_index("alpha", self.alpha)
        for name, g in (("gamma1", self.gamma1), ("gamma2", self.gamma2)):
            if not (0.0 < g < 1.0):
                raise ParameterError(f"{name} must lie in (0, 1), got {g!r}")

    def params(self):
        return {"alpha": self.alpha, "gamma1": self.gamma1, "gamma2": self.gamma2}

    def indices(self):
        a0 = self.alpha * max(2.0 - self.gamma1, 2.0 - self.gamma2)
        return TheoreticalIndices(self.alpha, self.alpha, a0)

    def _rates(self):
        return 1.0 / self.gamma1 - 1.0, 1.0 / self.gamma2 - 1.0

    def _draw(self, n, rng):
        lam1, lam2 = self._rates()
        e = rng.standard_exponential((3, n))
        e1, e2, e12 = e[0] / lam1, e[1] / lam2, e[2]
        t1 = np.minimum(e1, e12)
        t2 = np.minimum(e2, e12)
        return np.exp(t1 / (self.gamma1 * self.alpha)), np.exp(t2 / (self.gamma2 * self.alpha))

    def survival_z1(self, t):
        return pareto_survival(t, self.alpha)

    survival_z2 = survival_z1

    def survival_copula(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return u * v * np.minimum(np.power(u, -self.gamma1), np.power(v, -self.gamma2))

    def joint_survival(self, x, y):
        return self.survival_copula(pareto_survival(x, self.alpha), pareto_survival(y, self.alpha))

    def survival_min(self, t):
        return self.joint_survival(t, t)

    def nu0(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        a = self.alpha
        if self.gamma1 < self.gamma2:
            return x ** -(a * (1.0 - self.gamma1)) * y**-a
        if self.gamma1 > self.gamma2:
            return x**-a * y ** -(a * (1.0 - self.gamma2))
        return x**-a * y**-a * np.minimum(x, y) ** (a * self.gamma1)

    def draw_given_z2_exceeds(self, t, n, rng):
        lam1, lam2 = self._rates()
        r = self.gamma2 * self.alpha * math.log(max(t, 1.0))
        e = rng.standard_exponential((3, n))
        e1 = e[0] / lam1
        # memorylessness: given min(E2, E12) > r both shocks are r plus fresh exponentials
        e2 = r + e[1] / lam2
        e12 = r + e[2]
        t1 = np.minimum(e1, e12)
        t2 = np.minimum(e2, e12)
        z1 = np.exp(t1 / (self.gamma1 * self.alpha))
        z2 = np.exp(t2 / (self.gamma2 * self.alpha))
        return z1, z2, np.ones(n)


class BernoulliMixture(ModelSpec):
    """``Z = B (X1, X3) + (1 - B) (X2, X2)`` with ``B ~ Bernoulli(q)``.

    ``X1, X2, X3`` are independent Pareto(alpha), Pareto(alpha0), Pareto(gamma).
    """

    family = "BernoulliMixture"
    key = "bernoulli"

    def __init__(self, alpha: float, alpha0: float, gamma: float = 4.0, q: float = 0.5):
        self.alpha = float(alpha)
        self.alpha0 = float(alpha0)
        self.gamma = float(gamma)
        self.q = float(q)
        _check_index("alpha", self.alpha)
        if not (self.alpha < self.alpha0 < self.gamma):
            raise ParameterError("BernoulliMixture requires 1 < alpha < alpha0 < gamma")
        if not self.alpha0 < 1.0 + self.alpha:
            raise ParameterError("BernoulliMixture requires alpha0 < 1 + alpha")
        if not math.isfinite(self.gamma):
            raise ParameterError("gamma must be finite")
        if not (0.0 < self.q < 1.0):
            raise ParameterError(f"q must lie in (0, 1), got {q!r}")

    def params(self):
        return {"alpha": self.alpha, "alpha0": self.alpha0, "gamma": self.gamma, "q": self.q}

    def indices(self):
        return TheoreticalIndices(self.alpha, self.alpha0, self.alpha0)

    def _draw(self, n, rng):
        u = rng.random((4, n))
        b = u[0] < self.q
        x1 = _pareto(u[1], self.alpha)
        x2 = _pareto(u[2], self.alpha0)
        x3 = _pareto(u[3], self.gamma)
        return np.where(b, x1, x2), np.where(b, x3, x2)

    def survival_z1(self, t):
        return self.q * pareto_survival(t, self.alpha) + (1 - self.q) * pareto_survival(t, self.alpha0)

    def survival_z2(self, t):
        return self.q * pareto_survival(t, self.gamma) + (1 - self.q) * pareto_survival(t, self.alpha0)

    def survival_min(self, t):
        return (self.q * pareto_survival(t, self.alpha) * pareto_survival(t, self.gamma)
                + (1 - self.q) * pareto_survival(t, self.alpha0))

    def joint_survival(self, x, y):
        return (self.q * pareto_survival(x, self.alpha) * pareto_survival(y, self.gamma)
                + (1 - self.q) * pareto_survival(np.maximum(x, y), self.alpha0))

    def nu0(self, x, y):
        return np.power(np.maximum(x, y), -self.alpha0)

    def draw_given_z2_exceeds(self, t, n, rng):
        s_mix = self.q * float(pareto_survival(t, self.gamma))
        s_diag = (1 - self.q) * float(pareto_survival(t, self.alpha0))
        u = rng.random((3, n))
        b = u[0] < s_mix / (s_mix + s_diag)
        x1 = _pareto(u[1], self.alpha)
        x3 = _pareto_above(t, u[2], self.gamma)
        x2 = _pareto_above(t, u[2], self.alpha0)
        return np.where(b, x1, x2), np.where(b, x3, x2), np.ones(n)


class AdditiveModelC(ModelSpec):
    """Additive model ``Z = Y + V`` and its system aggregations.

    ``Y1, Y2`` are iid Pareto(alpha) and ``V1 = V2 = V ~ Pareto(alpha0)``.

    ``plain``  ``(Y1 + V, Y2 + V)``
    ``min``    plain followed by ``aggregate_system(., "min")``
    ``sum``    ``Y1 = 0``, i.e. ``(V, Y2 + V)``, followed by the sum aggregation
    ``max``    ``Y1 = 0`` followed by the max aggregation

    The sum and max aggregations only keep hidden regular variation when the
    first component carries no independent heavy part, hence ``Y1 = 0`` there.
    """

    family = "AdditiveModelC"
    key = "modelc"
    variants = ("plain", "sum", "min", "max")

    def __init__(self, alpha: float, alpha0: float, variant: str = "plain"):
        self.alpha = float(alpha)
        self.alpha0 = float(alpha0)
        self.variant = str(variant)
        _check_index("alpha", self.alpha)
        if not (self.alpha < self.alpha0 < self.alpha + 1.0):
            raise ParameterError("AdditiveModelC requires alpha < alpha0 < alpha + 1")
        if self.variant not in self.variants:
            raise ParameterError(f"variant must be one of {self.variants}, got {variant!r}")

    def params(self):
        return {"alpha": self.alpha, "alpha0": self.alpha0, "variant": self.variant}

    def indices(self):
        a, a0 = self.alpha, self.alpha0
        return {
            "plain": TheoreticalIndices(a, a, a0),
            "min": TheoreticalIndices(a, a0, a0),
            "sum": TheoreticalIndices(a0, a, a0),
            "max": TheoreticalIndices(a0, a, a0),
        }[self.variant]

    @property
    def _y1_free(self):
        return self.variant in ("plain", "min")

    def _draw(self, n, rng):
        u = rng.random((3, n))
        y1 = _pareto(u[0], self.alpha)
        y2 = _pareto(u[1], self.alpha)
        v = _pareto(u[2], self.alpha0)
        base = BivariateSample(y1 + v if self._y1_free else v, y2 + v)
        if self.variant != "plain":
            base = aggregate_system(base, self.variant)
        return base.z1, base.z2

    def survival_z1(self, t):
        if self._y1_free:
            return _vectorize(pareto_sum_survival, t, self.alpha, self.alpha0)
        return pareto_survival(t, self.alpha0)

    def survival_z2(self, t):
        if self.variant == "sum":
            return _vectorize(pareto_sum_survival, t, self.alpha, self.alpha0, 2.0)
        if self.variant == "min":
            return _vectorize(pareto_sum_survival, t, 2.0 * self.alpha, self.alpha0)
        return _vectorize(pareto_sum_survival, t, self.alpha, self.alpha0)

    def survival_min(self, t):
        if self._y1_free:
            return _vectorize(pareto_sum_survival, t, 2.0 * self.alpha, self.alpha0)
        return pareto_survival(t, self.alpha0)

    def nu0(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.variant == "sum":
            return np.power(np.maximum(x, y / 2.0), -self.alpha0)
        return np.power(np.maximum(x, y), -self.alpha0)

    def draw_given_z2_exceeds(self, t, n, rng):
        u = rng.random((3, n))
        v = _pareto(u[2], self.alpha0)
        shift = 2.0 * v if self.variant == "sum" else v
        s = t - shift
        if self.variant == "min":
            y1 = _pareto_above(s, u[0], self.alpha)
            y2 = _pareto_above(s, u[1], self.alpha)
            w = pareto_survival(s, self.alpha) ** 2
            return y1 + v, np.minimum(y1, y2) + v, w
        y2 = _pareto_above(s, u[1], self.alpha)
        w = pareto_survival(s, self.alpha)
        z1 = _pareto(u[0], self.alpha) + v if self.variant == "plain" else v
        return z1, y2 + shift, w


def _vectorize(func, t, *args):
    t_arr = np.asarray(t, dtype=float)
    out = np.array([func(float(x), *args) for x in t_arr.reshape(-1)])
    return out.reshape(t_arr.shape) if t_arr.ndim else float(out[0])


FAMILIES = {
    cls.key: cls
    for cls in (GaussianCopulaPareto, MarshallOlkinPareto, BernoulliMixture, AdditiveModelC)
}
_ALIASES = {cls.family.lower(): key for key, cls in FAMILIES.items()}
_ALIASES.update({"gaussian": "gauss", "marshall-olkin": "mo", "marshallolkin": "mo", "model_c": "modelc", "c": "modelc"})


def model_from_params(family: str, **params) -> ModelSpec:
    """Build a model from a family key (``gauss``, ``mo``, ``bernoulli``, ``modelc``) and parameters."""
    key = family.lower()
    key = _ALIASES.get(key, key)
    if key not in FAMILIES:
        raise ParameterError(f"unknown model family {family!r}; expected one of {sorted(FAMILIES)}")
    try:
        return FAMILIES[key](**params)
    except TypeError as exc:
        raise ParameterError(f"bad parameters for {family}: {exc}") from None


def theoretical_indices(spec: ModelSpec) -> TheoreticalIndices:
    return spec.indices()


def sample(spec: ModelSpec, n: int, seed: int, stream: int = 0) -> BivariateSample:
    """``n`` iid pairs from ``spec``; identical arguments give identical output."""
    return spec.sample(n, seed, stream)
