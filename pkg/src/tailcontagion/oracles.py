"""Ground-truth MME/MES values and limit constants.

Three independent routes are available for each model:

* closed forms (Bernoulli mixture, Marshall-Olkin with ``gamma1 >= gamma2``),
* deterministic quadrature of the joint survival function (copula models and
  the Bernoulli mixture) or of a one-dimensional conditioning on the common
  shock (additive Model C),
* Monte Carlo, either exact sampling conditional on ``Z2 > t`` or plain
  simulation restricted to the exceedances.

Throughout, ``t = VaR_{1-p}(Z2)`` solves ``P(Z2 > t) = p`` and

    MME(p) = E[(Z1 - t)_+ | Z2 > t] = (1/p) int_t^inf P(Z1 > x, Z2 > t) dx
    MES(p) = E[Z1 | Z2 > t]         = (1/p) int_0^inf P(Z1 > x, Z2 > t) dx
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import integrate, optimize

from .errors import InsufficientExceedancesError, ParameterError, UnsupportedModelError
from .models import (
    AdditiveModelC,
    BernoulliMixture,
    GaussianCopulaPareto,
    MarshallOlkinPareto,
    ModelSpec,
    make_rng,
    pareto_excess_mean,
    pareto_partial_mean,
    pareto_survival,
)

MEASURES = ("MME", "MES")

_QUAD_TAIL_REL = 1e-6
_QUAD_EPSREL = 1e-11


class OracleValue(NamedTuple):
    value: float
    error: float


def _check_p(p):
    if not (0.0 < p < 1.0):
        raise ParameterError(f"probability level p must lie in (0, 1), got {p!r}")


def _check_measure(measure):
    m = measure.upper()
    if m not in MEASURES:
        raise ParameterError(f"measure must be MME or MES, got {measure!r}")
    return m


def var_z2(spec: ModelSpec, p: float) -> float:
    """``VaR_{1-p}(Z2)``: the ``t`` with ``P(Z2 > t) = p``.

    Exact for Pareto margins; otherwise a bracketed root search on the exact
    survival function in log scale, relative tolerance 1e-13.
    """
    _check_p(p)
    if isinstance(spec, (GaussianCopulaPareto, MarshallOlkinPareto)):
        return p ** (-1.0 / spec.alpha)
    ind = spec.indices()
    lo = 1.0
    hi = 2.0 * p ** (-1.0 / min(ind.alpha1, ind.beta))
    while spec.survival_z2(hi) >= p:
        hi *= 2.0
    # the survival function is flat at 1 below the support; step up to where it drops
    while spec.survival_z2(lo * 1.01) >= 1.0 and lo * 1.01 < hi:
        lo *= 1.01

    def f(logt):
        return math.log(spec.survival_z2(math.exp(logt))) - math.log(p)

    root = optimize.brentq(f, math.log(lo), math.log(hi), xtol=1e-15, rtol=1e-14, maxiter=500)
    return math.exp(root)


def scaling_factor(spec: ModelSpec, p: float) -> float:
    """``p * b0_inv(b2(1/p)) / b2(1/p)`` with ``b0_inv(t) = 1 / P(min(Z1, Z2) > t)``."""
    t = var_z2(spec, p)
    return p / (t * float(spec.survival_min(t)))


# -- limit constants -------------------------------------------------------

@dataclass(frozen=True)
class LimitConstants:
    """Integrals of the hidden limit measure governing MME/MES growth.

    ``mme_limit`` is ``int_1^inf nu0((x, inf) x (1, inf)) dx`` and
    ``mes_limit`` the same integral from 0; ``mes_limit`` is ``None`` when it
    is not available, with the reason in ``mes_note``.
    """

    mme_limit: float
    mes_limit: float | None
    rv_index_mme: float
    mes_note: str = ""

    def to_dict(self):
        return asdict(self)


def _power_integrals(e):
    """``(int_1^inf x^-e dx, int_0^1 x^-e dx)``."""
    upper = 1.0 / (e - 1.0) if e > 1.0 else math.inf
    lower = 1.0 / (1.0 - e) if e < 1.0 else math.inf
    return upper, lower


def nu0_x_integrals(spec: ModelSpec) -> tuple[float, float]:
    """Closed forms of ``int_1^inf`` and ``int_0^1`` of ``x -> nu0((x, inf) x (1, inf))``."""
    if isinstance(spec, GaussianCopulaPareto):
        return _power_integrals(spec.alpha / (1.0 + spec.rho))
    if isinstance(spec, MarshallOlkinPareto):
        a, g1, g2 = spec.alpha, spec.gamma1, spec.gamma2
        if g1 < g2:
            return _power_integrals(a * (1.0 - g1))
        upper = _power_integrals(a)[0]
        if g1 > g2:
            return upper, math.inf
        return upper, _power_integrals(a * (1.0 - g1))[1]
    if isinstance(spec, AdditiveModelC) and spec.variant == "sum":
        a0 = spec.alpha0
        return 1.0 / (a0 - 1.0), 2.0 ** (a0 - 1.0) + (2.0 ** (a0 - 1.0) - 1.0) / (a0 - 1.0)
    if isinstance(spec, (BernoulliMixture, AdditiveModelC)):
        return 1.0 / (spec.alpha0 - 1.0), 1.0
    raise UnsupportedModelError(f"no hidden limit measure implemented for {spec.family}")


def nu0_rectangle(spec: ModelSpec, x: float, y: float) -> float:
    """Mass of ``(x, inf) x (y, inf)`` under the hidden limit measure."""
    if not (x > 0 and y > 0):
        raise ParameterError("rectangle corners must be positive")
    return float(spec.nu0(x, y))


def limit_constants(spec: ModelSpec) -> LimitConstants:
    upper, lower = nu0_x_integrals(spec)
    rate = spec.indices().mme_rate
    if math.isinf(upper):
        return LimitConstants(math.inf, None, rate, "(B1) fails: the MME limit integral diverges")
    if math.isinf(lower):
        return LimitConstants(upper, None, rate, "(B2) fails: nu0((x, inf) x (1, inf)) is not integrable at 0")
    return LimitConstants(upper, upper + lower, rate)


# -- closed forms ----------------------------------------------------------

def exact_mme(spec: ModelSpec, p: float) -> float:
    _check_p(p)
    if isinstance(spec, MarshallOlkinPareto):
        if spec.gamma1 < spec.gamma2:
            raise UnsupportedModelError("closed-form MME needs gamma1 >= gamma2; use numeric_mme")
        return p ** (1.0 - spec.gamma2 - 1.0 / spec.alpha) / (spec.alpha - 1.0)
    if isinstance(spec, BernoulliMixture):
        a, a0, g, q = spec.alpha, spec.alpha0, spec.gamma, spec.q
        t = var_z2(spec, p)
        denom = q * t**-g + (1 - q) * t**-a0
        num = q / (a - 1) * t ** (-g - a + 1) + (1 - q) / (a0 - 1) * t ** (-a0 + 1)
        return num / denom
    raise UnsupportedModelError(f"no closed-form MME for {spec.family}; use numeric_mme")


def exact_mes(spec: ModelSpec, p: float) -> float:
    _check_p(p)
    if isinstance(spec, BernoulliMixture):
        a, a0, g, q = spec.alpha, spec.alpha0, spec.gamma, spec.q
        t = var_z2(spec, p)
        denom = q * t**-g + (1 - q) * t**-a0
        num = q * a / (a - 1) * t**-g + (1 - q) * a0 / (a0 - 1) * t ** (-a0 + 1)
        return num / denom
    raise UnsupportedModelError(f"no closed-form MES for {spec.family}; use numeric_mes")


def has_exact(spec: ModelSpec, measure: str) -> bool:
    measure = _check_measure(measure)
    if isinstance(spec, BernoulliMixture):
        return True
    return measure == "MME" and isinstance(spec, MarshallOlkinPareto) and spec.gamma1 >= spec.gamma2


# -- quadrature ------------------------------------------------------------

def _log_quad(f, a, b, points=()):
    """``int_a^b f(x) dx`` computed in ``y = log(x / a)``."""
    if b <= a:
        return 0.0, 0.0
    span = math.log(b / a)
    pts = sorted({math.log(x / a) for x in points if a < x < b})

    def g(y):
        x = a * math.exp(y)
        return float(f(x)) * x

    val, err = integrate.quad(g, 0.0, span, points=pts or None, epsabs=0.0,
                              epsrel=_QUAD_EPSREL, limit=500)
    return val, err


def _kinks(spec, t):
    pts = [t]
    if isinstance(spec, MarshallOlkinPareto):
        pts.append(t ** (spec.gamma2 / spec.gamma1))
    return pts


def _survival_integral(spec, t, lower):
    """``int_lower^inf P(Z1 > x, Z2 > t) dx`` with certified truncation."""
    a1 = spec.indices().alpha1

    def f(x):
        return spec.joint_survival(x, t)

    first = 1e3 * max(t, lower)
    v1, e1 = _log_quad(f, lower, first, _kinks(spec, t))
    # P(Z1 > x, Z2 > t) <= P(Z1 > x) <= x^-a1 beyond x >= 1
    cut = (_QUAD_TAIL_REL * v1 * (a1 - 1.0)) ** (-1.0 / (a1 - 1.0))
    v2, e2 = _log_quad(f, first, max(first, cut))
    top = max(first, cut)
    tail_bound = top ** (1.0 - a1) / (a1 - 1.0)
    return v1 + v2, e1 + e2 + tail_bound


def _modelc_expectation(spec: AdditiveModelC, t: float, measure: str):
    """``E[g(Z1) 1{Z2 > t}]`` for Model C by conditioning on the common shock ``V``.

    Given ``V``, the remaining components are independent Pareto variables,
    so the inner expectation is explicit; the outer one is a one-dimensional
    integral over the Pareto(alpha0) law of ``V``.  For ``V`` beyond the
    point where the threshold is crossed for certain, the integral is closed.
    """
    a, a0 = spec.alpha, spec.alpha0
    c = 2.0 if spec.variant == "sum" else 1.0
    mean_y = a / (a - 1.0)
    y1_free = spec.variant in ("plain", "min")

    def tail_moments(v):
        # (E[1{V > v}], E[V 1{V > v}]) for v >= 1
        return v**-a0, a0 / (a0 - 1.0) * v ** (1.0 - a0)

    def inner(v):
        s = t - c * v
        sy = float(pareto_survival(s, a))
        if measure == "MME":
            return float(pareto_excess_mean(s, a)) * sy
        if spec.variant == "min":
            return (float(pareto_partial_mean(s, a)) + v * sy) * sy
        if y1_free:
            return (mean_y + v) * sy
        return v * sy

    if measure == "MME" and not y1_free:
        # (V - t)_+ > 0 forces the Pareto parts over their thresholds
        return _excess_beyond(a0, t), 0.0

    v_hi = (t - 1.0) / c
    if v_hi > 1.0:
        def g(y):
            v = math.exp(y)
            return inner(v) * a0 * math.exp(-a0 * y)

        body, err = integrate.quad(g, 0.0, math.log(v_hi), epsabs=0.0,
                                   epsrel=_QUAD_EPSREL, limit=500)
        v_tail = v_hi
    else:
        body, err, v_tail = 0.0, 0.0, 1.0
    p_tail, m_tail = tail_moments(v_tail)
    # for V > v_tail the remaining Pareto parts exceed their thresholds for certain
    if measure == "MME":
        tail = (mean_y - t) * p_tail + c * m_tail
    else:
        tail = (mean_y * p_tail + m_tail) if y1_free else m_tail
    return body + tail, err


def _excess_beyond(a0, t):
    """``E[(V - t)_+]`` for ``V ~ Pareto(a0)``."""
    return float(pareto_excess_mean(t, a0))


def _quadrature(spec, p, measure):
    t = var_z2(spec, p)
    if isinstance(spec, AdditiveModelC):
        num, err = _modelc_expectation(spec, t, measure)
        return OracleValue(num / p, err / p)
    try:
        spec.joint_survival(t, t)
    except UnsupportedModelError:
        raise
    if measure == "MME":
        num, err = _survival_integral(spec, t, t)
    else:
        # Z1 >= 1, so P(Z1 > x, Z2 > t) = p on [0, 1)
        body, err = _survival_integral(spec, t, 1.0)
        num = p + body
    return OracleValue(num / p, err / p)


# -- Monte Carlo -----------------------------------------------------------

def _montecarlo(spec, p, measure, budget, seed, conditional):
    budget = int(budget)
    if budget < 1:
        raise ParameterError("Monte Carlo budget must be positive")
    t = var_z2(spec, p)
    if conditional:
        z1, _, w = spec.draw_given_z2_exceeds(t, budget, make_rng(seed, 1))
    else:
        s = spec.sample(budget, seed)
        mask = s.z2 > t
        count = int(mask.sum())
        if count < 2:
            raise InsufficientExceedancesError("too few simulated pairs with z2 above the threshold", count)
        z1, w = s.z1[mask], np.ones(count)
    g = np.maximum(z1 - t, 0.0) if measure == "MME" else z1
    wsum = w.sum()
    if wsum <= 0:
        raise InsufficientExceedancesError("all conditional draws carry zero weight", 0)
    est = float(np.dot(w, g) / wsum)
    # delta-method standard error of the self-normalized mean
    se = float(math.sqrt(np.dot(w**2, (g - est) ** 2)) / wsum)
    return OracleValue(est, se)


def _numeric(spec, p, measure, method, budget, seed, conditional):
    _check_p(p)
    if method == "quadrature":
        return _quadrature(spec, p, measure)
    if method == "montecarlo":
        return _montecarlo(spec, p, measure, budget, seed, conditional)
    raise ParameterError(f"unknown method {method!r}; expected quadrature or montecarlo")


def numeric_mme(spec: ModelSpec, p: float, method: str = "quadrature", budget: int = 10**6,
                seed: int = 0, conditional: bool = True) -> OracleValue:
    """MME(p) by quadrature or Monte Carlo, with an error estimate.

    For Monte Carlo, ``conditional=True`` draws all ``budget`` pairs from the
    law given ``Z2 > t``; ``conditional=False`` simulates ``budget`` pairs and
    averages over those with ``z2 > t``.
    """
    return _numeric(spec, p, "MME", method, budget, seed, conditional)


def numeric_mes(spec: ModelSpec, p: float, method: str = "quadrature", budget: int = 10**6,
                seed: int = 0, conditional: bool = True) -> OracleValue:
    return _numeric(spec, p, "MES", method, budget, seed, conditional)


TRUTH_SOURCES = ("exact", "quadrature", "montecarlo")


def reference_value(spec: ModelSpec, measure: str, p: float, source: str | None = None,
                    budget: int = 10**7, seed: int = 0) -> tuple[float, str]:
    """Best available truth for ``measure`` at ``p``: exact, then quadrature, then Monte Carlo."""
    measure = _check_measure(measure)
    order = [source] if source else list(TRUTH_SOURCES)
    for src in order:
        if src == "exact":
            if has_exact(spec, measure):
                f = exact_mme if measure == "MME" else exact_mes
                return f(spec, p), "exact"
            if source:
                raise UnsupportedModelError(f"no closed form for {measure} under {spec.family}")
            continue
        if src in ("quadrature", "montecarlo"):
            try:
                val = _numeric(spec, p, measure, src, budget, seed, True).value
            except UnsupportedModelError:
                if source:
                    raise
                continue
            return val, src
        raise ParameterError(f"unknown truth source {src!r}")
    raise UnsupportedModelError(f"no oracle for {measure} under {spec.family}")


def oracle_record(spec: ModelSpec, p: float, measure: str, method: str, value: float,
                  error: float | None = None) -> dict:
    """JSON-ready description of one oracle evaluation."""
    return {
        "family": spec.family,
        "params": spec.params(),
        "p": p,
        "measure": _check_measure(measure),
        "method": method,
        "value": value,
        "error": error,
    }


# -- Assumption (B) --------------------------------------------------------

@dataclass
class AssumptionBTable:
    """Monte Carlo estimates of the (B1)/(B2) tail integrals on a ``(t, M)`` grid.

    ``b1[i][j]`` estimates ``int_M^inf P(Z1 > xt, Z2 > t) / P(Z1 > t, Z2 > t) dx``
    and ``b2[i][j]`` the same integrand over ``(0, 1/M)``, for ``t = t_grid[i]``
    and ``M = m_grid[j]``.  Rows with fewer than ``min_joint`` joint
    exceedances are flagged.
    """

    t_grid: list[float]
    m_grid: list[float]
    b1: list[list[float]]
    b2: list[list[float]]
    joint_exceedances: list[int]
    flagged: list[bool] = field(default_factory=list)

    def rows(self):
        for i, t in enumerate(self.t_grid):
            for j, m in enumerate(self.m_grid):
                yield {"t": t, "M": m, "b1": self.b1[i][j], "b2": self.b2[i][j],
                       "joint_exceedances": self.joint_exceedances[i], "flagged": self.flagged[i]}

    def _decays(self, col, ratio, growth):
        usable = [i for i, f in enumerate(self.flagged) if not f]
        if not usable:
            return False
        for i in usable:
            vals = np.asarray(col[i])
            if np.any(np.diff(vals) > 1e-12 * np.abs(vals[:-1])):
                return False
        # the limsup over t must stay bounded: at the largest M the column may not grow with t
        first, last = np.asarray(col[usable[0]]), np.asarray(col[usable[-1]])
        if last[-1] > growth * first[-1]:
            return False
        # then the M trend at the largest usable t
        return bool(last[-1] <= ratio * last[0])

    def b1_decays(self, ratio: float = 0.1, growth: float = 1.25) -> bool:
        """Heuristic (B1) check on the table.

        True when every usable row is nonincreasing in M, the largest-M
        entry grows by at most ``growth`` from the smallest to the largest
        usable t, and at the largest usable t it is at most ``ratio`` times
        the smallest-M entry.
        """
        return self._decays(self.b1, ratio, growth)

    def b2_decays(self, ratio: float = 0.1, growth: float = 1.25) -> bool:
        """Same rule as :meth:`b1_decays` on the (B2) column."""
        return self._decays(self.b2, ratio, growth)


DEFAULT_T_GRID = (2.0, 4.0, 8.0, 16.0)
DEFAULT_M_GRID = (1.0, 2.0, 5.0, 10.0, 20.0, 50.0)


def check_assumption_b(spec: ModelSpec, t_grid=DEFAULT_T_GRID, m_grid=DEFAULT_M_GRID,
                       budget: int = 10**6, seed: int = 0, min_joint: int = 30) -> AssumptionBTable:
    t_grid = [float(t) for t in t_grid]
    m_grid = [float(m) for m in m_grid]
    if any(b <= a for a, b in zip(t_grid, t_grid[1:])) or any(b <= a for a, b in zip(m_grid, m_grid[1:])):
        raise ParameterError("t and M grids must be strictly increasing")
    s = spec.sample(budget, seed)
    b1, b2, joint, flagged = [], [], [], []
    for t in t_grid:
        over = s.z2 > t
        x = s.z1[over] / t
        nj = int(np.count_nonzero(x > 1.0))
        joint.append(nj)
        flagged.append(nj < min_joint)
        if nj == 0:
            b1.append([math.nan] * len(m_grid))
            b2.append([math.nan] * len(m_grid))
            continue
        b1.append([float(np.maximum(x - m, 0.0).sum() / nj) for m in m_grid])
        b2.append([float(np.minimum(x, 1.0 / m).sum() / nj) for m in m_grid])
    return AssumptionBTable(t_grid, m_grid, b1, b2, joint, flagged)
