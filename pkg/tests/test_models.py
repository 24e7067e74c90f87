"""Samplers, margins and the limit measure of the four model families."""
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import ks_2samp, spearmanr

from tailcontagion import (
    AdditiveModelC,
    BernoulliMixture,
    BivariateSample,
    GaussianCopulaPareto,
    MarshallOlkinPareto,
    ParameterError,
    aggregate_system,
    model_from_params,
    sample,
    theoretical_indices,
)
from tailcontagion.models import pareto_sum_survival

SPECS = [
    GaussianCopulaPareto(2.0, 0.9),
    GaussianCopulaPareto(2.0, -0.3),
    MarshallOlkinPareto(2.0, 0.8, 0.7),
    MarshallOlkinPareto(2.5, 0.8, 0.8),
    BernoulliMixture(2.0, 2.5, 4.0, 0.5),
    AdditiveModelC(1.5, 2.0),
    AdditiveModelC(2.0, 2.5, "min"),
    AdditiveModelC(2.0, 2.5, "sum"),
    AdditiveModelC(2.0, 2.5, "max"),
]
IDS = [f"{s.key}-{i}" for i, s in enumerate(SPECS)]


class TestTheoreticalIndices:
    def test_gauss_hidden_index(self):
        assert theoretical_indices(GaussianCopulaPareto(2, 0.9)).alpha0 == pytest.approx(4 / 1.9)

    def test_mo_hidden_index(self):
        ind = theoretical_indices(MarshallOlkinPareto(2, 0.8, 0.7))
        assert (ind.alpha1, ind.beta, ind.alpha0) == (2, 2, pytest.approx(2.6))

    def test_independent_gauss(self):
        assert theoretical_indices(GaussianCopulaPareto(2, 0.0)).alpha0 == pytest.approx(4.0)

    def test_bernoulli(self):
        ind = theoretical_indices(BernoulliMixture(2, 2.5, 4, 0.5))
        assert (ind.alpha1, ind.beta, ind.alpha0) == (2, 2.5, 2.5)

    @pytest.mark.parametrize("spec", SPECS, ids=IDS)
    def test_ordering(self, spec):
        ind = spec.indices()
        assert ind.alpha <= ind.beta <= ind.alpha0


class TestValidation:
    @pytest.mark.parametrize("build", [
        lambda: GaussianCopulaPareto(1.0, 0.5),
        lambda: GaussianCopulaPareto(2.0, 1.0),
        lambda: MarshallOlkinPareto(2.0, 1.0, 0.5),
        lambda: MarshallOlkinPareto(2.0, 0.5, 0.0),
        lambda: BernoulliMixture(2.0, 3.5, 4.0, 0.5),   # alpha0 >= 1 + alpha
        lambda: BernoulliMixture(2.0, 2.5, 2.4, 0.5),   # gamma <= alpha0
        lambda: BernoulliMixture(2.0, 2.5, 4.0, 1.0),
        lambda: AdditiveModelC(2.0, 3.0),
        lambda: AdditiveModelC(2.0, 2.5, "median"),
    ])
    def test_rejects(self, build):
        with pytest.raises(ParameterError):
            build()

    def test_zero_n(self):
        with pytest.raises(ParameterError):
            GaussianCopulaPareto(2, 0.5).sample(0, 1)

    def test_unknown_family(self):
        with pytest.raises(ParameterError):
            model_from_params("clayton", alpha=2)

    def test_from_params(self):
        spec = model_from_params("mo", alpha=2, gamma1=0.8, gamma2=0.7)
        assert spec.params() == MarshallOlkinPareto(2, 0.8, 0.7).params()


class TestSampleType:
    def test_rejects_negative_and_nonfinite(self):
        with pytest.raises(ParameterError):
            BivariateSample([1.0, -1.0], [1.0, 1.0])
        with pytest.raises(ParameterError):
            BivariateSample([1.0, np.inf], [1.0, 1.0])
        with pytest.raises(ParameterError):
            BivariateSample([], [])

    def test_pairs_roundtrip(self):
        s = BivariateSample.from_pairs([(1, 2), (3, 4)])
        assert s.pairs == [(1.0, 2.0), (3.0, 4.0)]
        assert s.swapped().pairs == [(2.0, 1.0), (4.0, 3.0)]


class TestAggregate:
    s = BivariateSample.from_pairs([(2, 3)])

    @pytest.mark.parametrize("mode,expected", [("sum", (2, 5)), ("min", (2, 2)), ("max", (2, 3))])
    def test_examples(self, mode, expected):
        assert aggregate_system(self.s, mode).pairs == [expected]

    def test_bad_mode(self):
        with pytest.raises(ParameterError):
            aggregate_system(self.s, "mean")

    def test_max_dominates_min(self):
        s = GaussianCopulaPareto(2, 0.3).sample(1000, 5)
        assert np.all(aggregate_system(s, "max").z2 >= aggregate_system(s, "min").z2)
        assert aggregate_system(s, "sum").n == s.n


@pytest.mark.parametrize("spec", SPECS, ids=IDS)
def test_seed_determinism(spec):
    a, b = sample(spec, 500, 11), sample(spec, 500, 11)
    assert a == b
    assert a != sample(spec, 500, 12)
    assert a != spec.sample(500, 11, stream=1)


@pytest.mark.parametrize("spec", SPECS, ids=IDS)
def test_marginal_dkw_band(spec):
    """Empirical margins stay inside the 99.9% DKW band around the model survival."""
    n = 10**5
    s = spec.sample(n, 2024)
    band = 2 * math.sqrt(math.log(2 / 0.001) / (2 * n))
    for data, surv in ((s.z1, spec.survival_z1), (s.z2, spec.survival_z2)):
        grid = np.quantile(data, np.linspace(0.005, 0.995, 120))
        emp = np.searchsorted(np.sort(data), grid, side="right") / n
        assert np.max(np.abs(emp - (1.0 - np.asarray(surv(grid))))) < band


def test_bernoulli_diagonal_fraction():
    s = BernoulliMixture(2, 2.5, 4, 0.5).sample(10**5, 3)
    assert abs(np.mean(s.z1 == s.z2) - 0.5) < 0.01


def test_bernoulli_off_diagonal_uncorrelated():
    s = BernoulliMixture(2, 2.5, 4, 0.5).sample(10**5, 4)
    off = s.z1 != s.z2
    assert abs(spearmanr(s.z1[off], s.z2[off])[0]) < 0.02


def test_gauss_probability_integral_transform():
    s = GaussianCopulaPareto(2, 0.5).sample(10**5, 5)
    assert abs(np.mean(s.z1**-2.0) - 0.5) < 0.01


def test_gauss_margins_exchangeable():
    s = GaussianCopulaPareto(2, 0.7).sample(10**5, 6)
    assert ks_2samp(s.z1, s.z2).pvalue > 0.001


def test_mo_joint_tail():
    """P(Z1 > 5, Z2 > 5) equals 5^-2.6 exactly for this MO model."""
    n, t = 10**6, 5.0
    s = MarshallOlkinPareto(2, 0.8, 0.7).sample(n, 7)
    prob = t**-2.6
    est = np.mean((s.z1 > t) & (s.z2 > t))
    se = math.sqrt(prob * (1 - prob) / n)
    assert abs(est - prob) < 4 * se
    assert est * t**2.6 == pytest.approx(1.0, abs=0.04)


@pytest.mark.parametrize("spec", SPECS[:5], ids=IDS[:5])
def test_joint_survival_matches_frequency(spec):
    s = spec.sample(2 * 10**5, 8)
    for x, y in ((1.5, 2.0), (3.0, 3.0), (2.0, 6.0)):
        prob = float(spec.joint_survival(x, y))
        est = np.mean((s.z1 > x) & (s.z2 > y))
        assert abs(est - prob) < 5 * math.sqrt(prob * (1 - prob) / s.n) + 1e-6


@pytest.mark.parametrize("spec", SPECS, ids=IDS)
def test_min_survival_matches_frequency(spec):
    s = spec.sample(2 * 10**5, 9)
    m = np.minimum(s.z1, s.z2)
    for t in (2.5, 4.0):
        prob = float(spec.survival_min(t))
        assert abs(np.mean(m > t) - prob) < 5 * math.sqrt(prob * (1 - prob) / s.n) + 1e-9


@pytest.mark.parametrize("spec", SPECS, ids=IDS)
@given(x=st.floats(0.05, 20), y=st.floats(0.05, 20), c=st.floats(0.1, 10))
def test_nu0_homogeneity(spec, x, y, c):
    a0 = spec.indices().alpha0
    assert float(spec.nu0(c * x, c * y)) == pytest.approx(c**-a0 * float(spec.nu0(x, y)), rel=1e-11)


@pytest.mark.parametrize("spec", SPECS, ids=IDS)
def test_nu0_unit_rectangle(spec):
    assert float(spec.nu0(1.0, 1.0)) == pytest.approx(1.0)


class TestParetoSum:
    @staticmethod
    def reference(t, a, b, c):
        mpmath.mp.dps = 40
        t, a, b, c = map(mpmath.mpf, (t, a, b, c))
        upper = (t - 1) / c
        body = mpmath.quad(lambda x: (t - c * x) ** -a * b * x ** (-b - 1), [1, upper / 2, upper])
        return float(body + upper**-b)

    @pytest.mark.parametrize("t,a,b,c", [(3.0, 1.5, 2.0, 1.0), (50.0, 1.5, 2.0, 1.0),
                                         (1e4, 2.0, 2.5, 2.0), (1e7, 1.5, 2.0, 1.0), (10.0, 3.0, 1.2, 0.5)])
    def test_against_mpmath(self, t, a, b, c):
        assert pareto_sum_survival(t, a, b, c) == pytest.approx(self.reference(t, a, b, c), rel=1e-10)

    def test_below_support(self):
        assert pareto_sum_survival(1.9, 2.0, 2.0) == 1.0
