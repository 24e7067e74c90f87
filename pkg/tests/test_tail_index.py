"""Hill, Hill-plot, min-transform and L-moment tail indices."""
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from tailcontagion import (
    BernoulliMixture,
    BivariateSample,
    DegenerateDataError,
    GaussianCopulaPareto,
    NonHeavyTailError,
    ParameterError,
)
from tailcontagion.models import make_rng
from tailcontagion.tail_index import (
    default_k,
    hill,
    hill_plot,
    hill_plot_csv,
    lmoment_tail_index,
    min_transform,
)

positive = arrays(np.float64, st.integers(5, 60), elements=st.floats(1e-3, 1e6))


def pareto(alpha, n, seed):
    return make_rng(seed).random(n) ** (-1.0 / alpha)


class TestHill:
    def test_four_points(self):
        assert hill([8, 4, 2, 1], 3).index == pytest.approx(1 / (2 * math.log(2)), rel=1e-15)

    def test_pareto_recovery(self):
        est = hill(pareto(2.0, 10**4, 1), 500)
        assert 1.8 <= est.index <= 2.2
        assert (est.k, est.n, est.method) == (500, 10**4, "hill")

    @pytest.mark.parametrize("k", [1, 4, 0])
    def test_k_range(self, k):
        with pytest.raises(ParameterError):
            hill([8, 4, 2, 1], k)

    def test_nonpositive_data(self):
        with pytest.raises(ParameterError):
            hill([3.0, 2.0, 0.0, 1.0], 2)

    def test_all_equal_top(self):
        with pytest.raises(DegenerateDataError):
            hill([5, 5, 5, 5, 1], 3)

    @given(positive, st.sampled_from([0.01, 0.5, 3.0, 1024.0]))
    def test_scale_invariance(self, data, c):
        k = data.size // 2
        try:
            ref = hill(data, k).index
        except DegenerateDataError:
            return
        # powers of two scale without rounding, other factors within float noise
        rel = 0 if math.log2(c).is_integer() else 1e-12
        assert hill(c * data, k).index == pytest.approx(ref, rel=rel, abs=0)

    @given(positive, st.randoms(use_true_random=False))
    def test_permutation_invariance(self, data, rnd):
        k = max(2, data.size // 3)
        perm = data.copy()
        rnd.shuffle(perm)
        try:
            ref = hill(data, k).index
        except DegenerateDataError:
            return
        assert hill(perm, k).index == ref


class TestHillPlot:
    def test_rows_match_single_calls(self):
        x = pareto(2.0, 2000, 2)
        rows = hill_plot(x, 10, 12)
        assert [k for k, _ in rows] == [10, 11, 12]
        for k, idx in rows:
            assert idx == pytest.approx(hill(x, k).index, rel=1e-12)

    def test_four_points_at_three(self):
        assert hill_plot([8, 4, 2, 1], 2, 3)[-1][1] == pytest.approx(hill([8, 4, 2, 1], 3).index)

    def test_stabilizes_mid_range(self):
        rows = hill_plot(pareto(2.0, 10**4, 3), 200, 1000)
        assert abs(np.median([i for _, i in rows]) - 2.0) < 0.15

    @pytest.mark.parametrize("lo,hi", [(1, 3), (5, 4), (2, 4)])
    def test_bad_range(self, lo, hi):
        with pytest.raises(ParameterError):
            hill_plot([8, 4, 2, 1], lo, hi)

    def test_csv(self):
        text = hill_plot_csv([(2, 1.5), (3, 0.25)])
        assert text.splitlines() == ["k,index", "2,1.5", "3,0.25"]


class TestMinTransform:
    def test_example(self):
        out = min_transform(BivariateSample.from_pairs([(2, 3), (5, 1)]))
        assert out.tolist() == [2.0, 1.0]

    def test_bernoulli_hidden_index(self):
        s = BernoulliMixture(2, 2.5, 4, 0.5).sample(10**4, 4)
        assert abs(hill(min_transform(s), 1000).index - 2.5) < 0.3

    def test_gauss_hidden_index(self):
        s = GaussianCopulaPareto(2, 0.9).sample(10**4, 5)
        assert abs(hill(min_transform(s), 500).index - 4 / 1.9) < 0.35


class TestLMoment:
    @staticmethod
    def gpd_data(xi, k, seed, base=1.0):
        exc = (make_rng(seed).random(k) ** -xi - 1.0) / xi
        return np.concatenate([[base], base + exc])

    def test_gpd_recovery(self):
        est = lmoment_tail_index(self.gpd_data(0.5, 10**4, 6), 10**4)
        assert 1.85 <= est.index <= 2.15
        assert est.method == "lmoment"

    def test_equal_excesses(self):
        with pytest.raises(NonHeavyTailError) as info:
            lmoment_tail_index([1, 3, 3, 3, 3, 3], 5)
        assert info.value.shape == -math.inf

    def test_light_tail_rejected(self):
        # uniform excesses have GPD shape -1
        x = np.concatenate([[0.0], np.linspace(0.001, 1, 1000)])
        with pytest.raises(NonHeavyTailError) as info:
            lmoment_tail_index(x, 1000)
        assert info.value.shape < 0

    def test_shift_invariance(self):
        x = self.gpd_data(0.4, 500, 7)
        a = lmoment_tail_index(x, 300).index
        assert lmoment_tail_index(x + 17.0, 300).index == pytest.approx(a, rel=1e-9)

    @pytest.mark.parametrize("k", [3, 6])
    def test_k_range(self, k):
        with pytest.raises(ParameterError):
            lmoment_tail_index([6, 5, 4, 3, 2, 1], k)


def test_default_k():
    assert default_k(1000) == 100
    assert default_k(687) == 69
    assert default_k(5) == 1


def test_docstring_examples():
    import doctest

    import tailcontagion.tail_index as mod

    assert doctest.testmod(mod).failed == 0
