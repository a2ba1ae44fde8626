import math

import numpy
import pytest
import scipy.stats

from tempoca import TimeSeriesPanel
from tempoca.errors import DomainError, RankDeficient, SelfTest, TooShort
from tempoca.granger import (
    DEFAULT_ALPHA, f_cdf_complement, granger_test, ols_autoregression, pwgc)


def coupled_pair(n, seed, coupling=lambda x: 0.8 * x):
    """Y_t = 0.5 Y_{t-1} + coupling(X_{t-1}) + e_t with white-noise X."""
    rng = numpy.random.default_rng(seed)
    x = rng.standard_normal(n)
    e = rng.standard_normal(n)
    y = numpy.zeros(n)
    for t in range(1, n):
        y[t] = 0.5 * y[t - 1] + coupling(x[t - 1]) + e[t]
    return TimeSeriesPanel(("X", "Y"), numpy.column_stack([x, y]))


class TestOls:

    def test_exact_fit(self):
        x = numpy.random.default_rng(0).standard_normal(100)
        y = numpy.zeros(100)
        y[1:] = 2.0 * x[:-1]
        panel = TimeSeriesPanel(("x", "y"), numpy.column_stack([x, y]))
        fit = ols_autoregression(panel, 1, [(0, 1)], tau_max=1)
        assert fit.coefficients[1] == pytest.approx(2.0)
        assert fit.coefficients[0] == pytest.approx(0.0, abs=1e-12)
        assert fit.rss == pytest.approx(0.0, abs=1e-16)
        assert fit.m == 99

    def test_rank_deficient(self):
        data = numpy.column_stack([numpy.ones(50),
                                   numpy.random.default_rng(0).standard_normal(50)])
        panel = TimeSeriesPanel(("const", "y"), data)
        with pytest.raises(RankDeficient):
            ols_autoregression(panel, 1, [(0, 1)], tau_max=1)

    def test_lag_out_of_range(self):
        panel = coupled_pair(50, 0)
        with pytest.raises(DomainError):
            ols_autoregression(panel, 1, [(0, 3)], tau_max=2)

    def test_too_short(self):
        panel = coupled_pair(5, 0)
        with pytest.raises(TooShort):
            ols_autoregression(panel, 1, [(0, 1), (0, 2), (1, 1), (1, 2)], tau_max=2)


class TestFCdfComplement:

    def test_reference_value(self):
        assert f_cdf_complement(4.0, 3, 100) == pytest.approx(0.0097, abs=5e-4)

    @pytest.mark.parametrize("d", [1, 3, 10, 57])
    def test_median_of_equal_degrees(self, d):
        assert f_cdf_complement(1.0, d, d) == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize("f", [0.01, 0.5, 1.7, 3.0, 12.0])
    @pytest.mark.parametrize("d1,d2", [(1, 5), (3, 100), (6, 2000)])
    def test_matches_scipy(self, f, d1, d2):
        assert f_cdf_complement(f, d1, d2) == pytest.approx(
            scipy.stats.f.sf(f, d1, d2), rel=1e-9, abs=1e-300)

    def test_bounds(self):
        assert f_cdf_complement(0.0, 3, 10) == 1.0
        assert f_cdf_complement(math.inf, 3, 10) == 0.0

    @pytest.mark.parametrize("f,d1,d2", [
        (-1.0, 3, 10), (math.nan, 3, 10), (1.0, 0, 10), (1.0, 3, 0.5)])
    def test_domain(self, f, d1, d2):
        with pytest.raises(DomainError):
            f_cdf_complement(f, d1, d2)


class TestGrangerTest:

    def test_nested_fits(self):
        test = granger_test(coupled_pair(500, 1), 0, 1, 3)
        assert test.rss_full <= test.rss_reduced
        assert test.f_stat >= 0
        assert 0 <= test.p_value <= 1

    def test_self_test(self):
        with pytest.raises(SelfTest):
            granger_test(coupled_pair(100, 0), 1, 1, 3)

    def test_linear_driver_detected(self):
        detected = sum(granger_test(coupled_pair(4000, seed), 0, 1, 3).p_value
                       < DEFAULT_ALPHA for seed in range(10))
        assert detected >= 9

    def test_quadratic_driver_missed(self):
        detected = sum(
            granger_test(coupled_pair(1000, seed, lambda x: 0.8 * x ** 2),
                         0, 1, 3).p_value < DEFAULT_ALPHA
            for seed in range(40))
        assert detected <= 6

    @pytest.mark.slow
    def test_false_positive_rate(self):
        rejections = 0
        for seed in range(200):
            panel = TimeSeriesPanel(
                ("a", "b"), numpy.random.default_rng(seed).standard_normal((1000, 2)))
            rejections += granger_test(panel, 0, 1, 3).p_value < DEFAULT_ALPHA
            rejections += granger_test(panel, 1, 0, 3).p_value < DEFAULT_ALPHA
        assert abs(rejections / 400 - DEFAULT_ALPHA) <= 0.03


class TestPwgc:

    def test_direction(self):
        graph = pwgc(coupled_pair(2000, 3), alpha=0.001)
        assert graph.directed_edges() == [(0, 1)]
        assert graph.method == "pwgc"
        assert graph.weights == {}

    def test_alpha_domain(self):
        with pytest.raises(DomainError):
            pwgc(coupled_pair(100, 0), alpha=1.0)

    def test_mutual_detection_is_bidirected(self):
        rng = numpy.random.default_rng(0)
        e = rng.standard_normal((2000, 2))
        data = numpy.zeros((2000, 2))
        for t in range(1, 2000):
            data[t, 0] = 0.3 * data[t - 1, 0] + 0.4 * data[t - 1, 1] + e[t, 0]
            data[t, 1] = 0.3 * data[t - 1, 1] + 0.4 * data[t - 1, 0] + e[t, 1]
        graph = pwgc(TimeSeriesPanel(("a", "b"), data))
        assert graph.bidirected_edges() == [(0, 1)]
