import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from blendloop.errors import DegenerateSeriesError, InsufficientDataError, InvalidInputError
from blendloop.process import Ar1Model
from blendloop.timeseries import (
    acf,
    ar1_residuals,
    correlogram,
    df_critical_value,
    dickey_fuller,
    estimate_ar1,
    jarque_bera,
    moments,
    simulate_ar1,
)

ALTERNATING_12 = [1.0, -1.0] * 6


class TestSimulate:
    def test_zero_innovation_stays_at_mean(self):
        xs = simulate_ar1(Ar1Model(10, 0.7, 0), 5, np.random.default_rng(0))
        assert xs.tolist() == [10] * 5

    def test_starts_at_mean(self):
        xs = simulate_ar1(Ar1Model(10, 0.7, 1), 50, np.random.default_rng(3))
        assert xs[0] == 10.0 and xs.size == 50

    def test_seed_42_hand_unrolled(self):
        # draws from default_rng(42): 0.30471707975443135, -1.0399841062404955
        # X1 = 0, X2 = 0.5*0 + d1, X3 = 0.5*X2 + d2
        xs = simulate_ar1(Ar1Model(0, 0.5, 1), 3, np.random.default_rng(42))
        assert xs.tolist() == pytest.approx([0.0, 0.30471707975443135, -0.8876255663632798], abs=1e-15)

    def test_deterministic(self):
        m = Ar1Model(10, 0.7, 1)
        a = simulate_ar1(m, 100, np.random.default_rng(9))
        b = simulate_ar1(m, 100, np.random.default_rng(9))
        assert a.tobytes() == b.tobytes()


class TestEstimate:
    def test_table1_matches_regression_oracle(self, table1):
        # values from statsmodels OLS of X_i on (1, X_{i-1})
        fit = estimate_ar1(table1)
        assert fit.n_used == 49
        assert fit.phi_hat == pytest.approx(0.7839703662340397, abs=1e-12)
        assert fit.intercept_hat == pytest.approx(1.9893090562238762, abs=1e-10)
        assert fit.se_phi == pytest.approx(0.09866482833170431, abs=1e-12)
        assert fit.sigma_v_hat == pytest.approx(1.0080194928650503, abs=1e-12)
        assert fit.mu_hat == pytest.approx(fit.intercept_hat / (1 - fit.phi_hat))
        assert fit.t_phi == pytest.approx(fit.phi_hat / fit.se_phi)

    def test_independent_normal_equations(self, rng):
        xs = simulate_ar1(Ar1Model(5, 0.4, 2), 300, rng)
        lag, cur = xs[:-1], xs[1:]
        slope = np.sum((lag - lag.mean()) * (cur - cur.mean())) / np.sum((lag - lag.mean()) ** 2)
        fit = estimate_ar1(xs)
        assert fit.phi_hat == pytest.approx(slope, abs=1e-12)
        assert fit.intercept_hat == pytest.approx(cur.mean() - slope * lag.mean(), abs=1e-10)

    def test_constant_series_rejected(self):
        with pytest.raises(DegenerateSeriesError):
            estimate_ar1([10.0] * 20)

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            estimate_ar1([1.0, 2.0])

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_consistency(self, seed):
        xs = simulate_ar1(Ar1Model(10, 0.7, 1), 100_000, np.random.default_rng(seed))
        fit = estimate_ar1(xs)
        assert abs(fit.phi_hat - 0.7) < 0.01
        assert abs(fit.mu_hat - 10) < 0.05


class TestResiduals:
    def test_deterministic_input_gives_zero_residuals(self):
        xs = 10 + 4 * 0.5 ** np.arange(20)
        fit = estimate_ar1(xs)
        assert np.allclose(ar1_residuals(xs, fit), 0, atol=1e-9)

    def test_orthogonality_on_table1(self, table1):
        fit = estimate_ar1(table1)
        r = ar1_residuals(table1, fit)
        assert r.size == 49
        assert abs(r.mean()) < 1e-9
        assert abs(np.dot(r - r.mean(), table1[:-1] - table1[:-1].mean())) < 1e-9

    def test_matches_literal_intercept_form(self, table1):
        fit = estimate_ar1(table1)
        literal = table1[1:] - fit.phi_hat * table1[:-1] - fit.intercept_hat
        assert np.allclose(ar1_residuals(table1, fit), literal, atol=1e-12)

    def test_white_noise_residuals_are_centred_input(self, rng):
        xs = rng.standard_normal(20_000)
        fit = estimate_ar1(xs)
        r = ar1_residuals(xs, fit)
        assert np.max(np.abs(r - (xs[1:] - xs.mean()))) < 0.1

    def test_length_mismatch(self, table1):
        fit = estimate_ar1(table1)
        with pytest.raises(InvalidInputError):
            ar1_residuals(table1[:-1], fit)


class TestMoments:
    def test_examples(self):
        assert moments([16, 16, 16])[:2] == (16, 0)
        m, v, _, _ = moments([1, 2, 3, 4])
        assert m == 2.5 and v == pytest.approx(5 / 3)
        assert moments(ALTERNATING_12)[2] == 0

    def test_single_value(self):
        with pytest.raises(InsufficientDataError):
            moments([1.0])

    def test_against_scipy(self, rng):
        from scipy import stats

        xs = rng.gamma(2.0, size=500)
        _, v, s, k = moments(xs)
        assert v == pytest.approx(np.var(xs, ddof=1))
        assert s == pytest.approx(stats.skew(xs))
        assert k == pytest.approx(stats.kurtosis(xs, fisher=False))


class TestJarqueBera:
    def test_alternating(self):
        jb = jarque_bera(ALTERNATING_12)
        assert jb.skewness == 0 and jb.kurtosis == pytest.approx(1)
        assert jb.jb_stat == pytest.approx(2.0, abs=1e-9)
        assert jb.p_value == pytest.approx(math.exp(-1), abs=1e-9)

    def test_against_scipy_on_table1_residuals(self, table1):
        from scipy import stats

        r = ar1_residuals(table1, estimate_ar1(table1))
        ref = stats.jarque_bera(r)
        jb = jarque_bera(r)
        assert jb.jb_stat == pytest.approx(ref.statistic, rel=1e-10)
        assert jb.p_value == pytest.approx(ref.pvalue, rel=1e-10)

    def test_constant(self):
        with pytest.raises(DegenerateSeriesError):
            jarque_bera([3.0] * 10)

    @given(arrays(float, st.integers(8, 60), elements=st.floats(-100, 100)))
    def test_p_value_is_decreasing_function_of_stat(self, xs):
        if np.ptp(xs) < 1e-6:
            return
        jb = jarque_bera(xs)
        assert jb.jb_stat >= 0
        assert jb.p_value == pytest.approx(math.exp(-jb.jb_stat / 2))

    def test_zero_stat_iff_normal_moments(self):
        # symmetric with kurtosis exactly 3: values {-a, 0, a} in proportions giving m4/m2^2 = 3
        xs = [-1.0] * 1 + [0.0] * 4 + [1.0] * 1
        jb = jarque_bera(xs * 2)
        assert jb.skewness == 0 and jb.kurtosis == pytest.approx(3)
        assert jb.jb_stat == pytest.approx(0, abs=1e-12)


class TestCorrelogram:
    def test_table1_against_statsmodels(self, table1):
        from statsmodels.tsa.stattools import acf as sm_acf, pacf as sm_pacf

        r, p, band = correlogram(table1, 5)
        assert np.allclose(r, sm_acf(table1, nlags=5), atol=1e-12)
        assert np.allclose(p, sm_pacf(table1, nlags=5, method="ldb"), atol=1e-12)
        assert band == pytest.approx(1.96 / math.sqrt(50))

    def test_lag_zero_and_first_partial(self, rng):
        xs = rng.standard_normal(40)
        r, p, _ = correlogram(xs, 10)
        assert r[0] == 1 and p[1] == r[1]
        assert np.all(np.abs(r) <= 1)

    def test_max_lag_too_large(self):
        with pytest.raises(InvalidInputError):
            correlogram(np.arange(10.0), 5)

    def test_constant(self):
        with pytest.raises(DegenerateSeriesError):
            acf([1.0] * 10, 2)


class TestDickeyFuller:
    def test_table1_against_statsmodels(self, table1):
        # Independent oracle: statsmodels adfuller(maxlag=0, regression="c") gives
        # t = -2.18953; the series does NOT reject a unit root at 5%.
        res = dickey_fuller(table1)
        assert res.t_stat == pytest.approx(-2.1895303262443564, abs=1e-10)
        assert res.critical_5pct == pytest.approx(-2.92)
        assert res.reject_unit_root is False

    def test_critical_value_interpolation(self):
        assert df_critical_value(50) == pytest.approx(-2.92)
        assert df_critical_value(10**9) == pytest.approx(-2.86, abs=1e-6)
        assert df_critical_value(100) == pytest.approx(-2.89)

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            dickey_fuller(np.arange(9.0))

    def test_flag_consistent_with_statistic(self, rng):
        xs = simulate_ar1(Ar1Model(0, 0.3, 1), 200, rng)
        res = dickey_fuller(xs)
        assert res.reject_unit_root == (res.t_stat < res.critical_5pct)
