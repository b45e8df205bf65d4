import math
from datetime import date

import numpy as np
import pytest

from diamond_data import DataError, ExternalSeries
from index_forecast import (
    MAX_AR_ORDER,
    MAX_DIFFERENCE,
    fit_ar_diff,
    fit_holt,
    forecast_ar,
    forecast_dates,
    forecast_holt,
    holt_variance_factors,
    select_ar_order,
)
from index_inference import z_value


def _noisy_trend(n=120, seed=3):
    rng = np.random.default_rng(seed)
    return 1000 + np.cumsum(1.5 + rng.normal(0, 2.0, n))


def _holt_process(n, seed, alpha=0.3, beta=0.1, sd=2.0):
    rng = np.random.default_rng(seed)
    level, trend = 1000.0, 1.0
    series = []
    for _ in range(n):
        error = rng.normal(0.0, sd)
        series.append(level + trend + error)
        level, trend = level + trend + alpha * error, trend + alpha * beta * error
    return np.asarray(series)


def _ar1(phi, n, seed):
    rng = np.random.default_rng(seed)
    x = np.zeros(n)
    for t in range(1, n):
        x[t] = phi * x[t - 1] + rng.normal()
    return x


class TestHolt:

    def test_linear_series_is_extrapolated_exactly(self):
        series = 1000.0 + 5.0 * np.arange(20)
        result = forecast_holt(fit_holt(series), h=4)
        np.testing.assert_allclose(result.point, [1100.0, 1105.0, 1110.0, 1115.0], rtol=1e-9)
        np.testing.assert_allclose(result.width, 0.0, atol=1e-6)

    def test_constant_series_is_flat(self):
        result = forecast_holt(fit_holt([1000.0] * 12), h=3)
        np.testing.assert_allclose(result.point, 1000.0, rtol=1e-12)
        np.testing.assert_allclose(result.width, 0.0, atol=1e-6)

    def test_one_step_width(self):
        model = fit_holt(_noisy_trend())
        result = forecast_holt(model, h=4, level=0.8)
        assert result.width[0] == pytest.approx(2 * z_value(0.8) * math.sqrt(model.residual_variance), rel=1e-12)
        assert np.all(np.diff(result.width) > 0)

    def test_variance_factors(self):
        np.testing.assert_allclose(holt_variance_factors(0.5, 0.2, 3), [1.0, 1.36, 1.85], rtol=1e-12)

    def test_residual_variance_uses_n_minus_two(self):
        model = fit_holt(_noisy_trend(40))
        assert model.residual_variance == pytest.approx(model.sse / 38)

    def test_fixed_parameters_are_kept(self):
        model = fit_holt(_noisy_trend(), alpha=0.5, beta=0.2)
        assert (model.alpha, model.beta) == (0.5, 0.2)

    def test_fitted_sse_beats_the_grid(self):
        series = _noisy_trend()
        fitted = fit_holt(series)
        for alpha in (0.1, 0.5, 0.9):
            for beta in (0.1, 0.5, 0.9):
                assert fitted.sse <= fit_holt(series, alpha=alpha, beta=beta).sse + 1e-9

    def test_translation_equivariance(self):
        series = _noisy_trend()
        plain = forecast_holt(fit_holt(series), h=4)
        shifted = forecast_holt(fit_holt(series + 250.0), h=4)
        np.testing.assert_allclose(np.asarray(shifted.point) - 250.0, plain.point, rtol=1e-5)
        np.testing.assert_allclose(shifted.width, plain.width, rtol=1e-3)

    def test_scale_equivariance(self):
        series = _noisy_trend()
        plain = forecast_holt(fit_holt(series), h=4)
        scaled = forecast_holt(fit_holt(series * 3.0), h=4)
        np.testing.assert_allclose(scaled.point, 3.0 * np.asarray(plain.point), rtol=1e-5)
        np.testing.assert_allclose(scaled.width, 3.0 * plain.width, rtol=1e-3)

    def test_too_short(self):
        with pytest.raises(DataError, match="at least 10"):
            fit_holt([1000.0] * 9)

    @pytest.mark.parametrize("alpha", [0.0, 1.2])
    def test_parameter_range(self, alpha):
        with pytest.raises(DataError):
            fit_holt(_noisy_trend(), alpha=alpha)

    def test_regressors_are_not_supported(self):
        other = ExternalSeries("ftse", (date(2022, 1, 3),), (7000.0,))
        with pytest.raises(NotImplementedError):
            fit_holt(_noisy_trend(), regressors=[other])

    @pytest.mark.slow
    def test_recovers_generating_parameters(self):
        model = fit_holt(_holt_process(2000, seed=17))
        assert model.alpha == pytest.approx(0.3, abs=0.1)
        assert model.beta == pytest.approx(0.1, abs=0.1)


class TestAR:

    def test_white_noise_has_no_memory(self):
        series = 1000 + np.random.default_rng(2).normal(0, 1, 400)
        model = fit_ar_diff(series, p=1, d=0)
        assert model.coefficients[0] == pytest.approx(0.0, abs=0.15)

    def test_recovers_phi(self):
        model = fit_ar_diff(_ar1(0.6, 1000, seed=4), p=1, d=0)
        assert model.coefficients[0] == pytest.approx(0.6, abs=0.07)

    def test_random_walk_interval_grows_like_sqrt_h(self):
        series = 1000 + np.cumsum(np.random.default_rng(5).normal(0, 2, 200))
        model = fit_ar_diff(series, p=0, d=1)
        result = forecast_ar(model, h=4)
        np.testing.assert_allclose(np.diff(result.point), model.intercept, rtol=1e-9, atol=1e-9)
        np.testing.assert_allclose(result.width / result.width[0], np.sqrt([1, 2, 3, 4]), rtol=1e-9)
        assert result.width[0] == pytest.approx(2 * z_value(0.8) * math.sqrt(model.innovation_variance))

    def test_forecast_continues_from_the_last_level(self):
        series = _noisy_trend()
        result = forecast_ar(fit_ar_diff(series, p=1, d=1), h=1)
        assert abs(result.point[0] - series[-1]) < 10.0

    def test_translation_equivariance(self):
        series = _noisy_trend()
        plain = forecast_ar(fit_ar_diff(series, 2, 1), h=4)
        shifted = forecast_ar(fit_ar_diff(series + 500.0, 2, 1), h=4)
        np.testing.assert_allclose(np.asarray(shifted.point) - 500.0, plain.point, rtol=1e-9)
        np.testing.assert_allclose(shifted.width, plain.width, rtol=1e-6)

    def test_second_difference(self):
        series = 1000.0 + 0.5 * np.arange(60) ** 2 + np.random.default_rng(8).normal(0, 0.1, 60)
        result = forecast_ar(fit_ar_diff(series, p=1, d=2), h=2)
        expected = 1000.0 + 0.5 * np.array([60, 61]) ** 2
        np.testing.assert_allclose(result.point, expected, rtol=1e-3)

    def test_random_walk_without_intercept_stays_at_the_last_value(self):
        series = _noisy_trend()
        model = fit_ar_diff(series, p=0, d=1, trend="n")
        result = forecast_ar(model, h=4)
        assert model.intercept == 0.0
        assert model.coefficients == ()
        assert result.point == (series[-1],) * 4
        np.testing.assert_allclose(result.width / result.width[0], np.sqrt([1, 2, 3, 4]), rtol=1e-9)
        steps = np.diff(series)
        assert model.innovation_variance == pytest.approx(math.fsum(steps * steps) / len(steps), rel=1e-12)

    def test_intercept_costs_one_parameter(self):
        series = _noisy_trend(200)
        with_drift = fit_ar_diff(series, p=1, d=1, trend="c")
        without = fit_ar_diff(series, p=1, d=1, trend="n")
        assert without.intercept == 0.0
        assert len(without.coefficients) == 1
        assert select_ar_order(series, trend="n").intercept == 0.0
        assert with_drift.aicc != without.aicc

    def test_unknown_trend(self):
        with pytest.raises(DataError, match="trend"):
            fit_ar_diff(_noisy_trend(), trend="ct")

    def test_ar_interval_is_wider_than_holt_on_a_holt_process(self):
        holt_widths, ar_widths = [], []
        for seed in range(10):
            series = _holt_process(500, seed=seed)
            holt_widths.append(forecast_holt(fit_holt(series), h=4).width[3])
            ar_widths.append(forecast_ar(fit_ar_diff(series, p=1, d=1), h=4).width[3])
        assert np.mean(ar_widths) > np.mean(holt_widths)
        assert sum(a > b for a, b in zip(ar_widths, holt_widths)) >= 7

    def test_too_short(self):
        with pytest.raises(DataError, match="needs 20 points"):
            fit_ar_diff(_noisy_trend(15), p=2, d=1)

    def test_orders_out_of_range(self):
        with pytest.raises(DataError):
            fit_ar_diff(_noisy_trend(), p=MAX_AR_ORDER + 1)
        with pytest.raises(DataError):
            fit_ar_diff(_noisy_trend(), d=MAX_DIFFERENCE + 1)

    def test_selection_minimises_aicc(self):
        series = _noisy_trend(200)
        best = select_ar_order(series)
        for d in range(MAX_DIFFERENCE + 1):
            for p in range(MAX_AR_ORDER + 1):
                assert best.aicc <= fit_ar_diff(series, p, d).aicc

    def test_regressors_are_not_supported(self):
        other = ExternalSeries("ftse", (date(2022, 1, 3),), (7000.0,))
        with pytest.raises(NotImplementedError):
            fit_ar_diff(_noisy_trend(), regressors=[other])


def test_forecast_dates():
    assert forecast_dates(date(2022, 1, 3), 3) == [date(2022, 1, 10), date(2022, 1, 17), date(2022, 1, 24)]


def test_result_frame():
    dates = forecast_dates(date(2022, 1, 3), 2)
    frame = forecast_holt(fit_holt(_noisy_trend()), h=2, dates=dates).to_frame()
    assert list(frame.columns) == ["date", "point", "lower", "upper", "method", "level"]
    assert frame["date"].tolist() == ["2022-01-10", "2022-01-17"]
    assert (frame["lower"] < frame["upper"]).all()


def test_horizon_must_be_positive():
    with pytest.raises(DataError):
        forecast_holt(fit_holt(_noisy_trend()), h=0)
