#!/usr/bin/env python3
"""
Short-horizon forecasts of the index: Holt's linear-trend exponential
smoothing and an autoregression on the differenced series.
"""

import logging
import math
from dataclasses import dataclass
from datetime import date
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import minimize
from statsmodels.tsa.ar_model import AutoReg
from statsmodels.tsa.arima_process import arma2ma

from diamond_data import DataError, ExternalSeries
from index_inference import z_value

logger = logging.getLogger(__name__)

MIN_HOLT_LENGTH = 10
GRID = np.round(np.arange(1, 21) * 0.05, 2)
PARAM_FLOOR = 1e-6
MAX_AR_ORDER = 5
MAX_DIFFERENCE = 2
AR_TRENDS = ("c", "n")


@dataclass(frozen=True)
class HoltModel:
    alpha: float
    beta: float
    level: float
    trend: float
    residual_variance: float
    sse: float
    n: int


@dataclass(frozen=True)
class ARModel:
    """AR(p), with or without intercept, on the d-times differenced series."""
    p: int
    d: int
    coefficients: Tuple[float, ...]
    intercept: float
    innovation_variance: float
    tail: Tuple[float, ...]
    aicc: Optional[float] = None
    trend: str = "c"


@dataclass(frozen=True)
class ForecastResult:
    method: str
    level: float
    point: Tuple[float, ...]
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    dates: Tuple[date, ...] = ()

    @property
    def horizon(self) -> int:
        return len(self.point)

    @property
    def width(self) -> np.ndarray:
        return np.asarray(self.upper) - np.asarray(self.lower)

    def to_frame(self) -> pd.DataFrame:
        dates = [d.isoformat() for d in self.dates] if self.dates else [""] * self.horizon
        return pd.DataFrame({"date": dates, "point": self.point, "lower": self.lower,
                             "upper": self.upper, "method": self.method, "level": self.level})


def _as_array(series: Sequence[float]) -> np.ndarray:
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or not np.all(np.isfinite(x)):
        raise DataError("series must be a one-dimensional sequence of finite values")
    return x


def _reject_regressors(regressors: Optional[Sequence[ExternalSeries]]) -> None:
    if regressors:
        raise NotImplementedError("forecasting with external index regressors is not available")


# ===== Holt =====

def holt_filter(x: np.ndarray, alpha: float, beta: float) -> Tuple[float, float, float]:
    """
    Run the level/trend recursions and return (level, trend, SSE).

    Starts from l_1 = x_1, b_1 = x_2 - x_1; one-step errors are collected from
    the third observation on.
    """
    level = x[1]
    trend = x[1] - x[0]
    sse = 0.0
    for value in x[2:]:
        forecast = level + trend
        error = value - forecast
        sse += error * error
        new_level = alpha * value + (1.0 - alpha) * forecast
        trend = beta * (new_level - level) + (1.0 - beta) * trend
        level = new_level
    return level, trend, sse


def fit_holt(series: Sequence[float], alpha: Optional[float] = None, beta: Optional[float] = None,
             regressors: Optional[Sequence[ExternalSeries]] = None) -> HoltModel:
    """
    Fit Holt's linear-trend method by minimising the one-step SSE.

    A 0.05 grid over (0, 1]^2 picks the start; Nelder-Mead refines it to
    1e-4. The objective is divided by the best grid SSE so the search path is
    the same for any rescaling of the series.

    Args:
        series: index values, oldest first, at least 10
        alpha (float): fix the level parameter instead of estimating it
        beta (float): fix the trend parameter instead of estimating it
        regressors: reserved for external index series; must be empty

    Returns:
        HoltModel
    """
    _reject_regressors(regressors)
    x = _as_array(series)
    if len(x) < MIN_HOLT_LENGTH:
        raise DataError(f"Holt fit needs at least {MIN_HOLT_LENGTH} points, got {len(x)}")
    for name, value in (("alpha", alpha), ("beta", beta)):
        if value is not None and not 0.0 < value <= 1.0:
            raise DataError(f"{name} must lie in (0, 1]")

    alphas = [alpha] if alpha is not None else GRID
    betas = [beta] if beta is not None else GRID
    best = None
    for a in alphas:
        for b in betas:
            sse = holt_filter(x, a, b)[2]
            if best is None or sse < best[2]:
                best = (a, b, sse)
    a, b, grid_sse = best

    free = [alpha is None, beta is None]
    if any(free) and grid_sse > 0:
        def objective(theta: np.ndarray) -> float:
            params = iter(theta)
            trial_a = next(params) if free[0] else alpha
            trial_b = next(params) if free[1] else beta
            return holt_filter(x, trial_a, trial_b)[2] / grid_sse

        start = [v for v, f in zip((a, b), free) if f]
        result = minimize(objective, start, method="Nelder-Mead",
                          bounds=[(PARAM_FLOOR, 1.0)] * len(start),
                          options={"xatol": 1e-4, "fatol": 1e-12})
        if result.fun < 1.0:
            params = iter(result.x)
            a = float(next(params)) if free[0] else a
            b = float(next(params)) if free[1] else b

    level, trend, sse = holt_filter(x, a, b)
    model = HoltModel(alpha=float(a), beta=float(b), level=float(level), trend=float(trend),
                      residual_variance=sse / (len(x) - 2), sse=sse, n=len(x))
    logger.info("Holt fit: alpha=%.4f beta=%.4f residual sd=%.4g", model.alpha, model.beta,
                math.sqrt(model.residual_variance))
    return model


def holt_variance_factors(alpha: float, beta: float, h: int) -> np.ndarray:
    """v_k = 1 + sum_{j=1}^{k-1} (alpha + j * alpha * beta)^2 for k = 1..h."""
    terms = [(alpha + j * alpha * beta) ** 2 for j in range(1, h)]
    return 1.0 + np.concatenate([[0.0], np.cumsum(terms)])


def forecast_holt(model: HoltModel, h: int = 4, level: float = 0.80,
                  dates: Sequence[date] = ()) -> ForecastResult:
    """
    Point forecasts l + k*b with intervals z * sqrt(sigma^2 * v_k).

    Args:
        model (HoltModel): fitted model
        h (int): horizon
        level (float): interval coverage, 0.80 by default
        dates: optional forecast dates

    Returns:
        ForecastResult
    """
    if h < 1:
        raise DataError("forecast horizon must be at least 1")
    steps = np.arange(1, h + 1)
    point = model.level + steps * model.trend
    half = z_value(level) * np.sqrt(model.residual_variance * holt_variance_factors(model.alpha, model.beta, h))
    return ForecastResult(method="holt", level=level, point=tuple(point), lower=tuple(point - half),
                          upper=tuple(point + half), dates=tuple(dates))


# ===== AR on differences =====

def _aicc(sigma2: float, n: int, k: int) -> float:
    if n - k - 1 <= 0 or sigma2 <= 0:
        return math.inf
    return n * math.log(sigma2) + 2 * k + 2 * k * (k + 1) / (n - k - 1)


def fit_ar_diff(series: Sequence[float], p: int = 1, d: int = 1, trend: str = "c",
                regressors: Optional[Sequence[ExternalSeries]] = None) -> ARModel:
    """
    Conditional least-squares AR(p) on the d-differenced series.

    Args:
        series: index values, oldest first
        p (int): AR order, 0..5
        d (int): differencing order, 0..2
        trend (str): "c" fits an intercept (drift after differencing), "n" fits none
        regressors: reserved for external index series; must be empty

    Returns:
        ARModel
    """
    _reject_regressors(regressors)
    if not 0 <= p <= MAX_AR_ORDER or not 0 <= d <= MAX_DIFFERENCE:
        raise DataError(f"AR order must satisfy p <= {MAX_AR_ORDER}, d <= {MAX_DIFFERENCE}")
    if trend not in AR_TRENDS:
        raise DataError(f"AR trend must be one of {', '.join(AR_TRENDS)}, got {trend!r}")
    x = _as_array(series)
    y = np.diff(x, n=d) if d else x
    needed = max(10 * p, p + 3)
    if len(y) < needed:
        raise DataError(f"AR({p}) on {d}-differenced data needs {needed} points after differencing, got {len(y)}")

    if p == 0 and trend == "n":
        # nothing to estimate: y is white noise around zero
        params, sigma2, nobs = np.array([]), math.fsum(y * y) / len(y), len(y)
    else:
        result = AutoReg(y, lags=p, trend=trend).fit()
        params, sigma2, nobs = np.asarray(result.params, dtype=float), float(result.sigma2), int(result.nobs)
    intercept, phi = (float(params[0]), params[1:]) if trend == "c" else (0.0, params)
    n_params = p + (1 if trend == "c" else 0) + 1
    model = ARModel(p=p, d=d, coefficients=tuple(float(c) for c in phi), intercept=intercept,
                    innovation_variance=sigma2, tail=tuple(float(v) for v in x[-(p + d):]) if p + d else (),
                    aicc=_aicc(sigma2, nobs, n_params), trend=trend)
    logger.info("AR(%d) on %d-differenced series: phi=%s sigma^2=%.4g", p, d, model.coefficients, sigma2)
    return model


def select_ar_order(series: Sequence[float], trend: str = "c") -> ARModel:
    """Minimum-AICc model over p <= 5, d <= 2 (orders the series is too short for are skipped)."""
    best = None
    for d in range(MAX_DIFFERENCE + 1):
        for p in range(MAX_AR_ORDER + 1):
            try:
                model = fit_ar_diff(series, p, d, trend)
            except DataError:
                continue
            if best is None or model.aicc < best.aicc:
                best = model
    if best is None:
        raise DataError("series too short for any AR model")
    logger.info("Selected AR(%d) with d=%d (AICc %.3f)", best.p, best.d, best.aicc)
    return best


def forecast_ar(model: ARModel, h: int = 4, level: float = 0.80,
                dates: Sequence[date] = ()) -> ForecastResult:
    """
    Iterate the AR recursion on the differenced scale and integrate d times.

    Interval variance accumulates through the psi-weights of
    phi(B) (1 - B)^d, i.e. sigma^2 * sum_{j<k} psi_j^2 at step k.
    """
    if h < 1:
        raise DataError("forecast horizon must be at least 1")
    tail = np.asarray(model.tail, dtype=float)
    # the last p differenced values plus the last level of each lower difference order
    levels: List[np.ndarray] = [tail]
    for _ in range(model.d):
        levels.append(np.diff(levels[-1]))
    history = list(levels[-1][-model.p:]) if model.p else []
    phi = np.asarray(model.coefficients, dtype=float)

    diffs = []
    for _ in range(h):
        recent = history[::-1][:model.p]
        value = model.intercept + float(np.dot(phi, recent)) if model.p else model.intercept
        diffs.append(value)
        history.append(value)
    path = np.asarray(diffs)
    for order in range(model.d - 1, -1, -1):
        path = levels[order][-1] + np.cumsum(path)

    ar_poly = np.array([1.0])
    if model.p:
        ar_poly = np.concatenate([[1.0], -phi])
    for _ in range(model.d):
        ar_poly = np.convolve(ar_poly, [1.0, -1.0])
    psi = arma2ma(ar_poly, np.array([1.0]), lags=h)
    sd = np.sqrt(model.innovation_variance * np.cumsum(psi ** 2))
    half = z_value(level) * sd
    return ForecastResult(method="ar", level=level, point=tuple(path), lower=tuple(path - half),
                          upper=tuple(path + half), dates=tuple(dates))


def forecast_dates(last: date, h: int, interval_days: int = 7) -> List[date]:
    return [d.date() for d in pd.date_range(start=last, periods=h + 1, freq=f"{interval_days}D")[1:]]


def main():
    """Forecast a noisy trending series four steps ahead with both methods."""
    rng = np.random.default_rng(3)
    series = 1000 + np.cumsum(1.5 + rng.normal(0, 2.0, 120))
    holt = forecast_holt(fit_holt(series), 4)
    ar = forecast_ar(fit_ar_diff(series, 1, 1), 4)
    print(holt.to_frame().to_string(index=False))
    print(ar.to_frame().to_string(index=False))


if __name__ == "__main__":
    main()
