"""
AR(1) simulation and estimation plus the diagnostics run on the raw-flour
series before charting it: correlogram, Dickey-Fuller and Jarque-Bera.

Series are plain 1-d float arrays.  Position ``k`` in an array holds the
observation with index ``i = k + 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSeriesError, InsufficientDataError, InvalidInputError
from .process import Ar1Model

# Simple DF test with constant, 5% level.
DF_CRIT_ASYMPTOTIC = -2.86
DF_CRIT_N50 = -2.92


def as_series(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidInputError("a series must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("series values must be finite")
    return arr


@dataclass(frozen=True)
class Ar1Fit:
    """Conditional least-squares fit of ``X_i = c + phi X_{i-1} + v_i``.

    ``intercept_hat`` is the regression constant ``c``; ``mu_hat`` is the
    implied process mean ``c / (1 - phi_hat)``.
    """

    phi_hat: float
    intercept_hat: float
    mu_hat: float
    se_phi: float
    t_phi: float
    se_intercept: float
    sigma_v_hat: float
    n_used: int


@dataclass(frozen=True)
class DfResult:
    t_stat: float
    critical_5pct: float
    reject_unit_root: bool


@dataclass(frozen=True)
class JbResult:
    skewness: float
    kurtosis: float
    jb_stat: float
    p_value: float


def simulate_ar1(model: Ar1Model, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` observations starting at the mean (``X_1 = mu``)."""
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    v = model.sigma_v * rng.standard_normal(n - 1)
    out = np.empty(n)
    out[0] = model.mu
    x = model.mu
    for k in range(1, n):
        x = model.mu + model.phi * (x - model.mu) + v[k - 1]
        out[k] = x
    return out


def _ols(y: np.ndarray, x: np.ndarray):
    """Regress y on (1, x). Returns (coef, stderr, residuals, s)."""
    if np.ptp(x) == 0:
        raise DegenerateSeriesError("regressor has zero variance")
    design = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    dof = len(y) - 2
    if dof > 0:
        s2 = float(resid @ resid) / dof
        cov = s2 * np.linalg.inv(design.T @ design)
        se = np.sqrt(np.diag(cov))
    else:
        s2 = math.nan
        se = np.array([math.nan, math.nan])
    return coef, se, resid, math.sqrt(s2)


def estimate_ar1(series) -> Ar1Fit:
    """Fit an AR(1) by OLS of ``X_i`` on ``(1, X_{i-1})``, ``i = 2..n``."""
    xs = as_series(series)
    if xs.size < 3:
        raise InsufficientDataError("AR(1) estimation needs at least 3 observations")
    coef, se, _, s = _ols(xs[1:], xs[:-1])
    c, phi = float(coef[0]), float(coef[1])
    mu = c / (1.0 - phi) if phi != 1.0 else math.nan
    se_phi = float(se[1])
    return Ar1Fit(
        phi_hat=phi,
        intercept_hat=c,
        mu_hat=mu,
        se_phi=se_phi,
        t_phi=phi / se_phi if se_phi > 0 else math.nan,
        se_intercept=float(se[0]),
        sigma_v_hat=s,
        n_used=xs.size - 1,
    )


def ar1_residuals(series, fit: Ar1Fit) -> np.ndarray:
    """Innovations ``(X_i - mu) - phi (X_{i-1} - mu)`` for ``i = 2..n``."""
    xs = as_series(series)
    if xs.size - 1 != fit.n_used:
        raise InvalidInputError(
            f"fit used {fit.n_used} observations but series yields {xs.size - 1}")
    centred = xs - fit.mu_hat
    return centred[1:] - fit.phi_hat * centred[:-1]


def moments(series) -> tuple[float, float, float, float]:
    """Mean, unbiased variance, and moment-based skewness and (non-excess)
    kurtosis.  Skewness and kurtosis are NaN for a constant series."""
    xs = as_series(series)
    if xs.size < 2:
        raise InsufficientDataError("variance needs at least 2 observations")
    mean = float(xs.mean())
    d = xs - mean
    m2 = float(np.mean(d**2))
    var = m2 * xs.size / (xs.size - 1)
    if m2 == 0:
        return mean, var, math.nan, math.nan
    skew = float(np.mean(d**3)) / m2**1.5
    kurt = float(np.mean(d**4)) / m2**2
    return mean, var, skew, kurt


def jarque_bera(series) -> JbResult:
    xs = as_series(series)
    if xs.size < 8:
        raise InsufficientDataError("Jarque-Bera needs at least 8 observations")
    _, var, s, k = moments(xs)
    if var == 0:
        raise DegenerateSeriesError("moments undefined for a constant series")
    jb = xs.size / 6.0 * (s**2 + (k - 3.0) ** 2 / 4.0)
    # chi-square(2) survival function is exactly exp(-x/2)
    return JbResult(s, k, jb, math.exp(-jb / 2.0))


def acf(series, max_lag: int) -> np.ndarray:
    xs = as_series(series)
    d = xs - xs.mean()
    c0 = float(d @ d)
    if c0 == 0:
        raise DegenerateSeriesError("autocorrelation undefined for a constant series")
    return np.array([1.0] + [float(d[lag:] @ d[:-lag]) / c0 for lag in range(1, max_lag + 1)])


def pacf_durbin_levinson(r: np.ndarray) -> np.ndarray:
    """Partial autocorrelations from autocorrelations ``r[0..p]``."""
    p = len(r) - 1
    out = np.empty(p + 1)
    out[0] = 1.0
    if p == 0:
        return out
    phi = np.array([r[1]])
    out[1] = r[1]
    v = 1.0 - r[1] ** 2
    for k in range(2, p + 1):
        a = (r[k] - phi @ r[k - 1:0:-1]) / v
        phi = np.append(phi - a * phi[::-1], a)
        v *= 1.0 - a * a
        out[k] = a
    return out


def correlogram(series, max_lag: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Sample ACF and PACF for lags ``0..max_lag`` and the 95% white-noise band."""
    xs = as_series(series)
    if max_lag < 1 or max_lag >= xs.size / 2:
        raise InvalidInputError(f"max_lag must be in [1, n/2), got {max_lag} for n={xs.size}")
    r = acf(xs, max_lag)
    return r, pacf_durbin_levinson(r), 1.96 / math.sqrt(xs.size)


def df_critical_value(n: int) -> float:
    # linear in 1/n through the asymptotic and n=50 table entries
    return DF_CRIT_ASYMPTOTIC + (DF_CRIT_N50 - DF_CRIT_ASYMPTOTIC) * 50.0 / n


def dickey_fuller(series) -> DfResult:
    """Simple Dickey-Fuller test (constant, no trend, no lag augmentation)."""
    xs = as_series(series)
    if xs.size < 10:
        raise InsufficientDataError("Dickey-Fuller needs at least 10 observations")
    coef, se, _, _ = _ols(np.diff(xs), xs[:-1])
    t = float(coef[1] / se[1])
    crit = df_critical_value(xs.size)
    return DfResult(t, crit, t < crit)
