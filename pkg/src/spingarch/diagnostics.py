"""Residual analysis, correlograms, spectral checks, and forecast evaluation.

Pearson residuals Z_t = (x_t - lambda_t) / sqrt(v_t) use the conditional
variance v_t = lambda_t for Poisson fits and v_t = lambda_t (1 + lambda_t/n)
for negative binomial fits; under a correctly specified model they are
approximately white with unit variance, which the correlogram and cumulative
periodogram make visible.

Conventions: sample variances use divisor s-1 throughout, except the ACF,
which uses the standard divisor-N autocovariance normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .data import as_counts
from .exceptions import DataError, ParameterError
from .model import POISSON, SOFTPLUS_LINEAR, ModelSpec, conditional_mean_path, presample_init

__all__ = [
    "ResidualSeries",
    "pearson_residuals",
    "sample_acf",
    "sample_pacf",
    "pacf_from_acf",
    "cumulative_periodogram",
    "one_step_forecasts",
    "iterated_forecasts",
    "rmse",
    "dispersion_ratio",
]


@dataclass(frozen=True)
class ResidualSeries:
    """Pearson residuals with the provenance needed to interpret them."""

    values: np.ndarray
    family: str
    spec: ModelSpec


def pearson_residuals(fit, series) -> ResidualSeries:
    """Standardized one-step residuals of a fitted model on its series."""
    x = as_counts(series)
    lam = np.asarray(fit.lambda_path, dtype=float)
    if lam.size != x.size:
        raise DataError("fit.lambda_path and series lengths differ")
    family = fit.spec.family
    if family == POISSON:
        v = lam
    else:
        n = fit.estimates.n
        v = lam * (1.0 + lam / n)
    z = (x - lam) / np.sqrt(v)
    if not np.all(np.isfinite(z)):
        raise DataError("non-finite residuals")
    return ResidualSeries(values=z, family=family, spec=fit.spec)


def sample_acf(series, max_lag: int) -> np.ndarray:
    """Sample autocorrelations at lags 1..max_lag (divisor-N autocovariance)."""
    y = np.asarray(series, dtype=float)
    if max_lag < 1 or y.size <= max_lag:
        raise ParameterError("need series length > max_lag >= 1")
    d = y - y.mean()
    denom = float(d @ d)
    if denom <= 0.0:
        raise DataError("degenerate series: zero variance")
    return np.array([float(d[: y.size - h] @ d[h:]) / denom for h in range(1, max_lag + 1)])


def pacf_from_acf(rho) -> np.ndarray:
    """Partial autocorrelations from an ACF sequence via Durbin-Levinson."""
    rho = np.asarray(rho, dtype=float)
    H = rho.size
    if H < 1:
        raise ParameterError("need at least one autocorrelation")
    pacf = np.empty(H)
    phi_prev = np.array([rho[0]])
    pacf[0] = rho[0]
    for k in range(2, H + 1):
        num = rho[k - 1] - float(phi_prev @ rho[k - 2 :: -1][: k - 1])
        den = 1.0 - float(phi_prev @ rho[: k - 1])
        if abs(den) < 1e-14:
            raise DataError("Durbin-Levinson recursion degenerate")
        phi_kk = num / den
        phi = np.empty(k)
        phi[: k - 1] = phi_prev - phi_kk * phi_prev[::-1]
        phi[k - 1] = phi_kk
        pacf[k - 1] = phi_kk
        phi_prev = phi
    return pacf


def sample_pacf(series, max_lag: int) -> np.ndarray:
    """Sample partial autocorrelations at lags 1..max_lag."""
    return pacf_from_acf(sample_acf(series, max_lag))


def cumulative_periodogram(residuals) -> Tuple[np.ndarray, np.ndarray, float]:
    """Cumulative periodogram with a 5% Kolmogorov-Smirnov band.

    Periodogram ordinates are taken at the Fourier frequencies j/s for
    j = 1..floor((s-1)/2) via the squared modulus of the DFT; the returned
    fractions are their normalized cumulative sums, and the band half-width
    is 1.36/sqrt(m) with m the number of ordinates.
    """
    v = np.asarray(residuals, dtype=float)
    s = v.size
    if s < 16:
        raise DataError("need at least 16 points for a cumulative periodogram")
    m = (s - 1) // 2
    dft = np.fft.rfft(v)
    ordinates = np.abs(dft[1 : m + 1]) ** 2
    total = float(ordinates.sum())
    if total <= 0.0:
        raise DataError("degenerate residuals: zero spectral mass")
    fractions = np.cumsum(ordinates) / total
    freqs = np.arange(1, m + 1) / s
    band = 1.36 / math.sqrt(m)
    return freqs, fractions, band


def _forecast_paths(fit, history):
    """Conditional-mean path over the full history plus one step beyond it."""
    hist = as_counts(history)
    spec = fit.spec
    train_len = len(fit.lambda_path)
    if hist.size < train_len:
        raise DataError("history must extend the training series")
    lam_init = presample_init(hist[:train_len])
    if spec.link == SOFTPLUS_LINEAR:
        path = conditional_mean_path(spec, fit.estimates, hist, lambda_init=lam_init)
        params = fit.estimates
        eta = params.alpha0
        for i in range(1, spec.p + 1):
            eta += params.alpha[i - 1] * (hist[-i] if i <= hist.size else lam_init)
        for j in range(1, spec.q + 1):
            eta += params.beta[j - 1] * (path[-j] if j <= path.size else lam_init)
        from .special import softplus

        one_beyond = float(softplus(eta, spec.c))
    else:
        from .neural import neural_lambda_path, slfn_forward

        path = neural_lambda_path(fit.estimates, spec, hist)
        lags = [float(hist[-i]) if i <= hist.size else lam_init for i in range(1, spec.p + 1)]
        lam_lags = [float(path[-j]) if j <= path.size else lam_init for j in range(1, spec.q + 1)]
        one_beyond = slfn_forward(fit.estimates, np.array([1.0, *lags, *lam_lags]))
    return hist, path, one_beyond, train_len


def one_step_forecasts(fit, history, horizon: int) -> np.ndarray:
    """Rolling one-step-ahead conditional means with observed-value feedback.

    `history` must contain the training series as its prefix; forecasts cover
    the `horizon` steps after it, each computed from the fitted response and
    the observations available up to the previous step (test observations are
    fed in as they arrive, parameters stay fixed at the fit).
    """
    if horizon < 1:
        raise ParameterError("horizon must be >= 1")
    hist, path, one_beyond, train_len = _forecast_paths(fit, history)
    if train_len + horizon > hist.size + 1:
        raise DataError(
            f"insufficient history: horizon {horizon} needs observations up to "
            f"step {train_len + horizon - 1}, have {hist.size}"
        )
    full = np.append(path, one_beyond)
    return full[train_len : train_len + horizon]


def iterated_forecasts(fit, history, horizon: int) -> np.ndarray:
    """Multi-step forecasts feeding predicted means back in as pseudo-counts.

    Experimental: unlike `one_step_forecasts`, no test observations are used;
    each predicted mean substitutes for the unseen count.
    """
    if horizon < 1:
        raise ParameterError("horizon must be >= 1")
    hist, path, one_beyond, train_len = _forecast_paths(fit, hist_prefix(history, fit))
    spec = fit.spec
    xprev = list(hist[::-1][: spec.p])
    lprev = list(path[::-1][: spec.q])
    out = []
    lam = one_beyond
    for _ in range(horizon):
        out.append(lam)
        xprev = [lam] + xprev[: spec.p - 1] if spec.p else xprev
        lprev = [lam] + lprev[: spec.q - 1] if spec.q else lprev
        if spec.link == SOFTPLUS_LINEAR:
            params = fit.estimates
            eta = params.alpha0
            for i in range(spec.p):
                eta += params.alpha[i] * xprev[i]
            for j in range(spec.q):
                eta += params.beta[j] * lprev[j]
            from .special import softplus

            lam = float(softplus(eta, spec.c))
        else:
            from .neural import slfn_forward

            lam = slfn_forward(fit.estimates, np.array([1.0, *xprev[: spec.p], *lprev[: spec.q]]))
    return np.asarray(out)


def hist_prefix(history, fit):
    """Truncate history to the training prefix (iterated mode sees no test data)."""
    hist = as_counts(history)
    return hist[: len(fit.lambda_path)]


def rmse(forecasts, actuals) -> float:
    """Root mean squared error between forecasts and realized counts."""
    f = np.asarray(forecasts, dtype=float)
    a = as_counts(actuals)
    if f.size != a.size:
        raise DataError("forecasts and actuals must have equal length")
    if f.size == 0:
        raise DataError("need at least one forecast")
    return float(np.sqrt(np.mean((f - a) ** 2)))


def dispersion_ratio(series) -> float:
    """Sample variance over sample mean (divisor s-1)."""
    x = as_counts(series)
    mean = float(x.mean())
    if mean == 0.0:
        raise DataError("dispersion ratio undefined for a zero-mean series")
    return float(x.var(ddof=1)) / mean
