"""Single-hidden-layer neural INGARCH: forward recursion, exact gradient,
training with restarts, and hidden-unit selection.

The conditional mean is produced by a single-hidden-layer feedforward network

    g(x) = f1( sum_l u1_l * f0( sum_k u0_{k,l} x_k ) ),

with logistic hidden activation f0 and softplus output activation f1 (c = 1),
applied to the input vector x = (1, X_{t-1}..X_{t-p}, lambda_{t-1}..lambda_{t-q})
of width K = p + q + 1.  Since f1' = f0 and f0' = f0 (1 - f0), backpropagation
needs only the forward activations.  When q > 0 the lambda lags themselves
depend on the weights, so the likelihood gradient accumulates those recursive
sensitivities through the time loop (forward accumulation of d lambda_t / dw)
rather than truncating at the per-step partials.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize
from scipy.special import digamma, expit, gammaln

from .data import as_counts
from .estimate import (
    FitResult,
    OptimizerOptions,
    _PENALTY,
    _dispersion_n,
    information_criteria,
    standard_errors,
)
from .exceptions import ConvergenceWarning, NumericError, ParameterError
from .model import NEGBIN, NEURAL, POISSON, ModelSpec, presample_init
from .special import softplus, softplus_inverse

__all__ = [
    "NeuralWeights",
    "slfn_forward",
    "neural_lambda_path",
    "neural_negloglik",
    "neural_gradient",
    "fit_neural",
    "select_hidden_units",
    "weights_to_flat",
    "weights_from_flat",
]


@dataclass(frozen=True)
class NeuralWeights:
    """Network weights: input-to-hidden matrix u0 (K x L), hidden-to-output
    vector u1 (L), and the negative binomial dispersion n when applicable."""

    u0: np.ndarray
    u1: np.ndarray
    n: Optional[float] = None

    def __post_init__(self):
        u0 = np.atleast_2d(np.asarray(self.u0, dtype=float))
        u1 = np.atleast_1d(np.asarray(self.u1, dtype=float))
        if u0.ndim != 2 or u1.ndim != 1 or u0.shape[1] != u1.size:
            raise ParameterError("u0 must be K x L and u1 length L")
        if not (np.all(np.isfinite(u0)) and np.all(np.isfinite(u1))):
            raise ParameterError("weights must be finite")
        object.__setattr__(self, "u0", u0)
        object.__setattr__(self, "u1", u1)
        if self.n is not None:
            n = float(self.n)
            if not (math.isfinite(n) and n > 0):
                raise ParameterError("dispersion n must be finite and > 0")
            object.__setattr__(self, "n", n)

    @property
    def input_width(self) -> int:
        return self.u0.shape[0]

    @property
    def hidden(self) -> int:
        return self.u0.shape[1]

    def count(self, family: str) -> int:
        """Number of free parameters under the given family."""
        return self.u0.size + self.u1.size + (1 if family == NEGBIN else 0)


def weights_to_flat(weights: NeuralWeights, log_n: bool = True) -> np.ndarray:
    """Flatten to [u0 row-major, u1, (ln) n]; the optimizer works on ln n."""
    flat = np.concatenate([weights.u0.ravel(), weights.u1])
    if weights.n is not None:
        flat = np.append(flat, math.log(weights.n) if log_n else weights.n)
    return flat


def weights_from_flat(flat: np.ndarray, spec: ModelSpec, log_n: bool = True) -> NeuralWeights:
    K, L = spec.input_width, spec.hidden
    flat = np.asarray(flat, dtype=float)
    expected = K * L + L + (1 if spec.family == NEGBIN else 0)
    if flat.size != expected:
        raise ParameterError(f"flat weight vector must have {expected} entries, got {flat.size}")
    u0 = flat[: K * L].reshape(K, L)
    u1 = flat[K * L : K * L + L]
    n = None
    if spec.family == NEGBIN:
        raw = float(flat[-1])
        n = math.exp(raw) if log_n else raw
    return NeuralWeights(u0=u0, u1=u1, n=n)


def slfn_forward(weights: NeuralWeights, x) -> float:
    """Network response for one input vector; strictly positive."""
    x = np.asarray(x, dtype=float)
    if x.shape != (weights.input_width,):
        raise ParameterError(f"input must have {weights.input_width} entries, got {x.shape}")
    hidden = expit(weights.u0.T @ x)
    return float(softplus(float(weights.u1 @ hidden), 1.0))


def _lag_matrix(x: np.ndarray, p: int, init: float) -> np.ndarray:
    s = x.size
    cols = [np.ones(s)]
    padded = np.concatenate([np.full(p, init), x])
    for i in range(1, p + 1):
        cols.append(padded[p - i : p - i + s])
    return np.column_stack(cols)


def neural_lambda_path(weights: NeuralWeights, spec: ModelSpec, series) -> np.ndarray:
    """Conditional means from the network, fed its own lagged outputs when q > 0."""
    _check_spec(weights, spec)
    x = as_counts(series)
    init = presample_init(x)
    s = x.size
    if spec.q == 0:
        B = _lag_matrix(x, spec.p, init)
        z = expit(B @ weights.u0) @ weights.u1
        lam = np.atleast_1d(softplus(z, 1.0))
        good = np.isfinite(lam) & (lam > 0.0)
        if not np.all(good):
            bad = int(np.flatnonzero(~good)[0]) + 1
            raise NumericError(f"conditional mean invalid at step {bad}", index=bad)
        return lam

    p, q = spec.p, spec.q
    lam = np.empty(s)
    xprev = [init] * p
    lprev = [init] * q
    for t in range(s):
        xt = np.array([1.0, *xprev, *lprev])
        hidden = expit(weights.u0.T @ xt)
        v = float(softplus(float(weights.u1 @ hidden), 1.0))
        if not (math.isfinite(v) and v > 0.0):
            raise NumericError(f"conditional mean invalid at step {t + 1}", index=t + 1)
        lam[t] = v
        xprev = [float(x[t])] + xprev[:-1]
        lprev = [v] + lprev[:-1]
    return lam


def _check_spec(weights: NeuralWeights, spec: ModelSpec):
    if spec.link != NEURAL:
        raise ParameterError("neural operations require the neural link")
    if weights.input_width != spec.input_width or weights.hidden != spec.hidden:
        raise ParameterError("weight shapes do not match the model spec")


def _loglik_terms(x: np.ndarray, g: np.ndarray, family: str, n: Optional[float]) -> np.ndarray:
    if family == POISSON:
        return x * np.log(g) - g - gammaln(x + 1.0)
    if n is None:
        raise ParameterError("negbin family requires dispersion n")
    return (
        x * (np.log(g) - np.log(n + g))
        - n * np.log1p(g / n)
        + gammaln(x + n)
        - gammaln(n)
        - gammaln(x + 1.0)
    )


def neural_negloglik(weights: NeuralWeights, spec: ModelSpec, series) -> float:
    """Negated conditional log-likelihood under the network response."""
    x = as_counts(series)
    g = neural_lambda_path(weights, spec, x)
    ll = float(np.sum(_loglik_terms(x, g, spec.family, weights.n)))
    if not math.isfinite(ll):
        raise NumericError("non-finite log-likelihood")
    return -ll


def _outer_dldg(x: np.ndarray, g: np.ndarray, family: str, n: Optional[float]) -> np.ndarray:
    """d log pmf / d mean, per observation."""
    if family == POISSON:
        return x / g - 1.0
    return x / g - (n + x) / (n + g)


def _dldn(x: np.ndarray, g: np.ndarray, n: float) -> float:
    """d log-likelihood / d n for the negative binomial family."""
    terms = math.log(n) + 1.0 - np.log(n + g) - (n + x) / (n + g) + digamma(x + n) - digamma(n)
    return float(np.sum(terms))


def neural_gradient(weights: NeuralWeights, spec: ModelSpec, series) -> np.ndarray:
    """Exact gradient of `neural_negloglik` in the flat layout of
    `weights_to_flat` (u0 row-major, u1, then ln n for the NB family).

    For q > 0 this is the total derivative: the sensitivity of each lambda_t
    to the weights is accumulated forward through the recursion, including the
    dependence through lagged conditional means.
    """
    _check_spec(weights, spec)
    x = as_counts(series)
    init = presample_init(x)
    s = x.size
    K, L = weights.input_width, weights.hidden
    W = K * L + L
    u0, u1 = weights.u0, weights.u1
    p, q = spec.p, spec.q

    if q == 0:
        B = _lag_matrix(x, p, init)
        A = B @ u0
        Hm = expit(A)
        z = Hm @ u1
        g = np.atleast_1d(softplus(z, 1.0))
        if not np.all(np.isfinite(g) & (g > 0.0)):
            raise NumericError("conditional mean invalid in gradient pass")
        f1p = expit(z)
        outer = _outer_dldg(x, g, spec.family, weights.n) * f1p
        grad_u1 = Hm.T @ outer
        inner = Hm * (1.0 - Hm) * u1[None, :] * outer[:, None]
        grad_u0 = B.T @ inner
        grad = -np.concatenate([grad_u0.ravel(), grad_u1])
    else:
        lam = np.empty(s)
        sens = np.zeros((s, W))
        xprev = [init] * p
        lprev = [init] * q
        lag_sens = [np.zeros(W) for _ in range(q)]
        for t in range(s):
            xt = np.array([1.0, *xprev, *lprev])
            a = u0.T @ xt
            hm = expit(a)
            z = float(u1 @ hm)
            gt = float(softplus(z, 1.0))
            f1p = float(expit(z))
            hprime = hm * (1.0 - hm)
            d_u0 = f1p * np.outer(xt, u1 * hprime)
            d_u1 = f1p * hm
            d_x = f1p * (u0 @ (u1 * hprime))
            st = np.concatenate([d_u0.ravel(), d_u1])
            for j in range(q):
                st = st + d_x[1 + p + j] * lag_sens[j]
            lam[t] = gt
            sens[t] = st
            xprev = [float(x[t])] + xprev[:-1]
            lprev = [gt] + lprev[:-1]
            lag_sens = [st] + lag_sens[:-1]
        if not np.all(np.isfinite(lam) & (lam > 0.0)):
            raise NumericError("conditional mean invalid in gradient pass")
        outer = _outer_dldg(x, lam, spec.family, weights.n)
        grad = -(outer[:, None] * sens).sum(axis=0)
        g = lam

    if spec.family == NEGBIN:
        # lambda does not depend on n, so the ln-n component is direct
        grad = np.append(grad, -weights.n * _dldn(x, g, weights.n))
    return grad


def _initial_weights(spec: ModelSpec, series, gen: np.random.Generator) -> NeuralWeights:
    """Random input weights scaled by 1/sqrt(K); output weights chosen so the
    first forward pass lands near the sample mean."""
    x = as_counts(series)
    K, L = spec.input_width, spec.hidden
    xbar = float(x.mean())
    u0 = gen.uniform(-0.5, 0.5, size=(K, L)) / math.sqrt(K)
    mean_input = np.array([1.0] + [xbar] * (K - 1))
    levels = expit(u0.T @ mean_input)
    target = softplus_inverse(max(xbar, 0.1), 1.0)
    common = target / max(float(levels.sum()), 1e-6)
    u1 = np.full(L, common)
    n = None
    if spec.family == NEGBIN:
        var = float(x.var(ddof=1))
        disp = var / xbar if xbar > 0 else 1.0
        n = _dispersion_n(xbar, disp)
    return NeuralWeights(u0=u0, u1=u1, n=n)


def fit_neural(
    spec: ModelSpec,
    series,
    opts: Optional[OptimizerOptions] = None,
    extra_starts: Sequence[NeuralWeights] = (),
) -> FitResult:
    """Train the network by maximum likelihood with multi-start L-BFGS.

    Every start (fresh random initializations plus any `extra_starts`, e.g.
    warm starts from a smaller network) is run to completion and the best
    log-likelihood wins, ties broken by the earliest start.  Deterministic
    given `opts.seed`.
    """
    opts = opts if opts is not None else OptimizerOptions(restarts=10)
    x = as_counts(series)
    s = x.size
    K, L = spec.input_width, spec.hidden
    floor = 20 * (K * L + L) / (spec.p + spec.q + 1)
    if s < floor:
        warnings.warn(
            f"series length {s} is below the identifiability floor {floor:.0f} for this network",
            UserWarning,
        )

    def fun(flat):
        try:
            w = weights_from_flat(flat, spec)
            value = neural_negloglik(w, spec, x)
            grad = neural_gradient(w, spec, x)
        except (NumericError, ParameterError, OverflowError):
            return _PENALTY, np.zeros(flat.size)
        if not (math.isfinite(value) and np.all(np.isfinite(grad))):
            return _PENALTY, np.zeros(flat.size)
        return value, grad

    starts = []
    for k in range(opts.restarts + 1):
        gen = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(entropy=opts.seed, spawn_key=(k,)))
        )
        starts.append(weights_to_flat(_initial_weights(spec, x, gen)))
    starts.extend(weights_to_flat(w) for w in extra_starts)

    best = None
    for idx, start in enumerate(starts):
        res = minimize(
            fun,
            start,
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": opts.max_iterations, "ftol": opts.f_tol},
        )
        success = bool(res.success and res.fun < _PENALTY)
        cand = (float(res.fun), idx, res.x.copy(), success, int(res.nit))
        if best is None or cand[0] < best[0]:
            best = cand

    fun_val, _, flat_hat, success, iterations = best
    estimates = weights_from_flat(flat_hat, spec)
    loglik = -fun_val
    converged = success and math.isfinite(loglik)
    if not converged:
        warnings.warn("neural training did not meet its tolerances", ConvergenceWarning)
    lambda_path = neural_lambda_path(estimates, spec, x)
    k = estimates.count(spec.family)
    aic, bic = information_criteria(loglik, k, s)
    se = standard_errors(spec, estimates, x) if converged else np.full(k, np.nan)
    return FitResult(
        spec=spec,
        estimates=estimates,
        std_errors=se,
        loglik=loglik,
        aic=aic,
        bic=bic,
        lambda_path=lambda_path,
        converged=converged,
        iterations=iterations,
        restarts_used=len(starts) - 1,
    )


def extend_with_idle_unit(weights: NeuralWeights) -> NeuralWeights:
    """Append one hidden unit wired to contribute nothing: the response (and
    hence the likelihood) is unchanged, giving a warm start for L+1 units."""
    u0 = np.hstack([weights.u0, np.zeros((weights.input_width, 1))])
    u1 = np.append(weights.u1, 0.0)
    return NeuralWeights(u0=u0, u1=u1, n=weights.n)


def select_hidden_units(
    spec: ModelSpec,
    series,
    L_range: Sequence[int],
    opts: Optional[OptimizerOptions] = None,
    criterion: str = "aic",
) -> Tuple[int, Dict[int, FitResult]]:
    """Fit each hidden-unit count and pick the information-criterion winner.

    Larger networks are additionally warm-started from the previous winner
    with an idle extra unit, so the in-sample fit is monotone in L up to
    optimizer tolerance.  Ties go to the smaller network.
    """
    if criterion not in ("aic", "bic"):
        raise ParameterError("criterion must be 'aic' or 'bic'")
    Ls = sorted(set(int(L) for L in L_range))
    if not Ls:
        raise ParameterError("L_range must be non-empty")
    fits: Dict[int, FitResult] = {}
    prev: Optional[NeuralWeights] = None
    for L in Ls:
        spec_L = replace(spec, hidden=L)
        extra = []
        if prev is not None and prev.hidden == L - 1:
            extra.append(extend_with_idle_unit(prev))
        fits[L] = fit_neural(spec_L, series, opts, extra_starts=extra)
        prev = fits[L].estimates
    best_L = Ls[0]
    for L in Ls[1:]:
        score = getattr(fits[L], criterion)
        if score < getattr(fits[best_L], criterion):
            best_L = L
    return best_L, fits
