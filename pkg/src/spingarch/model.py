"""Model specification, conditional-mean recursions, stationarity checks, and
linear moment approximations.

The softplus INGARCH(p, q) model drives a count series {X_t} through

    X_t | F_{t-1}  ~  Poisson(lambda_t)  or  NB(n, n/(n+lambda_t)),
    lambda_t = sp(alpha0 + sum_i alpha_i X_{t-i} + sum_j beta_j lambda_{t-j}),

where sp is the softplus link.  Coefficients may be negative -- that is the
point of the softplus link -- so the ACF of the process can take negative
values while lambda_t stays strictly positive.

Because exact moments of the softplus model are intractable, the classical
linear INGARCH moment formulas evaluated at the same coefficients serve as
close approximations; they are implemented here both in closed form for the
(1,1) model and through a general autocovariance linear system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .data import as_counts
from .exceptions import NumericError, ParameterError
from .special import softplus

__all__ = [
    "POISSON",
    "NEGBIN",
    "SOFTPLUS_LINEAR",
    "NEURAL",
    "ModelSpec",
    "LinearParams",
    "StationarityReport",
    "LinearMoments",
    "conditional_mean_path",
    "check_stationarity",
    "linear_moments_11",
    "linear_acvf_general",
    "presample_init",
]

POISSON = "poisson"
NEGBIN = "negbin"
SOFTPLUS_LINEAR = "softplus-linear"
NEURAL = "neural"

_FAMILIES = (POISSON, NEGBIN)
_LINKS = (SOFTPLUS_LINEAR, NEURAL)

# Floor applied to the sample-mean pre-sample initialization so an all-zeros
# series still yields lambda > 0.
MEAN_FLOOR = 1e-4


@dataclass(frozen=True)
class ModelSpec:
    """Family, link and orders of a count model.

    p counts observation lags, q conditional-mean lags.  `c` is the softplus
    smoothness (softplus-linear link only, default 1); `hidden` the number of
    hidden units (neural link only).
    """

    family: str
    link: str
    p: int
    q: int
    c: float = 1.0
    hidden: Optional[int] = None

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ParameterError(f"unknown family {self.family!r}; expected one of {_FAMILIES}")
        if self.link not in _LINKS:
            raise ParameterError(f"unknown link {self.link!r}; expected one of {_LINKS}")
        if self.p < 0 or self.q < 0 or self.p + self.q < 1:
            raise ParameterError("orders must satisfy p >= 0, q >= 0, p + q >= 1")
        if self.q >= 1 and self.p < 1:
            raise ParameterError("q >= 1 requires p >= 1")
        if not (np.isfinite(self.c) and self.c > 0):
            raise ParameterError("c must be finite and > 0")
        if self.link == NEURAL:
            if self.hidden is None or self.hidden < 1:
                raise ParameterError("neural link requires hidden >= 1")

    @property
    def input_width(self) -> int:
        """Neural input width: constant plus p observation and q mean lags."""
        return self.p + self.q + 1


@dataclass(frozen=True)
class LinearParams:
    """Coefficients of a softplus-linear model.

    alpha0 is the intercept, alpha the p observation-lag coefficients, beta the
    q feedback coefficients, and n the negative binomial dispersion (None for
    Poisson).  Coefficients are unconstrained reals; only n must be positive.
    """

    alpha0: float
    alpha: Tuple[float, ...] = ()
    beta: Tuple[float, ...] = ()
    n: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
        object.__setattr__(self, "alpha0", float(self.alpha0))
        vals = (self.alpha0,) + self.alpha + self.beta
        if not all(math.isfinite(v) for v in vals):
            raise ParameterError("coefficients must be finite")
        if self.n is not None:
            object.__setattr__(self, "n", float(self.n))
            if not (math.isfinite(self.n) and self.n > 0):
                raise ParameterError("dispersion n must be finite and > 0")

    @property
    def p(self) -> int:
        return len(self.alpha)

    @property
    def q(self) -> int:
        return len(self.beta)

    def k(self, family: str) -> int:
        """Number of free parameters under the given family."""
        return 1 + self.p + self.q + (1 if family == NEGBIN else 0)


@dataclass(frozen=True)
class StationarityReport:
    """Outcome of the first/second-order stationarity checks.

    The closed-form conditions are stated for the (1,1) model only; for other
    orders `applicable` is False and the flags are None.  The checks are
    advisory: estimation proceeds on flagged parameter sets.
    """

    applicable: bool
    first_order_ok: Optional[bool]
    second_order_ok: Optional[bool]
    c11_bar: Optional[float]
    second_order_value: Optional[float]


@dataclass(frozen=True)
class LinearMoments:
    """Mean, variance and ACF of the linear-model approximation."""

    mu: float
    variance: float
    acf: np.ndarray

    @property
    def dispersion(self) -> float:
        return self.variance / self.mu


def presample_init(series, floor: float = MEAN_FLOOR) -> float:
    """Shared pre-sample value: the sample mean, floored away from zero."""
    x = as_counts(series)
    return max(float(x.mean()), floor)


def _omega0(family: str, n: Optional[float]) -> float:
    """Variance inflation 1 + 1/n; the Poisson family is the explicit n->inf limit."""
    if family == POISSON:
        return 1.0
    if n is None:
        raise ParameterError("negbin family requires dispersion n")
    return 1.0 + 1.0 / n


def conditional_mean_path(spec: ModelSpec, params: LinearParams, series, lambda_init=None) -> np.ndarray:
    """Conditional means lambda_1..lambda_s implied by params on the given series.

    Pre-sample observations and conditional means are replaced by the sample
    mean of the series (floored at 1e-4), or by `lambda_init` for the lambda
    side when supplied.  Every returned entry is strictly positive by the
    softplus range.

    Raises
    ------
    NumericError
        If the recursion produces a non-finite value; the error carries the
        1-based index of the offending step.
    """
    if spec.link != SOFTPLUS_LINEAR:
        raise ParameterError("conditional_mean_path handles the softplus-linear link")
    if params.p != spec.p or params.q != spec.q:
        raise ParameterError("parameter orders do not match the model spec")
    x = as_counts(series)
    s = x.size
    init_x = presample_init(x)
    lam0 = init_x if lambda_init is None else float(lambda_init)
    if not (math.isfinite(lam0) and lam0 > 0):
        raise ParameterError("lambda_init must be finite and > 0")

    p, q, c = spec.p, spec.q, spec.c
    a0 = params.alpha0
    alpha = params.alpha
    beta = params.beta

    if q == 0:
        padded = np.concatenate([np.full(p, init_x), x])
        eta = np.full(s, a0)
        for i in range(1, p + 1):
            eta += alpha[i - 1] * padded[p - i : p - i + s]
        lam = np.atleast_1d(softplus(eta, c))
        good = np.isfinite(lam) & (lam > 0.0)
        if not np.all(good):
            bad = int(np.flatnonzero(~good)[0]) + 1
            raise NumericError(f"conditional mean invalid at step {bad}", index=bad)
        return lam

    # Feedback recursion: a tight scalar loop, with the dominant (1,1) case
    # special-cased to keep likelihood evaluation cheap.
    exp, log1p, isfinite = math.exp, math.log1p, math.isfinite
    xs = x.tolist()
    lam = np.empty(s)
    if p == 1 and q == 1:
        a1, b1 = alpha[0], beta[0]
        xm1, lm1 = init_x, lam0
        for t in range(s):
            eta = a0 + a1 * xm1 + b1 * lm1
            v = eta + c * log1p(exp(-eta / c)) if eta > 0.0 else c * log1p(exp(eta / c))
            if not (isfinite(v) and v > 0.0):
                raise NumericError(f"conditional mean invalid at step {t + 1}", index=t + 1)
            lam[t] = v
            lm1 = v
            xm1 = xs[t]
        return lam

    xprev = [init_x] * p
    lprev = [lam0] * q
    for t in range(s):
        eta = a0
        for i in range(p):
            eta += alpha[i] * xprev[i]
        for j in range(q):
            eta += beta[j] * lprev[j]
        v = eta + c * log1p(exp(-eta / c)) if eta > 0.0 else c * log1p(exp(eta / c))
        if not (isfinite(v) and v > 0.0):
            raise NumericError(f"conditional mean invalid at step {t + 1}", index=t + 1)
        lam[t] = v
        xprev = [xs[t]] + xprev[:-1]
        lprev = [v] + lprev[:-1]
    return lam


def check_stationarity(params: LinearParams, family: str) -> StationarityReport:
    """Evaluate the first/second-order stationarity conditions for a (1,1) model.

    With positive parts a1+ = max(0, alpha1) and b1+ = max(0, beta1):
    first order requires a1+ + b1+ < 1 and |beta1| < 1; second order
    additionally (1 + 1/n) a1+^2 + 2 a1+ b1+ + b1+^2 < 1 (coefficient 1 on
    a1+^2 for the Poisson family).  Orders other than (1,1) are reported as
    not applicable: no closed-form condition is available for them.
    """
    if family not in _FAMILIES:
        raise ParameterError(f"unknown family {family!r}")
    if params.p != 1 or params.q != 1:
        return StationarityReport(False, None, None, None, None)
    a1bar = max(0.0, params.alpha[0])
    b1bar = max(0.0, params.beta[0])
    omega0 = _omega0(family, params.n)
    c11 = a1bar + b1bar
    second_val = omega0 * a1bar**2 + 2.0 * a1bar * b1bar + b1bar**2
    first_ok = c11 < 1.0 and abs(params.beta[0]) < 1.0
    second_ok = bool(first_ok and second_val < 1.0)
    return StationarityReport(True, first_ok, second_ok, c11, second_val)


def linear_moments_11(params: LinearParams, family: str, max_lag: int = 3) -> LinearMoments:
    """Closed-form mean, variance, and ACF of the linear (1,1) approximation.

    mu    = alpha0 / (1 - alpha1 - beta1)
    var   = mu (1 + mu/n) (1 - 2 a b - b^2) / (1 - w0 a^2 - 2 a b - b^2)
    rho(h)= a (a + b)^(h-1) (1 - a b - b^2) / (1 - 2 a b - b^2)

    with a = alpha1, b = beta1, w0 = 1 + 1/n; the Poisson family takes the
    explicit limits w0 = 1 and 1 + mu/n = 1.
    """
    if params.p != 1 or params.q != 1:
        raise ParameterError("linear_moments_11 requires a (1,1) parameter set")
    if max_lag < 1:
        raise ParameterError("max_lag must be >= 1")
    a, b = params.alpha[0], params.beta[0]
    d_mean = 1.0 - a - b
    if d_mean <= 0.0:
        raise ParameterError("mean condition violated: 1 - alpha1 - beta1 must be > 0")
    mu = params.alpha0 / d_mean
    omega0 = _omega0(family, params.n)
    over = 1.0 if family == POISSON else 1.0 + mu / params.n
    acf_den = 1.0 - 2.0 * a * b - b * b
    var_den = 1.0 - omega0 * a * a - 2.0 * a * b - b * b
    if abs(acf_den) < 1e-12:
        raise ParameterError("ACF denominator 1 - 2 alpha1 beta1 - beta1^2 vanishes")
    if abs(var_den) < 1e-12:
        raise ParameterError("variance denominator 1 - w0 alpha1^2 - 2 alpha1 beta1 - beta1^2 vanishes")
    variance = mu * over * acf_den / var_den
    if variance <= 0.0:
        raise ParameterError("variance formula non-positive: parameters outside the second-order region")
    rho1_fac = (1.0 - a * b - b * b) / acf_den
    h = np.arange(1, max_lag + 1)
    acf = a * (a + b) ** (h - 1.0) * rho1_fac
    return LinearMoments(mu=mu, variance=variance, acf=acf)


def linear_acvf_general(
    params: LinearParams, family: str, max_lag: Optional[int] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """Autocovariances of X and lambda for the linear (p,q) approximation.

    Solves the dense linear system formed by the stationary autocovariance
    recursions together with the variance link

        gamma_X(0) = w0 gamma_lambda(0) + mu (1 + mu/n),

    for gamma_X(0..H) and gamma_lambda(0..H).  For (1,1) parameter sets the
    implied ACF matches `linear_moments_11` to 1e-10.

    Returns
    -------
    (gamma_x, gamma_lambda) : pair of ndarrays of length H+1.
    """
    p, q = params.p, params.q
    if p + q < 1:
        raise ParameterError("need p + q >= 1")
    H = max_lag if max_lag is not None else max(10, 3 * (p + q))
    if H < max(p, q, 1):
        raise ParameterError(f"max_lag must be >= max(p, q) = {max(p, q)}")
    a = np.asarray(params.alpha)
    b = np.asarray(params.beta)
    d_mean = 1.0 - a.sum() - b.sum()
    if d_mean <= 0.0:
        raise ParameterError("mean condition violated: 1 - sum(alpha) - sum(beta) must be > 0")
    mu = params.alpha0 / d_mean
    omega0 = _omega0(family, params.n)
    v_cond = mu if family == POISSON else mu * (1.0 + mu / params.n)

    m = 2 * (H + 1)
    gx = lambda h: h            # noqa: E731 - index helpers for readability
    gl = lambda h: H + 1 + h    # noqa: E731
    M = np.zeros((m, m))
    rhs = np.zeros(m)
    row = 0

    # variance link
    M[row, gx(0)] = 1.0
    M[row, gl(0)] = -omega0
    rhs[row] = v_cond
    row += 1

    # gamma_X recursion, h >= 1
    for h in range(1, H + 1):
        M[row, gx(h)] += 1.0
        for i in range(1, p + 1):
            M[row, gx(abs(h - i))] -= a[i - 1]
        for j in range(1, min(h - 1, q) + 1):
            M[row, gx(h - j)] -= b[j - 1]
        for j in range(h, q + 1):
            M[row, gl(j - h)] -= b[j - 1]
        row += 1

    # gamma_lambda recursion, h >= 0
    for h in range(0, H + 1):
        M[row, gl(h)] += 1.0
        for i in range(1, min(h, p) + 1):
            M[row, gl(abs(h - i))] -= a[i - 1]
        for i in range(h + 1, p + 1):
            M[row, gx(i - h)] -= a[i - 1]
        for j in range(1, q + 1):
            M[row, gl(abs(h - j))] -= b[j - 1]
        row += 1

    try:
        sol = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as exc:
        raise ParameterError(
            "autocovariance system singular: parameters outside the second-order stationarity region"
        ) from exc
    gamma_x = sol[: H + 1]
    gamma_lam = sol[H + 1 :]
    if not np.all(np.isfinite(sol)) or gamma_x[0] <= 0.0:
        raise ParameterError(
            "autocovariance solution invalid: parameters outside the second-order stationarity region"
        )
    return gamma_x, gamma_lam
