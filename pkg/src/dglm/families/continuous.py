"""Continuous responses with Normal or Gamma-type conjugate laws."""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate, stats
from scipy import special as sc

from ..errors import ConjugateDomainError, DomainError, ObservationError
from ..special import ApproxMode, digamma, inverse_trigamma, trigamma
from ..state_space import PredictorMoments
from .base import ConjugateParams, ObsContext, ResponseFamily, gamma_law, normal_logpdf

_LOG_2PI = math.log(2.0 * math.pi)


# ---------------------------------------------------------------- normal


class NormalFamily(ResponseFamily):
    """``y ~ N(mu, V)`` with known ``V`` and ``mu ~ N(r/s, 1/s)``; identity link."""

    name = "normal"
    param_name = "mu"
    context_fields = ("V",)

    def dispersion(self, ctx):
        return ctx.V

    def cumulant(self, gamma, ctx):
        return 0.5 * gamma * gamma

    def log_base_measure(self, y, ctx):
        return -0.5 * y * y / ctx.V - 0.5 * (_LOG_2PI + math.log(ctx.V))

    def natural_from_param(self, param, ctx):
        return float(param)

    def eta_from_param(self, param, ctx):
        return param

    def param_from_eta(self, eta, ctx):
        return eta

    def mean_from_param(self, param, ctx):
        return param

    def param_from_mean(self, mu, ctx):
        return mu

    def _params_ok(self, r, s, ctx):
        return s > 0.0

    def _match_closed(self, pm, ctx):
        f, q = pm
        return ConjugateParams(f / q, 1.0 / q)

    _match_exact = _match_closed

    def matching_moments(self, params, ctx=None):
        r, s = params
        return PredictorMoments(r / s, 1.0 / s)

    def predictor_moments(self, params, ctx=None, approx=ApproxMode.EXACT):
        return self.matching_moments(params, ctx)

    def _discount(self, post, delta, ctx, ctx_next, approx):
        k = delta * delta if approx is ApproxMode.PAPER else delta
        return ConjugateParams(k * post.r, k * post.s)

    def location_scale(self, params, ctx):
        """Mean and variance of the Gaussian predictive of ``z(y)``."""
        return params.r / params.s, ctx.V + 1.0 / params.s

    def forecast_logpdf(self, params, y, ctx=None):
        ctx = self.resolve(ctx)
        y = self.check_obs(y, ctx)
        m, v = self.location_scale(params, ctx)
        return normal_logpdf(y, m, v)

    def forecast_moments(self, params, ctx=None):
        return self.location_scale(params, self.resolve(ctx))

    def forecast_cdf(self, params, y, ctx=None):
        m, v = self.location_scale(params, self.resolve(ctx))
        return float(sc.ndtr((y - m) / math.sqrt(v)))

    def forecast_quantile(self, params, p, ctx=None):
        if not 0.0 < p < 1.0:
            raise DomainError(f"probability must lie in (0, 1), got {p!r}")
        m, v = self.location_scale(params, self.resolve(ctx))
        return float(m + math.sqrt(v) * sc.ndtri(p))

    def param_law(self, params, ctx):
        return stats.norm(params.r / params.s, math.sqrt(1.0 / params.s))

    def plugin_estimate(self, post, ctx=None):
        return post.r / post.s

    def obs_law(self, param, ctx):
        return stats.norm(param, math.sqrt(ctx.V))

    def obs_logpdf(self, param, y, ctx=None):
        return normal_logpdf(y, param, self.resolve(ctx).V)

    def transition_log_jacobian(self, param, ctx):
        return 0.0


def _exp_or_inf(x: float) -> float:
    return math.inf if x > 709.0 else math.exp(x)


class LogNormalFamily(NormalFamily):
    """``log y ~ N(lambda, V)``; the conjugate analysis is the normal one on ``log y``.

    The linear predictor is the log-scale location ``lambda``, so the response
    mean is ``exp(lambda + V/2)``.
    """

    name = "lognormal"
    param_name = "lambda"
    support = (0.0, math.inf, False)

    def z(self, y, ctx):
        return math.log(y)

    def log_base_measure(self, y, ctx):
        ly = math.log(y)
        return -0.5 * ly * ly / ctx.V - 0.5 * (_LOG_2PI + math.log(ctx.V)) - ly

    def mean_from_param(self, param, ctx):
        return np.exp(param + 0.5 * ctx.V)

    def param_from_mean(self, mu, ctx):
        return np.log(mu) - 0.5 * ctx.V

    def forecast_logpdf(self, params, y, ctx=None):
        ctx = self.resolve(ctx)
        y = self.check_obs(y, ctx)
        m, v = self.location_scale(params, ctx)
        return normal_logpdf(math.log(y), m, v) - math.log(y)

    def forecast_moments(self, params, ctx=None):
        m, v = self.location_scale(params, self.resolve(ctx))
        # log scale so very diffuse priors give inf instead of OverflowError
        log_mean = m + 0.5 * v
        log_var = 2.0 * m + v + (v + math.log(-math.expm1(-v)) if v > 0.0 else -math.inf)
        return _exp_or_inf(log_mean), _exp_or_inf(log_var)

    def forecast_cdf(self, params, y, ctx=None):
        if y <= 0.0:
            return 0.0
        return super().forecast_cdf(params, math.log(y), ctx)

    def forecast_quantile(self, params, p, ctx=None):
        return math.exp(super().forecast_quantile(params, p, ctx))

    def obs_law(self, param, ctx):
        return stats.lognorm(math.sqrt(ctx.V), scale=np.exp(param))

    def obs_logpdf(self, param, y, ctx=None):
        ctx = self.resolve(ctx)
        return normal_logpdf(math.log(y), param, ctx.V) - math.log(y)


def lognormal_log_bayes_factor(y: float, params1: ConjugateParams, V1: float,
                               params2: ConjugateParams, V2: float) -> float:
    """``log H_t(1)`` of two log-normal models written out in closed form.

    With ``v_i = V_i + 1/s_i`` and ``m_i = r_i/s_i``:
    ``log H = 1/2 log(v2/v1) + (log y - m2)^2/(2 v2) - (log y - m1)^2/(2 v1)``.
    """
    ly = math.log(y)
    v1 = V1 + 1.0 / params1.s
    v2 = V2 + 1.0 / params2.s
    d1 = ly - params1.r / params1.s
    d2 = ly - params2.r / params2.s
    return 0.5 * math.log(v2 / v1) + d2 * d2 / (2.0 * v2) - d1 * d1 / (2.0 * v1)


# ----------------------------------------------------------------- gamma


class GammaFamily(ResponseFamily):
    """``y ~ G(alpha, beta)`` (shape, rate) with known ``alpha`` and
    ``beta ~ G(alpha s + 1, r)``; the linear predictor is ``log beta``.

    Matching needs ``s > 0`` (finite predictive mean), i.e. ``q < 1``.
    """

    name = "gamma"
    param_name = "beta"
    context_fields = ("alpha",)
    support = (0.0, math.inf, False)

    @staticmethod
    def _shape(params, ctx):
        return ctx.alpha * params.s + 1.0

    def cumulant(self, gamma, ctx):
        return -ctx.alpha * math.log(-gamma) + math.lgamma(ctx.alpha)

    def log_base_measure(self, y, ctx):
        return (ctx.alpha - 1.0) * math.log(y)

    def natural_from_param(self, param, ctx):
        return -float(param)

    def eta_from_param(self, param, ctx):
        return np.log(param)

    def param_from_eta(self, eta, ctx):
        return np.exp(eta)

    def mean_from_param(self, param, ctx):
        return ctx.alpha / param

    def param_from_mean(self, mu, ctx):
        return ctx.alpha / mu

    def _params_ok(self, r, s, ctx):
        return r > 0.0 and ctx.alpha * s + 1.0 > 0.0

    def _domain_error(self, q):
        return ConjugateDomainError(
            f"{self.name} matching at q={q:.6g} gives alpha s + 1 <= 1 (infinite predictive mean);"
            " shrink q (e.g. smaller Omega or larger discount factor)"
        )

    def _match_closed(self, pm, ctx):
        f, q = pm
        if q >= 1.0:
            raise self._domain_error(q)
        return ConjugateParams(math.exp(-f) / q, (1.0 - q) / (ctx.alpha * q))

    def _match_exact(self, pm, ctx):
        f, q = pm
        A = inverse_trigamma(q)
        if A <= 1.0:
            raise self._domain_error(q)
        return ConjugateParams(math.exp(float(digamma(A)) - f), (A - 1.0) / ctx.alpha)

    def matching_moments(self, params, ctx=None):
        A = self._shape(params, self.resolve(ctx))
        return PredictorMoments(math.log(A / params.r), 1.0 / A)

    def clamp_moments(self, pm, ctx, matching="closed"):
        # Gamma shape pinned at 2 (alpha s = 1), keeping f
        return PredictorMoments(pm.f, float(trigamma(2.0)) if matching == "exact" else 0.5)

    def predictor_moments(self, params, ctx=None, approx=ApproxMode.EXACT):
        A = self._shape(params, self.resolve(ctx))
        return PredictorMoments(float(digamma(A, approx)) - math.log(params.r), float(trigamma(A, approx)))

    def _discount(self, post, delta, ctx, ctx_next, approx):
        return ConjugateParams(delta * post.r, delta * ctx.alpha * post.s / ctx_next.alpha)

    def forecast_logpdf(self, params, y, ctx=None):
        ctx = self.resolve(ctx)
        y = self.check_obs(y, ctx)
        alpha, r = ctx.alpha, params.r
        A = self._shape(params, ctx)
        return ((alpha - 1.0) * math.log(y) + A * math.log(r) + math.lgamma(A + alpha)
                - math.lgamma(alpha) - math.lgamma(A) - (A + alpha) * math.log(r + y))

    def forecast_moments(self, params, ctx=None):
        ctx = self.resolve(ctx)
        r, s = params
        if s <= 0.0:
            return math.inf, math.inf
        k = ctx.alpha * s
        var = r * r * (s + 1.0) / (s * s * (k - 1.0)) if k > 1.0 else math.inf
        return r / s, var

    def forecast_cdf(self, params, y, ctx=None):
        ctx = self.resolve(ctx)
        if y <= 0.0:
            return 0.0
        # y / (r + y) ~ Beta(alpha, A) under the predictive
        return float(sc.betainc(ctx.alpha, self._shape(params, ctx), y / (params.r + y)))

    def forecast_quantile(self, params, p, ctx=None):
        if not 0.0 < p < 1.0:
            raise DomainError(f"probability must lie in (0, 1), got {p!r}")
        ctx = self.resolve(ctx)
        u = float(sc.betaincinv(ctx.alpha, self._shape(params, ctx), p))
        return params.r * u / (1.0 - u)

    def param_law(self, params, ctx):
        return gamma_law(self._shape(params, ctx), params.r)

    def plugin_estimate(self, post, ctx=None):
        return self._shape(post, self.resolve(ctx)) / post.r

    def obs_law(self, param, ctx):
        return stats.gamma(ctx.alpha, scale=1.0 / np.asarray(param))

    def obs_logpdf(self, param, y, ctx=None):
        ctx = self.resolve(ctx)
        return float(stats.gamma.logpdf(y, ctx.alpha, scale=1.0 / param))

    def transition_log_jacobian(self, param, ctx):
        return -math.log(param)


def gamma_log_bayes_factor(y: float, params1: ConjugateParams, alpha1: float,
                           params2: ConjugateParams, alpha2: float) -> float:
    """``log H_t(1)`` between two gamma models (different discounts and/or shapes).

    With ``A_i = alpha_i s_i + 1``:
    ``log H = (alpha1 - alpha2) log y + A1 log r1 - A2 log r2
    + log[Gamma(A1+alpha1) Gamma(alpha2) Gamma(A2) / (Gamma(A2+alpha2) Gamma(alpha1) Gamma(A1))]
    - (A1+alpha1) log(r1+y) + (A2+alpha2) log(r2+y)``.
    """
    r1, s1 = params1
    r2, s2 = params2
    A1 = alpha1 * s1 + 1.0
    A2 = alpha2 * s2 + 1.0
    lg = math.lgamma
    return ((alpha1 - alpha2) * math.log(y) + A1 * math.log(r1) - A2 * math.log(r2)
            + lg(A1 + alpha1) + lg(alpha2) + lg(A2) - lg(A2 + alpha2) - lg(alpha1) - lg(A1)
            - (A1 + alpha1) * math.log(r1 + y) + (A2 + alpha2) * math.log(r2 + y))


class InverseGammaFamily(GammaFamily):
    """``y ~ IG(alpha, beta)`` (``1/y ~ G(alpha, beta)``); conjugate analysis on ``z = 1/y``."""

    name = "inverse-gamma"

    def z(self, y, ctx):
        return 1.0 / y

    def log_base_measure(self, y, ctx):
        return -(ctx.alpha + 1.0) * math.log(y)

    def mean_from_param(self, param, ctx):
        if ctx.alpha <= 1.0:
            return math.inf
        return param / (ctx.alpha - 1.0)

    def param_from_mean(self, mu, ctx):
        return mu * (ctx.alpha - 1.0)

    def forecast_logpdf(self, params, y, ctx=None):
        ctx = self.resolve(ctx)
        y = self.check_obs(y, ctx)
        # density of 1/y under the gamma predictive, times the Jacobian 1/y^2
        return super().forecast_logpdf(params, 1.0 / y, ctx) - 2.0 * math.log(y)

    def forecast_moments(self, params, ctx=None):
        ctx = self.resolve(ctx)
        alpha, r = ctx.alpha, params.r
        A = self._shape(params, ctx)
        if alpha <= 1.0:
            return math.inf, math.inf
        mean = A / (r * (alpha - 1.0))
        if alpha <= 2.0:
            return mean, math.inf
        e_b2 = A * (A + 1.0) / (r * r)
        var = e_b2 / ((alpha - 1.0) ** 2 * (alpha - 2.0)) + (A / (r * r)) / (alpha - 1.0) ** 2
        return mean, var

    def forecast_cdf(self, params, y, ctx=None):
        if y <= 0.0:
            return 0.0
        return 1.0 - super().forecast_cdf(params, 1.0 / y, ctx)

    def forecast_quantile(self, params, p, ctx=None):
        if not 0.0 < p < 1.0:
            raise DomainError(f"probability must lie in (0, 1), got {p!r}")
        return 1.0 / super().forecast_quantile(params, 1.0 - p, ctx)

    def obs_law(self, param, ctx):
        return stats.invgamma(ctx.alpha, scale=np.asarray(param))

    def obs_logpdf(self, param, y, ctx=None):
        ctx = self.resolve(ctx)
        return float(stats.invgamma.logpdf(y, ctx.alpha, scale=param))


# ------------------------------------------------------------ volatility

VOLATILITY_ALPHA = 0.5


def squared_returns(x) -> np.ndarray:
    """Squared returns, the gamma-family response of the volatility model.

    With ``x_t | sigma_t ~ N(0, sigma_t^2)``, ``x_t^2 ~ G(1/2, 1/(2 sigma_t^2))``;
    use :class:`GammaFamily` with ``alpha = 1/2``.
    """
    x = np.asarray(x, dtype=float)
    y = x * x
    if np.any(y <= 0.0):
        raise ObservationError("zero returns have no positive square; drop or jitter them")
    return y


def volatility_posterior(post: ConjugateParams):
    """Law of ``sigma^2`` given a gamma-family posterior fitted with ``alpha = 1/2``.

    ``beta = 1/(2 sigma^2) ~ G(s/2 + 1, r)`` so ``sigma^2 ~ IG(s/2 + 1, r/2)``
    (shape, scale); its mean is ``r/s``.
    """
    return stats.invgamma(0.5 * post.s + 1.0, scale=0.5 * post.r)


def ewma_variance(y2, delta: float) -> float:
    """Exponentially weighted mean ``sum delta^i y2_{t-i} / sum delta^i`` (``i >= 1``),
    which equals ``r/s`` of a gamma discount run on ``y2`` from ``r = s = 0``."""
    y2 = np.asarray(y2, dtype=float)[::-1]
    w = delta ** np.arange(1, y2.size + 1)
    return float(w @ y2 / w.sum())


# --------------------------------------------------------------- Weibull


class WeibullFamily(ResponseFamily):
    """Weibull with known shape ``nu``: ``p(y|lambda) = nu y^(nu-1) exp(-y^nu/lambda)/lambda``.

    ``1/lambda ~ G(s - 1, r)``; the linear predictor is ``log lambda`` and the
    conjugate analysis runs on ``z = y^nu``. ``nu = 1`` is the exponential.
    """

    name = "weibull"
    param_name = "lambda"
    context_fields = ("nu",)
    support = (0.0, math.inf, False)

    def z(self, y, ctx):
        return y ** ctx.nu

    def cumulant(self, gamma, ctx):
        return -math.log(-gamma)

    def log_base_measure(self, y, ctx):
        return math.log(ctx.nu) + (ctx.nu - 1.0) * math.log(y)

    def natural_from_param(self, param, ctx):
        return -1.0 / param

    def eta_from_param(self, param, ctx):
        return np.log(param)

    def param_from_eta(self, eta, ctx):
        return np.exp(eta)

    def mean_from_param(self, param, ctx):
        return np.asarray(param) ** (1.0 / ctx.nu) * math.gamma(1.0 + 1.0 / ctx.nu)

    def param_from_mean(self, mu, ctx):
        return (np.asarray(mu) / math.gamma(1.0 + 1.0 / ctx.nu)) ** ctx.nu

    def _params_ok(self, r, s, ctx):
        return r > 0.0 and s > 1.0

    def _match_closed(self, pm, ctx):
        f, q = pm
        return ConjugateParams(math.exp(f) / q, (1.0 + q) / q)

    def _match_exact(self, pm, ctx):
        f, q = pm
        a = inverse_trigamma(q)
        return ConjugateParams(math.exp(f + float(digamma(a))), a + 1.0)

    def matching_moments(self, params, ctx=None):
        r, s = params
        return PredictorMoments(math.log(r / (s - 1.0)), 1.0 / (s - 1.0))

    def predictor_moments(self, params, ctx=None, approx=ApproxMode.EXACT):
        r, s = params
        return PredictorMoments(math.log(r) - float(digamma(s - 1.0, approx)), float(trigamma(s - 1.0, approx)))

    def _discount(self, post, delta, ctx, ctx_next, approx):
        r, s = post
        if approx is ApproxMode.PAPER:
            return ConjugateParams(delta * r, delta * s)
        return ConjugateParams(delta * r, delta * (s - 2.0) + 2.0)

    def forecast_logpdf(self, params, y, ctx=None):
        ctx = self.resolve(ctx)
        y = self.check_obs(y, ctx)
        nu, (r, s) = ctx.nu, params
        log_y = math.log(y)
        return (math.log(nu) + math.log(s - 1.0) + (s - 1.0) * math.log(r)
                + (nu - 1.0) * log_y - s * float(np.logaddexp(math.log(r), nu * log_y)))

    def response_moment(self, params, k: float, ctx=None) -> float:
        """``E(y^k)`` under the predictive; ``inf`` when it diverges."""
        ctx = self.resolve(ctx)
        r, s = params
        c = k / ctx.nu
        a = s - 1.0
        if c >= a:
            return math.inf
        return math.exp(math.lgamma(1.0 + c) + c * math.log(r) + math.lgamma(a - c) - math.lgamma(a))

    def forecast_moments(self, params, ctx=None):
        m1 = self.response_moment(params, 1.0, ctx)
        m2 = self.response_moment(params, 2.0, ctx)
        return m1, (m2 - m1 * m1) if math.isfinite(m2) else math.inf

    def power_moments(self, params, ctx=None) -> tuple[float, float]:
        """Predictive mean and variance of ``y^nu``: ``r/(s-2)`` and ``r^2(s-1)/((s-2)^2(s-3))``."""
        r, s = params
        mean = r / (s - 2.0) if s > 2.0 else math.inf
        var = r * r * (s - 1.0) / ((s - 2.0) ** 2 * (s - 3.0)) if s > 3.0 else math.inf
        return mean, var

    def survivor(self, params, y, ctx=None) -> float:
        ctx = self.resolve(ctx)
        if y <= 0.0:
            return 1.0
        return math.exp(-(params.s - 1.0) * float(np.logaddexp(0.0, ctx.nu * math.log(y) - math.log(params.r))))

    def forecast_cdf(self, params, y, ctx=None):
        return 1.0 - self.survivor(params, y, ctx)

    def forecast_quantile(self, params, p, ctx=None):
        if not 0.0 < p < 1.0:
            raise DomainError(f"probability must lie in (0, 1), got {p!r}")
        ctx = self.resolve(ctx)
        r, s = params
        return (r * math.expm1(-math.log1p(-p) / (s - 1.0))) ** (1.0 / ctx.nu)

    def param_law(self, params, ctx):
        return stats.invgamma(params.s - 1.0, scale=params.r)

    def plugin_estimate(self, post, ctx=None):
        """``r/(s-1)``, the reciprocal of the posterior mean of ``1/lambda``; finite for all valid ``s``."""
        return post.r / (post.s - 1.0)

    def obs_law(self, param, ctx):
        return stats.weibull_min(ctx.nu, scale=np.asarray(param) ** (1.0 / ctx.nu))

    def obs_logpdf(self, param, y, ctx=None):
        ctx = self.resolve(ctx)
        nu = ctx.nu
        return math.log(nu) - math.log(param) + (nu - 1.0) * math.log(y) - y ** nu / param

    def sample_obs(self, param, ctx, rng, size=None):
        ctx = self.resolve(ctx)
        shape = size if size is not None else np.shape(param)
        u = rng.random(shape)
        return (-np.asarray(param) * np.log(u)) ** (1.0 / ctx.nu)

    def transition_log_jacobian(self, param, ctx):
        return -math.log(param)


class ExponentialFamily(WeibullFamily):
    name = "exponential"
    default_context = ObsContext(nu=1.0)


def weibull_log_bayes_factor(y: float, params1: ConjugateParams, params2: ConjugateParams,
                             nu: float) -> float:
    """``log H_t(1)`` between two Weibull models sharing ``nu``:
    ``log[(s1-1) r1^(s1-1) (r2+y^nu)^s2 / ((s2-1) r2^(s2-1) (r1+y^nu)^s1)]``."""
    r1, s1 = params1
    r2, s2 = params2
    w = y ** nu
    return (math.log(s1 - 1.0) + (s1 - 1.0) * math.log(r1) + s2 * math.log(r2 + w)
            - math.log(s2 - 1.0) - (s2 - 1.0) * math.log(r2) - s1 * math.log(r1 + w))


# ---------------------------------------------------------------- Pareto


class ParetoFamily(ResponseFamily):
    """``p(y|lambda) = lambda y^-(lambda+1)`` on ``y >= 1`` with ``lambda ~ G(s + 1, r)``.

    The linear predictor is ``log lambda``; the conjugate analysis runs on
    ``z = log y``. The state transition uses the log of the conditional mean
    ``lambda/(lambda - 1)``, which needs ``lambda > 1``.
    """

    name = "pareto"
    param_name = "lambda"
    support = (1.0, math.inf, True)

    def z(self, y, ctx):
        return math.log(y)

    def cumulant(self, gamma, ctx):
        return -math.log(-gamma)

    def log_base_measure(self, y, ctx):
        return -math.log(y)

    def natural_from_param(self, param, ctx):
        return -float(param)

    def eta_from_param(self, param, ctx):
        return np.log(param)

    def param_from_eta(self, eta, ctx):
        return np.exp(eta)

    def mean_from_param(self, param, ctx):
        param = np.asarray(param, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.where(param > 1.0, param / (param - 1.0), math.inf)
        return float(out) if out.ndim == 0 else out

    def param_from_mean(self, mu, ctx):
        return mu / (mu - 1.0)

    def _params_ok(self, r, s, ctx):
        return r > 0.0 and s + 1.0 > 0.0

    def _match_closed(self, pm, ctx):
        f, q = pm
        return ConjugateParams(math.exp(-f) / q, (1.0 - q) / q)

    def _match_exact(self, pm, ctx):
        f, q = pm
        A = inverse_trigamma(q)
        return ConjugateParams(math.exp(float(digamma(A)) - f), A - 1.0)

    def matching_moments(self, params, ctx=None):
        r, s = params
        return PredictorMoments(math.log((s + 1.0) / r), 1.0 / (s + 1.0))

    def predictor_moments(self, params, ctx=None, approx=ApproxMode.EXACT):
        r, s = params
        return PredictorMoments(float(digamma(s + 1.0, approx)) - math.log(r), float(trigamma(s + 1.0, approx)))

    def _discount(self, post, delta, ctx, ctx_next, approx):
        return ConjugateParams(delta * post.r, delta * post.s)

    def _pareto_logpdf(self, params, y):
        r, s = params
        ly = math.log(y)
        return math.log(s + 1.0) + (s + 1.0) * math.log(r) - ly - (s + 2.0) * math.log(r + ly)

    def forecast_logpdf(self, params, y, ctx=None):
        ctx = self.resolve(ctx)
        y = self.check_obs(y, ctx)
        return self._pareto_logpdf(params, y)

    def forecast_moments(self, params, ctx=None):
        # E(y) = E(lambda/(lambda-1)) diverges because the Gamma law of lambda
        # puts mass on (0, 1]
        return math.inf, math.inf

    def log_moments(self, params, ctx=None) -> tuple[float, float]:
        """Predictive mean and variance of ``log y``: ``r/s`` and ``2r^2/(s(s-1)) - r^2/s^2``."""
        r, s = params
        mean = r / s if s > 0.0 else math.inf
        var = 2.0 * r * r / (s * (s - 1.0)) - mean * mean if s > 1.0 else math.inf
        return mean, var

    def _pareto_survivor(self, params, y):
        if y <= 1.0:
            return 1.0
        r, s = params
        return (r / (r + math.log(y))) ** (s + 1.0)

    def forecast_cdf(self, params, y, ctx=None):
        return 1.0 - self._pareto_survivor(params, y)

    def forecast_quantile(self, params, p, ctx=None):
        if not 0.0 < p < 1.0:
            raise DomainError(f"probability must lie in (0, 1), got {p!r}")
        r, s = params
        return math.exp(r * math.expm1(-math.log1p(-p) / (s + 1.0)))

    def param_law(self, params, ctx):
        return gamma_law(params.s + 1.0, params.r)

    def plugin_estimate(self, post, ctx=None):
        return (post.s + 1.0) / post.r

    def obs_law(self, param, ctx):
        return stats.pareto(np.asarray(param))

    def obs_logpdf(self, param, y, ctx=None):
        return math.log(param) - (param + 1.0) * math.log(y)

    def sample_obs(self, param, ctx, rng, size=None):
        shape = size if size is not None else np.shape(param)
        u = rng.random(shape)
        return u ** (-1.0 / np.asarray(param))

    def transition_eta(self, param, ctx):
        param = np.asarray(param, dtype=float)
        if np.any(param <= 1.0):
            raise DomainError("Pareto state transition needs lambda > 1")
        out = np.log(param) - np.log(param - 1.0)
        return float(out) if out.ndim == 0 else out

    def param_from_transition_eta(self, eta, ctx):
        e = np.exp(eta)
        return e / (e - 1.0)

    def evolve(self, param_prev, omega, ctx=None):
        lam = np.asarray(param_prev, dtype=float)
        e = lam * np.exp(omega)
        return e / (e - lam + 1.0)

    def transition_log_jacobian(self, param, ctx):
        return -math.log(param) - math.log(param - 1.0)


def pareto_log_bayes_factor(y: float, params1: ConjugateParams, params2: ConjugateParams) -> float:
    """``log H_t(1)`` between two Pareto models:
    ``log[(s1+1) r1^(s1+1) (r2+log y)^(s2+2) / ((s2+1) r2^(s2+1) (r1+log y)^(s1+2))]``."""
    r1, s1 = params1
    r2, s2 = params2
    ly = math.log(y)
    return (math.log(s1 + 1.0) + (s1 + 1.0) * math.log(r1) + (s2 + 2.0) * math.log(r2 + ly)
            - math.log(s2 + 1.0) - (s2 + 1.0) * math.log(r2) - (s1 + 2.0) * math.log(r1 + ly))


class BetaViaParetoFamily(ParetoFamily):
    """Beta responses reducible to the Pareto model.

    ``variant="a"``: ``x ~ Beta(lambda, 1)`` and ``y = 1/x`` is Pareto.
    ``variant="b"``: ``x ~ Beta(1, lambda)`` and ``y = 1/(1 - x)`` is Pareto.
    """

    support = (0.0, 1.0, False)

    def __init__(self, variant: str = "a"):
        if variant not in ("a", "b"):
            raise DomainError(f"beta variant must be 'a' or 'b', got {variant!r}")
        self.variant = variant
        self.name = f"beta-{variant}"

    def to_pareto(self, x):
        return 1.0 / x if self.variant == "a" else 1.0 / (1.0 - x)

    def _log_jacobian(self, x):
        return -2.0 * math.log(x if self.variant == "a" else 1.0 - x)

    def z(self, y, ctx):
        return math.log(self.to_pareto(y))

    def log_base_measure(self, y, ctx):
        return -math.log(self.to_pareto(y)) + self._log_jacobian(y)

    def mean_from_param(self, param, ctx):
        return param / (param + 1.0) if self.variant == "a" else 1.0 / (param + 1.0)

    def param_from_mean(self, mu, ctx):
        return mu / (1.0 - mu) if self.variant == "a" else (1.0 - mu) / mu

    def forecast_logpdf(self, params, y, ctx=None):
        ctx = self.resolve(ctx)
        x = self.check_obs(y, ctx)
        return self._pareto_logpdf(params, self.to_pareto(x)) + self._log_jacobian(x)

    def forecast_moments(self, params, ctx=None):
        pdf = lambda x, k: x ** k * math.exp(self.forecast_logpdf(params, x, ctx))
        m1, _ = integrate.quad(pdf, 0.0, 1.0, args=(1,), limit=200)
        m2, _ = integrate.quad(pdf, 0.0, 1.0, args=(2,), limit=200)
        return m1, m2 - m1 * m1

    def forecast_cdf(self, params, y, ctx=None):
        if y <= 0.0:
            return 0.0
        if y >= 1.0:
            return 1.0
        S = self._pareto_survivor(params, self.to_pareto(y))
        return S if self.variant == "a" else 1.0 - S

    def forecast_quantile(self, params, p, ctx=None):
        if self.variant == "a":
            return 1.0 / super().forecast_quantile(params, 1.0 - p, ctx)
        return 1.0 - 1.0 / super().forecast_quantile(params, p, ctx)

    def obs_law(self, param, ctx):
        param = np.asarray(param)
        return stats.beta(param, 1.0) if self.variant == "a" else stats.beta(1.0, param)

    def obs_logpdf(self, param, y, ctx=None):
        return float(self.obs_law(param, None).logpdf(y))

    def sample_obs(self, param, ctx, rng, size=None):
        y = super().sample_obs(param, ctx, rng, size)
        return 1.0 / y if self.variant == "a" else 1.0 - 1.0 / y
