"""Count responses: binomial, Poisson, negative binomial (and geometric)."""
from __future__ import annotations

import math

import numpy as np
from scipy import special as sc
from scipy import stats

from ..errors import ConjugateDomainError, ObservationError
from ..special import (
    ApproxMode,
    beta_shapes_from_logit_moments,
    digamma,
    inverse_digamma,
    inverse_trigamma,
    trigamma,
)
from ..state_space import PredictorMoments
from .base import ConjugateParams, ObsContext, ResponseFamily, expit, gamma_law, logit


class BinomialFamily(ResponseFamily):
    """``y ~ Bin(n, pi)`` with ``pi ~ Beta(r, s - r)`` and logit link."""

    name = "binomial"
    param_name = "pi"
    discrete = True
    context_fields = ("n",)
    support = (0.0, math.inf, True)

    def check_obs(self, y, ctx):
        y = super().check_obs(y, ctx)
        if y > ctx.n:
            raise ObservationError(f"binomial observation {y!r} exceeds n={ctx.n}")
        return y

    def z(self, y, ctx):
        return y / ctx.n

    def dispersion(self, ctx):
        return 1.0 / ctx.n

    def cumulant(self, gamma, ctx):
        return float(np.logaddexp(0.0, gamma))

    def log_base_measure(self, y, ctx):
        return float(sc.gammaln(ctx.n + 1) - sc.gammaln(y + 1) - sc.gammaln(ctx.n - y + 1))

    def natural_from_param(self, param, ctx):
        return float(logit(param))

    def eta_from_param(self, param, ctx):
        return logit(param)

    def param_from_eta(self, eta, ctx):
        return expit(eta)

    def mean_from_param(self, param, ctx):
        return ctx.n * param

    def param_from_mean(self, mu, ctx):
        return mu / ctx.n

    def _params_ok(self, r, s, ctx):
        return s > r > 0.0

    def _match_closed(self, pm, ctx):
        f, q = pm
        e = math.exp(f)
        return ConjugateParams((1.0 + e) / q, (2.0 + e + 1.0 / e) / q)

    def _match_exact(self, pm, ctx):
        a, b = beta_shapes_from_logit_moments(*pm)
        return ConjugateParams(a, a + b)

    def matching_moments(self, params, ctx=None):
        r, s = params
        return PredictorMoments(math.log(r / (s - r)), 1.0 / r + 1.0 / (s - r))

    def predictor_moments(self, params, ctx=None, approx=ApproxMode.EXACT):
        a, b = params.r, params.s - params.r
        return PredictorMoments(
            float(digamma(a, approx) - digamma(b, approx)),
            float(trigamma(a, approx) + trigamma(b, approx)),
        )

    def _discount(self, post, delta, ctx, ctx_next, approx):
        r, s = post
        if approx is ApproxMode.PAPER:
            return ConjugateParams(delta * r + 1.0 - delta, delta * s + 2.0 - delta)
        return ConjugateParams(delta * (r - 1.0) + 1.0, delta * (s - 2.0) + 2.0)

    def forecast_logpdf(self, params, y, ctx=None):
        ctx = self.resolve(ctx)
        y = self.check_obs(y, ctx)
        n, (r, s) = ctx.n, params
        return float(self.log_base_measure(y, ctx) + sc.betaln(r + y, s - r + n - y) - sc.betaln(r, s - r))

    def forecast_moments(self, params, ctx=None):
        ctx = self.resolve(ctx)
        n, a, b = ctx.n, params.r, params.s - params.r
        t = a + b
        return n * a / t, n * a * b * (t + n) / (t * t * (t + 1.0))

    def param_law(self, params, ctx):
        return stats.beta(params.r, params.s - params.r)

    def plugin_estimate(self, post, ctx=None):
        return post.r / post.s

    def obs_law(self, param, ctx):
        return stats.binom(ctx.n, param)

    def obs_logpdf(self, param, y, ctx=None):
        return float(stats.binom.logpmf(y, self.resolve(ctx).n, param))

    def transition_log_jacobian(self, param, ctx):
        return -math.log(param) - math.log1p(-param)


class PoissonFamily(ResponseFamily):
    """``y ~ Poisson(lambda)`` with ``lambda ~ G(r, s)`` and log link."""

    name = "poisson"
    param_name = "lambda"
    discrete = True
    support = (0.0, math.inf, True)

    def cumulant(self, gamma, ctx):
        return math.exp(gamma)

    def log_base_measure(self, y, ctx):
        return -float(sc.gammaln(y + 1))

    def natural_from_param(self, param, ctx):
        return math.log(param)

    def eta_from_param(self, param, ctx):
        return np.log(param)

    def param_from_eta(self, eta, ctx):
        return np.exp(eta)

    def mean_from_param(self, param, ctx):
        return param

    def param_from_mean(self, mu, ctx):
        return mu

    def _params_ok(self, r, s, ctx):
        return r > 0.0 and s > 0.0

    def _match_closed(self, pm, ctx):
        f, q = pm
        return ConjugateParams(1.0 / q, math.exp(-f) / q)

    def _match_exact(self, pm, ctx):
        f, q = pm
        r = inverse_trigamma(q)
        return ConjugateParams(r, math.exp(float(digamma(r)) - f))

    def matching_moments(self, params, ctx=None):
        r, s = params
        return PredictorMoments(math.log(r / s), 1.0 / r)

    def predictor_moments(self, params, ctx=None, approx=ApproxMode.EXACT):
        r, s = params
        return PredictorMoments(float(digamma(r, approx)) - math.log(s), float(trigamma(r, approx)))

    def _discount(self, post, delta, ctx, ctx_next, approx):
        r, s = post
        return ConjugateParams(delta * (r - 1.0) + 1.0, delta * s)

    def forecast_logpdf(self, params, y, ctx=None):
        ctx = self.resolve(ctx)
        y = self.check_obs(y, ctx)
        r, s = params
        return float(sc.gammaln(r + y) - sc.gammaln(r) - sc.gammaln(y + 1)
                     + r * math.log(s / (1.0 + s)) - y * math.log1p(s))

    def forecast_moments(self, params, ctx=None):
        r, s = params
        return r / s, r * (s + 1.0) / (s * s)

    def param_law(self, params, ctx):
        return gamma_law(params.r, params.s)

    def plugin_estimate(self, post, ctx=None):
        return post.r / post.s

    def obs_law(self, param, ctx):
        return stats.poisson(param)

    def obs_logpdf(self, param, y, ctx=None):
        return float(stats.poisson.logpmf(y, param))

    def transition_log_jacobian(self, param, ctx):
        return -math.log(param)


class NegativeBinomialFamily(ResponseFamily):
    """``y`` failures before the ``n``-th success, ``pi ~ Beta(n s + 1, r)``, logit link.

    Matching needs ``s > 0`` (finite predictive mean), i.e. ``q < 1 + e^f``.
    """

    name = "negative-binomial"
    param_name = "pi"
    discrete = True
    context_fields = ("n",)
    support = (0.0, math.inf, True)

    @staticmethod
    def _shapes(params, ctx):
        return ctx.n * params.s + 1.0, params.r

    def cumulant(self, gamma, ctx):
        return -ctx.n * math.log1p(-math.exp(gamma))

    def log_base_measure(self, y, ctx):
        n = ctx.n
        return float(sc.gammaln(y + n) - sc.gammaln(n) - sc.gammaln(y + 1))

    def natural_from_param(self, param, ctx):
        return math.log1p(-param)

    def eta_from_param(self, param, ctx):
        return logit(param)

    def param_from_eta(self, eta, ctx):
        return expit(eta)

    def mean_from_param(self, param, ctx):
        return ctx.n * (1.0 - param) / param

    def param_from_mean(self, mu, ctx):
        return ctx.n / (ctx.n + mu)

    def _params_ok(self, r, s, ctx):
        return r > 0.0 and ctx.n * s + 1.0 > 0.0

    @staticmethod
    def _domain_error(f, q, what):
        return ConjugateDomainError(
            f"negative-binomial matching at f={f:.6g}, q={q:.6g} gives {what} <= 1"
            " (infinite predictive mean); shrink q (e.g. smaller Omega or larger discount factor)"
        )

    def _match_closed(self, pm, ctx):
        f, q = pm
        if q >= 1.0 + math.exp(f):
            raise self._domain_error(f, q, "n s + 1")
        return ConjugateParams((1.0 + math.exp(-f)) / q, (1.0 + math.exp(f) - q) / (ctx.n * q))

    def _match_exact(self, pm, ctx):
        A, B = beta_shapes_from_logit_moments(*pm)
        if A <= 1.0:
            raise self._domain_error(pm.f, pm.q, "n s + 1")
        return ConjugateParams(B, (A - 1.0) / ctx.n)

    def matching_moments(self, params, ctx=None):
        A, B = self._shapes(params, self.resolve(ctx))
        return PredictorMoments(math.log(A / B), 1.0 / A + 1.0 / B)

    def clamp_moments(self, pm, ctx, matching="closed"):
        # first Beta shape pinned at 2 (n s = 1), keeping f
        if matching == "exact":
            B = inverse_digamma(float(digamma(2.0)) - pm.f)
            return PredictorMoments(pm.f, float(trigamma(2.0) + trigamma(B)))
        return PredictorMoments(pm.f, 0.5 * (1.0 + math.exp(pm.f)))

    def predictor_moments(self, params, ctx=None, approx=ApproxMode.EXACT):
        A, B = self._shapes(params, self.resolve(ctx))
        return PredictorMoments(
            float(digamma(A, approx) - digamma(B, approx)),
            float(trigamma(A, approx) + trigamma(B, approx)),
        )

    def _discount(self, post, delta, ctx, ctx_next, approx):
        r, s = post
        return ConjugateParams(delta * (r - 1.0) + 1.0, delta * ctx.n * s / ctx_next.n)

    def forecast_logpdf(self, params, y, ctx=None):
        ctx = self.resolve(ctx)
        y = self.check_obs(y, ctx)
        A, B = self._shapes(params, ctx)
        return float(self.log_base_measure(y, ctx) + sc.betaln(A + ctx.n, B + y) - sc.betaln(A, B))

    def forecast_moments(self, params, ctx=None):
        ctx = self.resolve(ctx)
        n = ctx.n
        A, B = self._shapes(params, ctx)
        if A <= 1.0:
            return math.inf, math.inf
        mean = params.r / params.s
        if A <= 2.0:
            return mean, math.inf
        e1 = (A + B - 1.0) / (A - 1.0)  # E(1/pi)
        e2 = e1 * (A + B - 2.0) / (A - 2.0)  # E(1/pi^2)
        odds_var = e2 - e1 * e1  # Var((1 - pi)/pi)
        return mean, n * (e2 - e1) + n * n * odds_var

    def param_law(self, params, ctx):
        return stats.beta(*self._shapes(params, ctx))

    def plugin_estimate(self, post, ctx=None):
        a, b = self._shapes(post, self.resolve(ctx))
        return a / (a + b)

    def obs_law(self, param, ctx):
        return stats.nbinom(ctx.n, param)

    def obs_logpdf(self, param, y, ctx=None):
        return float(stats.nbinom.logpmf(y, self.resolve(ctx).n, param))

    def evolve(self, param_prev, omega, ctx=None):
        # the odds of failure follow the random walk: logit pi_t = logit pi_{t-1} - omega
        return expit(logit(param_prev) - omega)

    def transition_log_jacobian(self, param, ctx):
        return -math.log(param) - math.log1p(-param)


class GeometricFamily(NegativeBinomialFamily):
    """Negative binomial with a single success (support ``{0, 1, ...}``)."""

    name = "geometric"
    default_context = ObsContext(n=1)
