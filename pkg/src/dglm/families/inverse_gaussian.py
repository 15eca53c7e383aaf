"""Inverse-Gaussian responses with known shape ``lam``.

``p(y|mu) = sqrt(lam/(2 pi y^3)) exp(-lam (y - mu)^2 / (2 mu^2 y))`` has natural
parameter ``gamma = -1/mu^2``, ``b(gamma) = -2 sqrt(-gamma)`` and ``a = 2/lam``.
The conjugate prior ``exp(r gamma - s b(gamma))`` becomes, on ``mu``,

    p(mu) = 2 kappa(r, s) mu^-3 exp(-r/mu^2 + 2 s/mu),

    1/kappa = 1/r + (s/r) sqrt(pi/r) erfcx(-s/sqrt(r)).

No closed-form moment matching exists, so the family runs in discount mode only.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate, stats

from ..errors import UnsupportedCapabilityError
from ..special import ApproxMode, log_erfcx
from ..state_space import PredictorMoments
from .base import ConjugateParams, ResponseFamily

_LOG_2PI = math.log(2.0 * math.pi)


def log_inverse_kappa(r: float, s: float) -> float:
    """``log(1/kappa(r, s))``."""
    base = -math.log(r)
    if s == 0.0:
        return base
    tail = math.log(s / r) + 0.5 * math.log(math.pi / r) + log_erfcx(-s / math.sqrt(r))
    return float(np.logaddexp(base, tail))


def kappa(r: float, s: float) -> float:
    """Normalizing constant of the conjugate prior on ``mu``."""
    return math.exp(-log_inverse_kappa(r, s))


def prior_mean(r: float, s: float) -> float:
    """``E(mu) = kappa sqrt(pi/r) erfcx(-s/sqrt(r))``; ``sqrt(pi r)`` at ``s = 0``."""
    return math.exp(-log_inverse_kappa(r, s) + 0.5 * math.log(math.pi / r) + log_erfcx(-s / math.sqrt(r)))


class InverseGaussianFamily(ResponseFamily):
    name = "inverse-gaussian"
    param_name = "mu"
    has_closed_moment_matching = False
    context_fields = ("lam",)
    support = (0.0, math.inf, False)

    def dispersion(self, ctx):
        return 2.0 / ctx.lam

    def cumulant(self, gamma, ctx):
        return -2.0 * math.sqrt(-gamma)

    def log_base_measure(self, y, ctx):
        return 0.5 * (math.log(ctx.lam) - _LOG_2PI - 3.0 * math.log(y)) - 0.5 * ctx.lam / y

    def natural_from_param(self, param, ctx):
        return -1.0 / (param * param)

    def eta_from_param(self, param, ctx):
        return np.log(param)

    def param_from_eta(self, eta, ctx):
        return np.exp(eta)

    def mean_from_param(self, param, ctx):
        return param

    def param_from_mean(self, mu, ctx):
        return mu

    def _params_ok(self, r, s, ctx):
        return r > 0.0 and s >= 0.0

    def conjugate_from_moments(self, pm, ctx=None, matching="closed"):
        raise UnsupportedCapabilityError(
            "inverse-gaussian has no closed-form moment matching; run it in discount mode"
        )

    def matching_moments(self, params, ctx=None):
        raise UnsupportedCapabilityError("inverse-gaussian has no closed-form moment matching")

    def _u_moments(self, r: float, s: float) -> tuple[float, float, float]:
        """Normalized moments of ``log u`` with ``u = 1/mu`` (density ``prop. to u exp(-r u^2 + 2 s u)``)."""
        peak = (s + math.sqrt(s * s + 2.0 * r)) / (2.0 * r)  # mode of u exp(-r u^2 + 2 s u)
        g_peak = -r * peak * peak + 2.0 * s * peak

        def w(u):
            return u * math.exp(-r * u * u + 2.0 * s * u - g_peak) if u > 0.0 else 0.0

        width = 1.0 / math.sqrt(r)
        pts = [peak]
        hi = peak + 40.0 * width
        z0, _ = integrate.quad(w, 0.0, hi, points=pts, limit=200)
        z1, _ = integrate.quad(lambda u: math.log(u) * w(u), 0.0, hi, points=pts, limit=200)
        z2, _ = integrate.quad(lambda u: math.log(u) ** 2 * w(u), 0.0, hi, points=pts, limit=200)
        return z0, z1 / z0, z2 / z0

    def predictor_moments(self, params, ctx=None, approx=ApproxMode.EXACT):
        """Moments of ``log mu`` by quadrature (no digamma form exists)."""
        r, s = params
        _, e1, e2 = self._u_moments(r, s)
        return PredictorMoments(-e1, e2 - e1 * e1)

    def _discount(self, post, delta, ctx, ctx_next, approx):
        return ConjugateParams(delta * post.r, delta * post.s)

    def forecast_logpdf(self, params, y, ctx=None):
        ctx = self.resolve(ctx)
        y = self.check_obs(y, ctx)
        r, s = params
        lam = ctx.lam
        return (self.log_base_measure(y, ctx) - log_inverse_kappa(r, s)
                + log_inverse_kappa(r + 0.5 * lam * y, s + 0.5 * lam))

    def forecast_moments(self, params, ctx=None):
        # E(mu^2) diverges under the conjugate law (density ~ mu^-3 at infinity)
        return prior_mean(*params), math.inf

    def param_logpdf(self, params, x, ctx=None):
        r, s = params
        if x <= 0.0:
            return -math.inf
        return math.log(2.0) - log_inverse_kappa(r, s) - 3.0 * math.log(x) - r / (x * x) + 2.0 * s / x

    def param_support(self, params, ctx=None):
        return 0.0, math.inf

    def plugin_estimate(self, post, ctx=None):
        return prior_mean(*post)

    def param_law(self, params, ctx):
        raise UnsupportedCapabilityError("inverse-gaussian parameter law has no scipy form; use param_logpdf")

    def obs_law(self, param, ctx):
        param = np.asarray(param, dtype=float)
        return stats.invgauss(param / ctx.lam, scale=ctx.lam)

    def obs_logpdf(self, param, y, ctx=None):
        ctx = self.resolve(ctx)
        lam = ctx.lam
        return 0.5 * (math.log(lam) - _LOG_2PI - 3.0 * math.log(y)) - lam * (y - param) ** 2 / (2.0 * param * param * y)

    def transition_log_jacobian(self, param, ctx):
        return -math.log(param)
