"""Shared machinery for response families.

Every family writes the observation density in exponential-family form

    p(y | gamma) = exp((z(y) gamma - b(gamma)) / a) c(y)

and places the conjugate prior ``exp(r gamma - s b(gamma))`` on the natural
parameter. Each family also names a *natural-scale parameter* (a success
probability, a rate, a level) on which the conjugate prior is a standard
Beta / Gamma / Normal / inverse-Gamma law; power discounting raises that
standard density to the power ``delta``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

import numpy as np
from scipy import integrate, optimize, stats

from ..errors import (
    ConjugateDomainError,
    ContextError,
    DomainError,
    ObservationError,
    UnsupportedCapabilityError,
)
from ..special import ApproxMode
from ..state_space import PredictorMoments

__all__ = ["ConjugateParams", "ObsContext", "ResponseFamily", "logit", "expit"]


@dataclass(frozen=True)
class ConjugateParams:
    """Conjugate hyperparameters ``(r, s)``; domains are family specific."""

    r: float
    s: float

    def __iter__(self):
        yield self.r
        yield self.s


@dataclass(frozen=True)
class ObsContext:
    """Known nuisance quantities. Each family reads only its own field.

    n: binomial trials / negative-binomial successes; V: (log-)normal
    observation variance; alpha: gamma shape; nu: Weibull shape;
    lam: inverse-Gaussian shape.
    """

    n: int | None = None
    V: float | None = None
    alpha: float | None = None
    nu: float | None = None
    lam: float | None = None

    def merged(self, defaults: "ObsContext") -> "ObsContext":
        updates = {f.name: getattr(defaults, f.name) for f in fields(self)
                   if getattr(self, f.name) is None and getattr(defaults, f.name) is not None}
        return replace(self, **updates) if updates else self


def logit(p):
    return np.log(p) - np.log1p(-p)


def expit(x):
    return 1.0 / (1.0 + np.exp(-x))


_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def normal_logpdf(x: float, mean: float, var: float) -> float:
    return -_LOG_SQRT_2PI - 0.5 * math.log(var) - 0.5 * (x - mean) ** 2 / var


class ResponseFamily:
    """Interface and default implementations for a response distribution.

    Subclasses set the class attributes and override the formula methods.
    Methods taking ``params`` expect the *prior-form* conjugate parameters:
    a posterior returned by :meth:`posterior_params` is expressed in the same
    parameterization, so every density/moment method applies to it as well.
    """

    name: str = "abstract"
    param_name: str = "theta"
    discrete: bool = False
    has_closed_moment_matching: bool = True
    has_closed_forecast_moments: bool = True
    context_fields: tuple[str, ...] = ()
    default_context: ObsContext = ObsContext()
    # support of y: (lower, upper, lower_inclusive)
    support: tuple[float, float, bool] = (-math.inf, math.inf, False)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name!r}>"

    # ------------------------------------------------------------ context
    def resolve(self, ctx: ObsContext | None) -> ObsContext:
        ctx = (ctx or ObsContext()).merged(self.default_context)
        for name in self.context_fields:
            value = getattr(ctx, name)
            if value is None:
                raise ContextError(f"{self.name} family requires context field {name!r}")
            if not (math.isfinite(value) and value > 0):
                raise ContextError(f"context field {name!r} must be positive, got {value!r}")
            if name == "n" and int(value) != value:
                raise ContextError(f"context field 'n' must be an integer, got {value!r}")
        return ctx

    # ------------------------------------------------------------ support
    def check_obs(self, y: float, ctx: ObsContext) -> float:
        y = float(y)
        lo, hi, inclusive = self.support
        ok = math.isfinite(y) and (y >= lo if inclusive else y > lo) and y < hi
        if ok and self.discrete and y != int(y):
            ok = False
        if not ok:
            raise ObservationError(f"observation {y!r} outside the {self.name} support")
        return y

    # ------------------------------------------------- exponential family
    def z(self, y: float, ctx: ObsContext) -> float:
        return y

    def dispersion(self, ctx: ObsContext) -> float:
        """``a(phi)``."""
        return 1.0

    def cumulant(self, gamma: float, ctx: ObsContext) -> float:
        """``b(gamma)``."""
        raise NotImplementedError

    def log_base_measure(self, y: float, ctx: ObsContext) -> float:
        """``log c(y, phi)``."""
        raise NotImplementedError

    def natural_from_param(self, param: float, ctx: ObsContext) -> float:
        raise NotImplementedError

    # ------------------------------------------------------ link functions
    def eta_from_param(self, param, ctx: ObsContext):
        raise NotImplementedError

    def param_from_eta(self, eta, ctx: ObsContext):
        raise NotImplementedError

    def mean_from_param(self, param, ctx: ObsContext):
        raise NotImplementedError

    def param_from_mean(self, mu, ctx: ObsContext):
        raise NotImplementedError

    def link(self, mu, ctx: ObsContext | None = None):
        ctx = self.resolve(ctx)
        return self.eta_from_param(self.param_from_mean(mu, ctx), ctx)

    def inverse_link(self, eta, ctx: ObsContext | None = None):
        ctx = self.resolve(ctx)
        return self.mean_from_param(self.param_from_eta(eta, ctx), ctx)

    # --------------------------------------------------- conjugate algebra
    def check_params(self, params: ConjugateParams, ctx: ObsContext) -> ConjugateParams:
        r, s = params
        if not (math.isfinite(r) and math.isfinite(s)):
            raise ConjugateDomainError(f"{self.name}: non-finite conjugate parameters {params}")
        if not self._params_ok(r, s, ctx):
            raise ConjugateDomainError(
                f"{self.name}: conjugate parameters (r={r:.6g}, s={s:.6g}) outside domain"
            )
        return params

    def _params_ok(self, r: float, s: float, ctx: ObsContext) -> bool:
        return True

    def conjugate_from_moments(self, pm: PredictorMoments, ctx: ObsContext | None = None,
                               matching: str = "closed") -> ConjugateParams:
        """Conjugate parameters whose ``eta`` moments equal ``(f, q)``.

        ``matching="closed"`` solves the first-order equations
        (``psi ~ log``, ``psi' ~ 1/x``) in closed form; ``matching="exact"``
        solves the exact digamma/trigamma equations numerically, so that the
        matched prior really has moments ``(f, q)`` under :meth:`predictor_moments`.
        """
        ctx = self.resolve(ctx)
        if matching not in ("closed", "exact"):
            raise DomainError(f"matching must be 'closed' or 'exact', got {matching!r}")
        try:
            params = self._match_closed(pm, ctx) if matching == "closed" else self._match_exact(pm, ctx)
        except (OverflowError, ZeroDivisionError) as exc:
            raise ConjugateDomainError(f"{self.name}: moment matching failed at (f={pm.f:.6g}, q={pm.q:.6g}): "
                                       f"{exc}") from exc
        return self.check_params(params, ctx)

    def _match_closed(self, pm: PredictorMoments, ctx: ObsContext) -> ConjugateParams:
        raise UnsupportedCapabilityError(f"{self.name}: no closed-form moment matching")

    def _match_exact(self, pm: PredictorMoments, ctx: ObsContext) -> ConjugateParams:
        raise UnsupportedCapabilityError(f"{self.name}: no exact moment matching")

    def matching_moments(self, params: ConjugateParams, ctx: ObsContext | None = None) -> PredictorMoments:
        """Approximate ``(E eta, Var eta)`` used by the matching equations
        (``psi ~ log``, ``psi' ~ 1/x``); exact inverse of :meth:`conjugate_from_moments`."""
        raise UnsupportedCapabilityError(f"{self.name}: no closed-form moment matching")

    def clamp_moments(self, pm: PredictorMoments, ctx: ObsContext, matching: str = "closed") -> PredictorMoments:
        """Shrink ``q`` onto the matching domain boundary, keeping ``f`` (clamp policy)."""
        raise UnsupportedCapabilityError(f"{self.name}: nothing to clamp")

    def posterior_params(self, params: ConjugateParams, y: float, ctx: ObsContext | None = None) -> ConjugateParams:
        ctx = self.resolve(ctx)
        y = self.check_obs(y, ctx)
        a = self.dispersion(ctx)
        return ConjugateParams(params.r + self.z(y, ctx) / a, params.s + 1.0 / a)

    def predictor_moments(self, params: ConjugateParams, ctx: ObsContext | None = None,
                          approx: ApproxMode | str = ApproxMode.EXACT) -> PredictorMoments:
        """Mean and variance of ``eta`` under the conjugate law ``params``."""
        raise NotImplementedError

    def posterior_predictor_moments(self, post: ConjugateParams, ctx: ObsContext | None = None,
                                    approx: ApproxMode | str = ApproxMode.EXACT) -> PredictorMoments:
        return self.predictor_moments(post, ctx, approx)

    def power_discount(self, post: ConjugateParams, delta: float, ctx_next: ObsContext | None = None,
                       approx: ApproxMode | str = ApproxMode.EXACT,
                       ctx: ObsContext | None = None) -> ConjugateParams:
        """Next prior from the posterior raised to the power ``delta``.

        ``ctx`` is the context the posterior was formed under, ``ctx_next``
        the context of the next observation (both default to each other).
        """
        if not (0.0 < delta <= 1.0):
            raise DomainError(f"discount factor must lie in (0, 1], got {delta!r}")
        ctx = self.resolve(ctx or ctx_next)
        ctx_next = self.resolve(ctx_next or ctx)
        return self._discount(post, float(delta), ctx, ctx_next, ApproxMode.parse(approx))

    def _discount(self, post, delta, ctx, ctx_next, approx) -> ConjugateParams:
        raise NotImplementedError

    # ---------------------------------------------------- forecast law
    def forecast_logpdf(self, params: ConjugateParams, y: float, ctx: ObsContext | None = None) -> float:
        raise NotImplementedError

    def forecast_pdf(self, params, y, ctx=None) -> float:
        return math.exp(self.forecast_logpdf(params, y, ctx))

    def forecast_moments(self, params: ConjugateParams, ctx: ObsContext | None = None) -> tuple[float, float]:
        """Predictive mean and variance of ``y``; ``inf`` flags an undefined moment."""
        raise NotImplementedError

    def forecast_cdf(self, params: ConjugateParams, y: float, ctx: ObsContext | None = None) -> float:
        ctx = self.resolve(ctx)
        lo, hi, _ = self.support
        if self.discrete:
            if y < lo:
                return 0.0
            ks = np.arange(int(lo), int(math.floor(y)) + 1)
            return float(min(1.0, sum(self.forecast_pdf(params, k, ctx) for k in ks)))
        if y <= lo:
            return 0.0
        start = lo if math.isfinite(lo) else min(y, 0.0) - 1.0
        head = 0.0
        if not math.isfinite(lo):
            head, _ = integrate.quad(lambda x: self.forecast_pdf(params, x, ctx), -math.inf, start)
        body, _ = integrate.quad(lambda x: self.forecast_pdf(params, x, ctx), start, y, limit=200)
        return float(min(1.0, head + body))

    def forecast_quantile(self, params: ConjugateParams, p: float, ctx: ObsContext | None = None) -> float:
        if not 0.0 < p < 1.0:
            raise DomainError(f"probability must lie in (0, 1), got {p!r}")
        ctx = self.resolve(ctx)
        lo, hi, _ = self.support
        if self.discrete:
            total, k = 0.0, int(lo)
            upper = int(hi) if math.isfinite(hi) else 10**6
            while k <= upper:
                total += self.forecast_pdf(params, k, ctx)
                if total >= p:
                    return float(k)
                k += 1
            return float(upper)
        a = lo + 1e-12 if math.isfinite(lo) else -1.0
        b = max(1.0, a + 1.0)
        while self.forecast_cdf(params, b, ctx) < p:
            b *= 2.0 if b > 0 else -1.0
            if b > 1e300:
                return math.inf
        if not math.isfinite(lo):
            while self.forecast_cdf(params, a, ctx) > p:
                a = 2.0 * a - 1.0
        return float(optimize.brentq(lambda x: self.forecast_cdf(params, x, ctx) - p, a, b, xtol=1e-10))

    # ------------------------------------------- natural-scale parameter
    def param_logpdf(self, params: ConjugateParams, x: float, ctx: ObsContext | None = None) -> float:
        """Log density of the natural-scale parameter under the conjugate law."""
        return float(self.param_law(params, self.resolve(ctx)).logpdf(x))

    def param_law(self, params: ConjugateParams, ctx: ObsContext):
        """Frozen ``scipy.stats`` distribution of the natural-scale parameter."""
        raise NotImplementedError

    def param_support(self, params: ConjugateParams, ctx: ObsContext | None = None) -> tuple[float, float]:
        return tuple(self.param_law(params, self.resolve(ctx)).support())

    def plugin_estimate(self, post: ConjugateParams, ctx: ObsContext | None = None) -> float:
        """Point estimate of the natural-scale parameter (posterior mean)."""
        return float(self.param_law(post, self.resolve(ctx)).mean())

    def obs_logpdf(self, param: float, y: float, ctx: ObsContext | None = None) -> float:
        """``log p(y | param)``."""
        raise NotImplementedError

    def obs_law(self, param, ctx: ObsContext):
        """Frozen ``scipy.stats`` distribution of ``y`` given the parameter."""
        raise NotImplementedError

    # ------------------------------------------------- state transitions
    def transition_eta(self, param, ctx: ObsContext):
        """Scale on which the parameter performs a Gaussian random walk."""
        return self.eta_from_param(param, ctx)

    def param_from_transition_eta(self, eta, ctx: ObsContext):
        return self.param_from_eta(eta, ctx)

    def transition_log_jacobian(self, param: float, ctx: ObsContext) -> float:
        """``log |d transition_eta / d param|``."""
        raise NotImplementedError

    def evolve(self, param_prev, omega, ctx: ObsContext | None = None):
        """Parameter after one random-walk step with innovation ``omega``."""
        ctx = self.resolve(ctx)
        return self.param_from_transition_eta(self.transition_eta(param_prev, ctx) + omega, ctx)

    def transition_logpdf(self, now: float, prev: float, Omega: float, ctx: ObsContext | None = None) -> float:
        """Log density of the parameter at ``t`` given its value at ``t-1``."""
        ctx = self.resolve(ctx)
        if not Omega > 0:
            raise DomainError(f"Omega must be positive, got {Omega!r}")
        e_now = float(self.transition_eta(now, ctx))
        e_prev = float(self.transition_eta(prev, ctx))
        return normal_logpdf(e_now, e_prev, Omega) + self.transition_log_jacobian(now, ctx)

    # ------------------------------------------------------- simulation
    def sample_obs(self, param, ctx: ObsContext | None, rng: np.random.Generator, size=None):
        """Draw observations by inverse-CDF transform of uniforms from ``rng``."""
        ctx = self.resolve(ctx)
        shape = size if size is not None else np.shape(param)
        u = rng.random(shape)
        return self.obs_law(param, ctx).ppf(u)


def gamma_law(shape: float, rate: float):
    return stats.gamma(shape, scale=1.0 / rate)
