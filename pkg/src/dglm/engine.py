"""Sequential filtering and forecasting.

Two exclusive modes:

* ``STATE_SPACE``: the linear predictor follows a :class:`StateSpaceModel`;
  each step matches the predictor moments to a conjugate prior, updates it
  with ``y_t`` and maps the posterior predictor moments back onto the state
  with the Bayes linear update.
* ``DISCOUNT``: no state vector; the conjugate parameters ``(r, s)`` are
  carried forward by power discounting the posterior.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    ConjugateDomainError,
    DomainError,
    StructuralError,
    UnsupportedCapabilityError,
)
from .families import ConjugateParams, ObsContext, ResponseFamily, get_family
from .special import ApproxMode
from .state_space import (
    PredictorMoments,
    StateMoments,
    StateSpaceModel,
    bayes_linear_update,
    discount_innovation,
    k_step_predictor,
    predictor_moments,
    propagate,
)

logger = logging.getLogger(__name__)


class Mode(str, Enum):
    STATE_SPACE = "state-space"
    DISCOUNT = "discount"

    @classmethod
    def parse(cls, value: "Mode | str") -> "Mode":
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("_", "-")
        if key in ("statespace", "ss"):
            key = "state-space"
        if key in ("power-discount", "powerdiscount"):
            key = "discount"
        try:
            return cls(key)
        except ValueError:
            raise DomainError(f"unknown mode {value!r}; use 'state-space' or 'discount'") from None


class ClampPolicy(str, Enum):
    ERROR = "error"
    LOG = "log"

    @classmethod
    def parse(cls, value: "ClampPolicy | str") -> "ClampPolicy":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise DomainError(f"unknown clamp policy {value!r}; use 'error' or 'log'") from None


@dataclass(frozen=True)
class EngineConfig:
    """Everything a run needs besides the data.

    In state-space mode ``delta`` is optional; when given, the innovation
    covariance at each step is ``(1 - delta)/delta * P_{t-1}`` instead of
    ``model.Omega``. In discount mode ``delta`` and ``initial`` are required.
    ``matching`` selects closed-form (first-order) or exact digamma/trigamma
    moment matching, see :meth:`ResponseFamily.conjugate_from_moments`.
    """

    family: ResponseFamily
    mode: Mode = Mode.STATE_SPACE
    model: StateSpaceModel | None = None
    delta: float | None = None
    initial: ConjugateParams | None = None
    approx: ApproxMode = ApproxMode.EXACT
    clamp_policy: ClampPolicy = ClampPolicy.ERROR
    matching: str = "closed"

    def __post_init__(self):
        if isinstance(self.family, str):
            object.__setattr__(self, "family", get_family(self.family))
        object.__setattr__(self, "mode", Mode.parse(self.mode))
        object.__setattr__(self, "approx", ApproxMode.parse(self.approx))
        object.__setattr__(self, "clamp_policy", ClampPolicy.parse(self.clamp_policy))
        if self.matching not in ("closed", "exact"):
            raise DomainError(f"matching must be 'closed' or 'exact', got {self.matching!r}")
        if self.delta is not None:
            if not (isinstance(self.delta, (int, float)) and 0.0 < self.delta <= 1.0):
                raise DomainError(f"discount factor must lie in (0, 1], got {self.delta!r}")
            object.__setattr__(self, "delta", float(self.delta))
        if self.mode is Mode.STATE_SPACE:
            if self.model is None:
                raise StructuralError("state-space mode needs a state model")
            if not self.family.has_closed_moment_matching:
                raise UnsupportedCapabilityError(
                    f"{self.family.name} has no closed-form moment matching; use discount mode"
                )
            if self.model.Omega is None and self.delta is None:
                raise StructuralError("state-space mode needs model.Omega or a discount factor")
        else:
            if self.delta is None:
                raise StructuralError("discount mode needs a discount factor")
            if self.initial is None:
                raise StructuralError("discount mode needs initial conjugate parameters (r0, s0)")
            if not isinstance(self.initial, ConjugateParams):
                object.__setattr__(self, "initial", ConjugateParams(*map(float, self.initial)))


@dataclass(frozen=True)
class FilterState:
    """Carry between steps.

    State-space mode uses ``moments`` (posterior of ``theta_{t-1}``); discount
    mode uses ``prior`` (conjugate parameters for the next observation).
    ``ctx`` is the context of the last processed observation.
    """

    t: int
    moments: StateMoments | None = None
    prior: ConjugateParams | None = None
    ctx: ObsContext | None = None


@dataclass(frozen=True)
class StepRecord:
    t: int
    y: float | None
    f: float
    q: float
    r: float
    s: float
    f_star: float | None
    q_star: float | None
    m: np.ndarray | None
    P: np.ndarray | None
    one_step_log_density: float | None
    forecast_mean: float
    forecast_variance: float
    posterior_mean: float | None
    post_r: float | None = None
    post_s: float | None = None
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class ForecastRecord:
    ell: int
    f: float
    q: float
    r: float
    s: float
    mean: float
    variance: float
    family: ResponseFamily = field(repr=False, default=None)
    ctx: ObsContext = field(repr=False, default=None)

    @property
    def params(self) -> ConjugateParams:
        return ConjugateParams(self.r, self.s)

    def logpdf(self, y: float) -> float:
        return self.family.forecast_logpdf(self.params, y, self.ctx)

    def cdf(self, y: float) -> float:
        return self.family.forecast_cdf(self.params, y, self.ctx)

    def quantile(self, p: float) -> float:
        return self.family.forecast_quantile(self.params, p, self.ctx)


@dataclass
class FilterResult:
    records: list[StepRecord]
    state: FilterState

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    def __getitem__(self, i):
        return self.records[i]

    @property
    def log_predictive_score(self) -> float:
        return math.fsum(r.one_step_log_density for r in self.records if r.one_step_log_density is not None)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)


def initial_state(config: EngineConfig) -> FilterState:
    if config.mode is Mode.STATE_SPACE:
        return FilterState(0, moments=config.model.initial_moments())
    return FilterState(0, prior=config.initial)


def _is_missing(y) -> bool:
    return y is None or (isinstance(y, float) and math.isnan(y))


def _match(config: EngineConfig, pm: PredictorMoments, ctx: ObsContext, warnings: list[str]):
    fam = config.family
    try:
        return fam.conjugate_from_moments(pm, ctx, config.matching)
    except ConjugateDomainError as exc:
        if config.clamp_policy is ClampPolicy.ERROR:
            raise
        clamped = fam.clamp_moments(pm, ctx, config.matching)
        msg = f"clamped q {pm.q:.6g} -> {clamped.q:.6g} ({exc})"
        logger.warning(msg)
        warnings.append(msg)
        return fam.conjugate_from_moments(clamped, ctx, config.matching)


def _innovation(config: EngineConfig, state: FilterState):
    if config.delta is not None:
        return discount_innovation(state.moments.P, config.delta)
    return None


def filter_step(state: FilterState, config: EngineConfig, y, ctx: ObsContext | None = None):
    """One prior -> predictive -> posterior cycle. Returns ``(new_state, record)``."""
    fam = config.family
    ctx = fam.resolve(ctx or state.ctx)
    t = state.t + 1
    warnings: list[str] = []
    missing = _is_missing(y)

    if config.mode is Mode.STATE_SPACE:
        model = config.model
        h, R = propagate(state.moments, model, _innovation(config, state))
        pm = predictor_moments(h, R, model.F)
        prior = _match(config, pm, ctx, warnings)
        mean, var = fam.forecast_moments(prior, ctx)
        if missing:
            new = StateMoments(h, R)
            rec = StepRecord(t, None, pm.f, pm.q, prior.r, prior.s, None, None, new.m, new.P, None,
                             mean, var, None, warnings=tuple(warnings))
            return FilterState(t, moments=new, ctx=ctx), rec
        logd = fam.forecast_logpdf(prior, y, ctx)
        post = fam.posterior_params(prior, y, ctx)
        pstar = fam.posterior_predictor_moments(post, ctx, config.approx)
        new = bayes_linear_update(h, R, model.F, pm, pstar, warnings)
        rec = StepRecord(t, float(y), pm.f, pm.q, prior.r, prior.s, pstar.f, pstar.q, new.m, new.P, logd,
                         mean, var, fam.plugin_estimate(post, ctx), post.r, post.s, tuple(warnings))
        return FilterState(t, moments=new, ctx=ctx), rec

    prior = state.prior
    if state.ctx is not None and ctx != state.ctx:
        # re-express the carried prior under the new context (n or alpha may change)
        prior = fam.power_discount(prior, 1.0, ctx, config.approx, state.ctx)
    prior = fam.check_params(prior, ctx)
    pm = fam.predictor_moments(prior, ctx, config.approx)
    mean, var = fam.forecast_moments(prior, ctx)
    if missing:
        nxt = fam.power_discount(prior, config.delta, ctx, config.approx, ctx)
        rec = StepRecord(t, None, pm.f, pm.q, prior.r, prior.s, None, None, None, None, None,
                         mean, var, None, warnings=tuple(warnings))
        return FilterState(t, prior=nxt, ctx=ctx), rec
    logd = fam.forecast_logpdf(prior, y, ctx)
    post = fam.posterior_params(prior, y, ctx)
    pstar = fam.posterior_predictor_moments(post, ctx, config.approx)
    nxt = fam.power_discount(post, config.delta, ctx, config.approx, ctx)
    rec = StepRecord(t, float(y), pm.f, pm.q, prior.r, prior.s, pstar.f, pstar.q, None, None, logd,
                     mean, var, fam.plugin_estimate(post, ctx), post.r, post.s, tuple(warnings))
    return FilterState(t, prior=nxt, ctx=ctx), rec


def _contexts(contexts, T: int) -> list[ObsContext | None]:
    if contexts is None:
        return [None] * T
    if isinstance(contexts, ObsContext):
        return [contexts] * T
    contexts = list(contexts)
    if len(contexts) != T:
        raise StructuralError(f"{len(contexts)} contexts for {T} observations")
    return contexts


def run_filter(y: Sequence, config: EngineConfig, contexts=None, state: FilterState | None = None,
               ) -> FilterResult:
    """Fold :func:`filter_step` over a series.

    ``contexts`` is one :class:`ObsContext` shared by every step, a sequence
    aligned with ``y``, or ``None``. Missing observations are ``None``/NaN.
    """
    y = list(y)
    if not y:
        raise StructuralError("empty series")
    ctxs = _contexts(contexts, len(y))
    state = state or initial_state(config)
    records = []
    for yt, ct in zip(y, ctxs):
        state, rec = filter_step(state, config, yt, ct)
        records.append(rec)
    return FilterResult(records, state)


def forecast(state: FilterState, config: EngineConfig, ell: int, ctx: ObsContext | None = None) -> ForecastRecord:
    """``ell``-step-ahead forecast from the current state.

    Discount mode uses the next prior for every horizon, so forecasts are
    constant in ``ell``.
    """
    if int(ell) != ell or ell < 1:
        raise DomainError(f"horizon must be a positive integer, got {ell!r}")
    fam = config.family
    ctx = fam.resolve(ctx or state.ctx)
    if config.mode is Mode.STATE_SPACE:
        Omega = _innovation(config, state)
        pm = k_step_predictor(state.moments, config.model, int(ell), Omega)
        params = _match(config, pm, ctx, [])
    else:
        params = fam.check_params(state.prior, ctx)
        pm = fam.predictor_moments(params, ctx, config.approx)
    mean, var = fam.forecast_moments(params, ctx)
    return ForecastRecord(int(ell), pm.f, pm.q, params.r, params.s, mean, var, fam, ctx)


def forecast_path(state: FilterState, config: EngineConfig, horizon: int,
                  contexts: Iterable[ObsContext] | None = None) -> list[ForecastRecord]:
    ctxs = list(contexts) if contexts is not None else [None] * horizon
    return [forecast(state, config, ell, c) for ell, c in zip(range(1, horizon + 1), ctxs)]
