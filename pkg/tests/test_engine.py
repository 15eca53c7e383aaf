import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dglm.engine import (
    EngineConfig,
    FilterState,
    Mode,
    filter_step,
    forecast,
    forecast_path,
    run_filter,
)
from dglm.errors import (
    ConjugateDomainError,
    DomainError,
    ObservationError,
    StructuralError,
    UnsupportedCapabilityError,
)
from dglm.families import ConjugateParams, ObsContext, get_family
from dglm.state_space import (
    StateMoments,
    StateSpaceModel,
    build_random_walk,
    build_trend_harmonics,
)


def kalman(y, m, P, Omega, V):
    """Textbook scalar local-level Kalman filter."""
    out = []
    for v in y:
        a, R = m, P + Omega
        Q = R + V
        logd = -0.5 * math.log(2 * math.pi * Q) - 0.5 * (v - a) ** 2 / Q
        K = R / Q
        m, P = a + K * (v - a), R * (1 - K)
        out.append((m, P, logd))
    return out


def normal_config(Omega, V, m0, P0):
    return EngineConfig(get_family("normal"), Mode.STATE_SPACE, build_random_walk(Omega, m0, P0)), ObsContext(V=V)


@given(st.integers(0, 2**32 - 1))
def test_normal_state_space_is_kalman(seed):
    rng = np.random.default_rng(seed)
    Omega, V, m0, P0 = rng.uniform(0.01, 3), rng.uniform(0.05, 4), rng.normal(), rng.uniform(0.1, 100)
    y = rng.normal(size=int(rng.integers(1, 30))) * 3
    cfg, ctx = normal_config(Omega, V, m0, P0)
    res = run_filter(y, cfg, ctx)
    for rec, (m, P, logd) in zip(res, kalman(y, m0, P0, Omega, V)):
        assert abs(rec.m[0] - m) <= 1e-10
        assert abs(rec.P[0, 0] - P) <= 1e-10
        assert abs(rec.one_step_log_density - logd) <= 1e-10


def poisson_discount(delta, r0=1.0, s0=1.0):
    return EngineConfig(get_family("poisson"), Mode.DISCOUNT, delta=delta, initial=(r0, s0))


def test_poisson_unit_discount():
    cfg = poisson_discount(1.0)
    state, rec = filter_step(FilterState(0, prior=cfg.initial), cfg, 2)
    assert (rec.post_r, rec.post_s) == (3.0, 2.0)
    assert state.prior == ConjugateParams(3.0, 2.0)


def test_poisson_half_discount():
    cfg = poisson_discount(0.5)
    state, _ = filter_step(FilterState(0, prior=cfg.initial), cfg, 2)
    assert state.prior == ConjugateParams(2.0, 1.0)


def test_poisson_hand_trace():
    res = run_filter([1, 0, 2], poisson_discount(0.5))
    # (1,1) -y=1-> (2,2) -> (1.5,1) -y=0-> (1.5,2) -> (1.25,1) -y=2-> (3.25,2) -> (2.125,1)
    assert [(r.r, r.s) for r in res] == [(1.0, 1.0), (1.5, 1.0), (1.25, 1.0)]
    assert [(r.post_r, r.post_s) for r in res] == [(2.0, 2.0), (1.5, 2.0), (3.25, 2.0)]
    assert res.state.prior == ConjugateParams(2.125, 1.0)
    # negative-binomial predictive: Gamma(r+y)/(Gamma(r) y!) (s/(1+s))^r (1/(1+s))^y
    lp0 = math.lgamma(2.0) - math.lgamma(1.0) + math.log(0.5) + math.log(0.5)
    assert res[0].one_step_log_density == pytest.approx(lp0, abs=1e-14)
    assert [r.forecast_mean for r in res] == [1.0, 1.5, 1.25]


def test_length_one_equals_single_step():
    cfg = poisson_discount(0.7)
    res = run_filter([4], cfg)
    _, rec = filter_step(FilterState(0, prior=cfg.initial), cfg, 4)
    assert res[0] == rec


def test_unit_discount_is_batch_conjugacy():
    y = [3, 1, 4, 1, 5, 9, 2, 6]
    res = run_filter(y, poisson_discount(1.0, 0.5, 0.25))
    assert res.state.prior == ConjugateParams(0.5 + sum(y), 0.25 + len(y))
    rev = run_filter(y[::-1], poisson_discount(1.0, 0.5, 0.25))
    assert rev.state.prior == res.state.prior


def test_discounting_is_order_sensitive():
    y = [3, 1, 4, 1, 5, 9, 2, 6]
    a = run_filter(y, poisson_discount(0.8))
    b = run_filter(y[::-1], poisson_discount(0.8))
    assert a.state.prior != b.state.prior


def test_log_score_is_sum_of_records():
    res = run_filter([1, 0, 2, 5], poisson_discount(0.6))
    assert res.log_predictive_score == sum(r.one_step_log_density for r in res)


def test_rerun_is_bitwise_identical():
    rng = np.random.default_rng(5)
    y = rng.poisson(3, size=40)
    cfg = EngineConfig(get_family("poisson"), Mode.STATE_SPACE, build_random_walk(0.1, 0.0, 10.0))
    a, b = run_filter(y, cfg), run_filter(y, cfg)
    for ra, rb in zip(a, b):
        assert ra.f == rb.f and ra.q == rb.q and np.array_equal(ra.m, rb.m) and np.array_equal(ra.P, rb.P)


def test_forecast_one_step_equals_next_prior():
    cfg = EngineConfig(get_family("poisson"), Mode.STATE_SPACE, build_random_walk(0.2, 0.0, 10.0))
    y = [2, 3, 1, 4]
    res = run_filter(y, cfg)
    fc = forecast(res.state, cfg, 1)
    _, nxt = filter_step(res.state, cfg, 5)
    assert (fc.f, fc.q, fc.r, fc.s, fc.mean) == (nxt.f, nxt.q, nxt.r, nxt.s, nxt.forecast_mean)


def test_discount_forecasts_are_horizon_constant():
    cfg = poisson_discount(0.7)
    res = run_filter([2, 3, 1], cfg)
    a, b = forecast(res.state, cfg, 1), forecast(res.state, cfg, 5)
    assert (a.r, a.s, a.mean, a.variance) == (b.r, b.s, b.mean, b.variance)


def test_binomial_seasonal_forecast_unrolled():
    model = build_trend_harmonics(4, 0.01, 0.01, P0=1.0)
    cfg = EngineConfig(get_family("binomial"), Mode.STATE_SPACE, model)
    ctx = ObsContext(n=20)
    y = [2, 10, 18, 10, 3, 11, 17, 9]
    res = run_filter(y, cfg, ctx)
    fc = forecast(res.state, cfg, 4)
    G, F, W = model.G, model.F, model.Omega
    m, P = res.state.moments.m, res.state.moments.P
    for _ in range(4):
        m, P = G @ m, G @ P @ G.T + W
    assert fc.f == pytest.approx(F @ m, abs=1e-12)
    assert fc.q == pytest.approx(F @ P @ F, abs=1e-10)
    means = [forecast(res.state, cfg, ell).mean for ell in range(1, 9)]
    assert means[0:4] == pytest.approx(means[4:8], rel=0.2)


def test_missing_observation_carries_prior():
    cfg = EngineConfig(get_family("poisson"), Mode.STATE_SPACE, build_random_walk(0.5, 0.0, 10.0))
    res = run_filter([2, None, float("nan"), 3], cfg)
    assert res[1].y is None and res[1].one_step_log_density is None
    assert res[2].P[0, 0] == pytest.approx(res[1].P[0, 0] + 0.5)
    d = run_filter([2, None], poisson_discount(0.5))
    # (1,1) -y=2-> (3,2) -> (2,1); the missing step applies one more discount: (1.5, 0.5)
    assert d.state.prior == ConjugateParams(1.5, 0.5)


def test_state_space_discount_delta():
    model = StateSpaceModel([1.0], [[1.0]], None, [0.0], [[4.0]])
    cfg = EngineConfig(get_family("poisson"), Mode.STATE_SPACE, model, delta=0.8)
    state, rec = filter_step(FilterState(0, moments=StateMoments([0.0], [[4.0]])), cfg, 1)
    assert rec.q == pytest.approx(4.0 / 0.8)


def test_config_validation():
    with pytest.raises(DomainError):
        poisson_discount(1.2)
    with pytest.raises(StructuralError):
        EngineConfig(get_family("poisson"), Mode.DISCOUNT, delta=0.5)
    with pytest.raises(StructuralError):
        EngineConfig(get_family("poisson"), Mode.STATE_SPACE)
    with pytest.raises(UnsupportedCapabilityError):
        EngineConfig(get_family("inverse-gaussian"), Mode.STATE_SPACE, build_random_walk())
    with pytest.raises(DomainError):
        EngineConfig("poisson", "sideways", delta=0.5, initial=(1, 1))


def test_observation_errors_propagate():
    with pytest.raises(ObservationError):
        run_filter([1, -2], poisson_discount(0.5))
    with pytest.raises(StructuralError):
        run_filter([], poisson_discount(0.5))


def test_clamp_policy():
    model = build_random_walk(50.0, 0.0, 1.0)
    fam, ctx = get_family("negative-binomial"), ObsContext(n=10)
    strict = EngineConfig(fam, Mode.STATE_SPACE, model)
    with pytest.raises(ConjugateDomainError):
        run_filter([3, 4], strict, ctx)
    lenient = EngineConfig(fam, Mode.STATE_SPACE, model, clamp_policy="log")
    res = run_filter([3, 4], lenient, ctx)
    assert res[0].warnings and "clamped" in res[0].warnings[0]


def test_inverse_gaussian_discount_run():
    cfg = EngineConfig(get_family("inverse-gaussian"), Mode.DISCOUNT, delta=0.9, initial=(2.0, 1.0))
    res = run_filter([0.8, 1.2, 0.5], cfg, ObsContext(lam=0.5))
    assert all(math.isfinite(r.one_step_log_density) for r in res)


def test_forecast_path_length_and_horizon_check():
    cfg = poisson_discount(0.7)
    res = run_filter([2, 3, 1], cfg)
    assert [f.ell for f in forecast_path(res.state, cfg, 3)] == [1, 2, 3]
    with pytest.raises(DomainError):
        forecast(res.state, cfg, 0)


def test_weibull_forecast_moment_signal():
    cfg = EngineConfig(get_family("weibull"), Mode.DISCOUNT, delta=1.0, initial=(2.0, 1.8))
    fc = forecast(FilterState(0, prior=cfg.initial), cfg, 1, ObsContext(nu=1.0))
    assert fc.mean == math.inf
    assert math.isfinite(fc.logpdf(1.0))
