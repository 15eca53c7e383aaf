import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from dglm.engine import EngineConfig, FilterState, Mode, filter_step
from dglm.errors import DomainError, StructuralError
from dglm.families import ConjugateParams, ObsContext, get_family
from dglm.simulate import make_rng
from dglm.state_space import StateMoments, StateSpaceModel
from dglm.survival import (
    SurvivalModel,
    exponential_survivor_prediction,
    fit_survival,
    survivor_prediction,
)


def mixed_survivor(r, s, gap, nu):
    """Weibull survivor exp(-gap^nu * phi) averaged over phi = 1/lambda ~ G(s - 1, r) by quadrature.

    Integrates in u = log(phi), where the integrand is smooth and unimodal.
    """
    a = s - 1.0
    c = r + gap ** nu
    log_norm = a * math.log(r) - math.lgamma(a)

    def integrand(u):
        return math.exp(log_norm + a * u - c * math.exp(u))

    peak = math.log(a / c)
    width = 1.0 / math.sqrt(a)
    edges = [-math.inf] + [peak + k * width for k in (-40, -10, -3, 0, 3, 10)] + [peak + 4.0, math.inf]
    edges = sorted(set(edges))
    return math.fsum(integrate.quad(integrand, lo, hi, epsabs=1e-15, epsrel=1e-13, limit=400)[0]
                     for lo, hi in zip(edges[:-1], edges[1:]))


def test_zero_gap_is_certain_survival():
    assert survivor_prediction(2.0, 3.0, 0.0, 1.7) == 1.0


def test_exponential_substitution():
    assert survivor_prediction(2.0, 3.0, 1.0, 1.0) == pytest.approx(4.0 / 9.0, abs=1e-15)


def test_mixing_integral_nu_two():
    assert survivor_prediction(2.0, 3.0, 1.0, 2.0) == pytest.approx(mixed_survivor(2.0, 3.0, 1.0, 2.0), abs=1e-8)


@pytest.mark.parametrize("r", [0.3, 2.0, 15.0])
@pytest.mark.parametrize("s", [1.5, 3.0, 20.0])
@pytest.mark.parametrize("nu", [0.5, 1.0, 3.0])
@pytest.mark.parametrize("gap", [0.0, 0.4, 1.0, 4.0])
def test_mixing_integral_grid(r, s, nu, gap):
    assert abs(survivor_prediction(r, s, gap, nu) - mixed_survivor(r, s, gap, nu)) <= 1e-8


@given(st.floats(0.05, 50), st.floats(1.01, 60), st.floats(0.0, 100.0))
def test_unit_shape_is_exponential_form(r, s, gap):
    assert survivor_prediction(r, s, gap, 1.0) == exponential_survivor_prediction(r, s, gap)


@given(st.floats(0.05, 50), st.floats(1.01, 60), st.floats(0.2, 5), st.floats(0.0, 20.0), st.floats(0.0, 20.0))
def test_monotone_in_gap(r, s, nu, g1, g2):
    lo, hi = sorted((g1, g2))
    a, b = survivor_prediction(r, s, lo, nu), survivor_prediction(r, s, hi, nu)
    assert 0.0 <= b <= a <= 1.0


@given(st.floats(0.05, 50), st.floats(1.01, 60), st.floats(1.0, 30.0), st.floats(0.2, 3), st.floats(0.2, 3))
def test_monotone_in_shape_beyond_unit_gap(r, s, gap, n1, n2):
    lo, hi = sorted((n1, n2))
    assert survivor_prediction(r, s, gap, hi) <= survivor_prediction(r, s, gap, lo)


def test_vanishes_for_long_gaps():
    assert survivor_prediction(1.0, 2.0, 1e12, 1.0) < 1e-11


def test_array_gaps():
    out = survivor_prediction(2.0, 3.0, np.array([0.0, 1.0]), 1.0)
    assert out.shape == (2,) and out[0] == 1.0


def test_prediction_domain_errors():
    with pytest.raises(DomainError, match="s <= 1"):
        survivor_prediction(2.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        survivor_prediction(-1.0, 3.0, 1.0)
    with pytest.raises(DomainError):
        survivor_prediction(2.0, 3.0, -0.5)
    with pytest.raises(DomainError):
        survivor_prediction(2.0, 3.0, 1.0, nu=0.0)
    with pytest.raises(DomainError):
        exponential_survivor_prediction(2.0, 0.5, 1.0)


# ----------------------------------------------------------------- model


def test_single_individual_is_one_filter_step():
    model = SurvivalModel([0.0, 5.0], np.zeros((1, 0)), nu=1.5, Omega=0.3, m0=[0.2], P0=2.0)
    fit = fit_survival(model, [2.0])
    (iv,) = fit.intervals
    # engine predictor is log(lambda) = -log(rate), hence the negated design
    cfg = EngineConfig("weibull", Mode.STATE_SPACE,
                       StateSpaceModel([-1.0], [[1.0]], [[0.3]], [0.2], [[2.0]]), matching="exact")
    state = FilterState(0, moments=StateMoments(np.array([0.2]), np.array([[2.0]])))
    _, rec = filter_step(state, cfg, 2.0, ObsContext(nu=1.5))
    assert iv.events == (0,) and iv.at_risk == (0,)
    assert tuple(iv.params[0]) == pytest.approx((rec.r, rec.s), rel=1e-13)
    assert np.allclose(iv.posterior.m, rec.m, rtol=0, atol=1e-14)
    assert np.allclose(iv.posterior.P, rec.P, rtol=0, atol=1e-14)
    assert np.allclose(iv.prior.P, [[2.3]])


def test_identical_covariates_give_identical_curves():
    x = np.array([[0.5, 1.0], [0.5, 1.0], [-1.0, 0.0]])
    model = SurvivalModel([0.0, 1.0, 2.0, 3.0], x, nu=1.2, Omega=0.1)
    fit = fit_survival(model, [2.5, 2.8, 1.4])
    curves = {(j, t): s for j, t, _, s in fit.curves(7)}
    for t in (1, 2, 3):
        assert np.array_equal(curves[(0, t)], curves[(1, t)])
    assert not np.array_equal(curves[(0, 1)], curves[(2, 1)])


def test_risk_sets_and_censoring():
    model = SurvivalModel([0.0, 1.0, 2.0], np.zeros((3, 0)), Omega=0.1)
    fit = fit_survival(model, [0.5, 1.5, 1.7], events=[1, 1, 0])
    first, second = fit.intervals
    assert first.at_risk == (0, 1, 2) and first.events == (0,)
    assert second.at_risk == (1, 2) and second.events == (1,)
    # censored individuals never update the state
    alone = fit_survival(SurvivalModel([0.0, 1.0, 2.0], np.zeros((2, 0)), Omega=0.1), [0.5, 1.5])
    assert np.array_equal(alone.intervals[1].posterior.m, second.posterior.m)


def test_exponential_median_survival():
    rate = 2.0
    times = -np.log(make_rng(0).random(2000)) / rate
    # one long-lived individual keeps a risk set in the second interval
    times = np.append(times, 60.0)
    model = SurvivalModel([0.0, 50.0, 100.0], np.zeros((times.size, 0)), nu=1.0, Omega=1e-6, P0=10.0)
    fit = fit_survival(model, times)
    median_gap = float(np.median(times[:-1]))
    assert fit.survivor(times.size - 1, 2, 50.0 + median_gap) == pytest.approx(0.5, abs=0.04)


def test_discount_evolution():
    model = SurvivalModel([0.0, 1.0, 2.0], np.zeros((2, 0)), delta=0.8, P0=1.0)
    fit = fit_survival(model, [0.5, 1.5])
    assert fit.intervals[1].prior.P[0, 0] == pytest.approx(fit.intervals[0].posterior.P[0, 0] / 0.8)


def test_survivor_queries_need_risk_membership():
    model = SurvivalModel([0.0, 1.0, 2.0], np.zeros((2, 0)), Omega=0.1)
    fit = fit_survival(model, [0.5, 1.5])
    with pytest.raises(DomainError):
        fit.survivor(0, 2, 1.5)


def test_structural_errors():
    with pytest.raises(StructuralError):
        fit_survival(SurvivalModel([0.0, 1.0], np.zeros((1, 0)), Omega=0.1), [])
    with pytest.raises(StructuralError):
        SurvivalModel([0.0, 1.0, 1.0], np.zeros((1, 0)), Omega=0.1)
    with pytest.raises(StructuralError):
        SurvivalModel([0.5, 1.0], np.zeros((1, 0)), Omega=0.1)
    with pytest.raises(StructuralError):
        SurvivalModel([0.0, 1.0], np.zeros((1, 0)))
    with pytest.raises(StructuralError):
        fit_survival(SurvivalModel([0.0, 1.0], np.zeros((2, 0)), Omega=0.1), [0.5])
    with pytest.raises(StructuralError):
        fit_survival(SurvivalModel([0.0, 1.0], np.zeros((1, 0)), Omega=0.1), [0.5], events=[2])
    with pytest.raises(DomainError):
        fit_survival(SurvivalModel([0.0, 1.0], np.zeros((1, 0)), Omega=0.1), [-0.5])


def test_weibull_survivor_method_agrees():
    fam = get_family("weibull")
    p = ConjugateParams(2.0, 3.5)
    assert fam.survivor(p, 1.3, ObsContext(nu=2.0)) == pytest.approx(survivor_prediction(2.0, 3.5, 1.3, 2.0),
                                                                     rel=1e-14)
