import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dglm.diagnostics import (
    bayes_factors,
    grid_search_delta,
    log_likelihood,
    mse,
    plugin_log_likelihood,
    volatility_log_likelihood,
)
from dglm.engine import EngineConfig, Mode, run_filter
from dglm.errors import DomainError, StructuralError
from dglm.families import ConjugateParams, ObsContext, get_family
from dglm.families.continuous import lognormal_log_bayes_factor
from dglm.simulate import SimSpec, simulate_generic, simulate_weibull
from dglm.state_space import StateSpaceModel, build_random_walk


def poisson_run(delta, y):
    cfg = EngineConfig("poisson", Mode.DISCOUNT, delta=delta, initial=(1.0, 1.0))
    return run_filter(y, cfg), cfg


COUNTS = [3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5, 8, 9, 7, 9, 3, 2, 3, 8, 4]


# ------------------------------------------------------------ likelihood


def test_single_normal_observation_at_mode():
    ll = log_likelihood(get_family("normal"), [0.0], [0.0], 1.0, ObsContext(V=1.0))
    assert ll == pytest.approx(-0.5 * math.log(2 * math.pi), abs=1e-14)


def test_volatility_form_hand_case():
    y2 = [0.5, 2.0, 1.0]
    beta = [1.0, 0.5, 2.0]
    Omega, beta0 = 0.5, 1.0
    # hand computation of -(T/2) log(2 Omega pi^2) - sum log y2 - sum (dlog beta)^2 / (2 Omega)
    d = [0.0, math.log(0.5), math.log(4.0)]
    expected = (-1.5 * math.log(2 * 0.5 * math.pi ** 2) - (math.log(0.5) + math.log(2.0) + 0.0)
                - sum(x * x for x in d) / (2 * 0.5))
    assert volatility_log_likelihood(y2, beta, Omega, beta0) == pytest.approx(expected, abs=1e-13)


def test_volatility_form_validation():
    with pytest.raises(StructuralError):
        volatility_log_likelihood([1.0, 2.0], [1.0], 1.0, 1.0)
    with pytest.raises(DomainError):
        volatility_log_likelihood([1.0], [1.0], 0.0, 1.0)


@given(st.integers(1, 8), st.floats(0.01, 2.0), st.sampled_from([-1.0, 1.0]))
def test_perturbing_a_state_lowers_likelihood(idx, size, sign):
    # a constant path through constant data is the joint mode of the normal model
    fam, ctx = get_family("normal"), ObsContext(V=1.0)
    y = [1.5] * 10
    path = [1.5] * 10
    base = log_likelihood(fam, path, y, 0.5, ctx)
    bumped = list(path)
    bumped[idx] += sign * size
    assert log_likelihood(fam, bumped, y, 0.5, ctx) < base


def test_initial_state_adds_first_transition():
    fam, ctx = get_family("normal"), ObsContext(V=1.0)
    without = log_likelihood(fam, [0.2, 0.4], [0.0, 1.0], 2.0, ctx)
    with_init = log_likelihood(fam, [0.2, 0.4], [0.0, 1.0], 2.0, ctx, initial=0.0)
    first = -0.5 * math.log(2 * math.pi * 2.0) - 0.2 ** 2 / 4.0
    assert with_init - without == pytest.approx(first, abs=1e-13)


def test_pareto_path_outside_support_names_step():
    fam = get_family("pareto")
    with pytest.raises(DomainError, match="t=2"):
        log_likelihood(fam, [2.0, 0.8, 3.0], [1.5, 2.0, 1.2], 1.0)


def test_likelihood_length_mismatch():
    with pytest.raises(StructuralError):
        log_likelihood(get_family("poisson"), [1.0, 2.0], [1], 1.0)


def test_plugin_likelihood_uses_posterior_means():
    res, cfg = poisson_run(0.8, COUNTS)
    path = [rec.posterior_mean for rec in res]
    assert plugin_log_likelihood(res, cfg, COUNTS, 1.0) == log_likelihood(cfg.family, path, COUNTS, 1.0)


def test_plugin_likelihood_skips_missing_steps():
    y = [3, None, 4, 2]
    res, cfg = poisson_run(0.8, y)
    path = [res[i].posterior_mean for i in (0, 2, 3)]
    assert plugin_log_likelihood(res, cfg, y, 1.0) == log_likelihood(cfg.family, path, [3, 4, 2], 1.0)


# --------------------------------------------------------- Bayes factors


def test_identical_models_give_unit_factors():
    res, _ = poisson_run(0.8, COUNTS)
    for k in (1, 2, 5, 50):
        cmp = bayes_factors(res, res, k)
        assert np.all(cmp.hk == 1.0)
    assert bayes_factors(res, res).mean_h1 == 1.0


@given(st.lists(st.floats(-20, 5), min_size=2, max_size=40), st.data())
def test_window_two_is_product_of_last_two(l1, data):
    l2 = data.draw(st.lists(st.floats(-20, 5), min_size=len(l1), max_size=len(l1)))
    cmp = bayes_factors(l1, l2, k=2)
    h1 = cmp.log_h1
    assert cmp.log_hk[0] == h1[0]
    assert np.allclose(cmp.log_hk[1:], h1[:-1] + h1[1:], rtol=0, atol=1e-12)


@given(st.lists(st.floats(-20, 5), min_size=1, max_size=40), st.data(), st.integers(1, 10))
def test_window_equals_product_over_window(l1, data, k):
    l2 = data.draw(st.lists(st.floats(-20, 5), min_size=len(l1), max_size=len(l1)))
    cmp = bayes_factors(l1, l2, k)
    d = np.asarray(l1) - np.asarray(l2)
    for t in range(len(l1)):
        assert cmp.log_hk[t] == pytest.approx(d[max(0, t - k + 1): t + 1].sum(), abs=1e-9)
    assert np.all(cmp.hk > 0)


@given(st.lists(st.floats(-20, 5), min_size=1, max_size=40), st.data())
def test_factor_asymmetry(l1, data):
    l2 = data.draw(st.lists(st.floats(-20, 5), min_size=len(l1), max_size=len(l1)))
    a, b = bayes_factors(l1, l2), bayes_factors(l2, l1)
    assert np.allclose(a.h1 * b.h1, 1.0, rtol=0, atol=1e-12)


def test_scores_are_sums_of_record_densities():
    r1, _ = poisson_run(0.6, COUNTS)
    r2, _ = poisson_run(0.95, COUNTS)
    cmp = bayes_factors(r1, r2)
    assert cmp.score1 == math.fsum(rec.one_step_log_density for rec in r1)
    assert cmp.score1 == r1.log_predictive_score
    assert cmp.cumulative[-1] == pytest.approx(cmp.score1 - cmp.score2, abs=1e-10)


def test_lognormal_closed_form_factor_matches_density_ratio():
    ctx1, ctx2 = ObsContext(V=0.2), ObsContext(V=0.5)
    sim = simulate_generic(SimSpec("lognormal", 60, seed=3, param0=0.0, Omega=0.05, ctx=ctx1))
    cfg1 = EngineConfig("lognormal", Mode.DISCOUNT, delta=0.7, initial=(0.0, 1.0))
    cfg2 = EngineConfig("lognormal", Mode.DISCOUNT, delta=0.95, initial=(0.0, 1.0))
    r1, r2 = run_filter(sim.y, cfg1, ctx1), run_filter(sim.y, cfg2, ctx2)
    cmp = bayes_factors(r1, r2)
    for t, (a, b) in enumerate(zip(r1, r2)):
        closed = lognormal_log_bayes_factor(a.y, ConjugateParams(a.r, a.s), 0.2, ConjugateParams(b.r, b.s), 0.5)
        assert closed == pytest.approx(cmp.log_h1[t], abs=1e-10)


def test_missing_steps_contribute_unit_factor():
    cmp = bayes_factors([-1.0, None, -2.0], [-1.5, -0.5, -2.0])
    assert list(cmp.log_h1) == [0.5, 0.0, 0.0]


def test_factor_input_validation():
    with pytest.raises(StructuralError):
        bayes_factors([-1.0, -2.0], [-1.0])
    with pytest.raises(StructuralError):
        bayes_factors([], [])
    with pytest.raises(DomainError):
        bayes_factors([-1.0], [-1.0], k=0)


# ------------------------------------------------------------------- MSE


def test_mse_examples():
    res, _ = poisson_run(0.8, [1, 2])
    perfect = [rec.forecast_mean for rec in res]
    assert mse(res, perfect) == 0.0

    class Rec:
        forecast_mean = 0.0
        y = None

    assert mse([Rec(), Rec()], [1.0, -1.0]) == 1.0


def test_mse_matches_recomputation():
    res, _ = poisson_run(0.7, COUNTS)
    # forecast mean of the gamma-Poisson predictive is r/s
    means = [rec.r / rec.s for rec in res]
    expected = sum((y - m) ** 2 for y, m in zip(COUNTS, means)) / len(COUNTS)
    assert mse(res) == pytest.approx(expected, rel=1e-13)


def test_mse_validation():
    res, _ = poisson_run(0.8, [1, 2])
    with pytest.raises(StructuralError):
        mse(res, [1.0])


# ----------------------------------------------------------- grid search


def test_single_cell_grid_is_one_run():
    cfg = EngineConfig("poisson", Mode.DISCOUNT, delta=0.9, initial=(1.0, 1.0))
    out = grid_search_delta(cfg, COUNTS, [0.7], Omega=0.5)
    res, cfg7 = poisson_run(0.7, COUNTS)
    (cell,) = out.cells
    assert cell.delta == 0.7 and cell.error is None
    assert cell.mse == mse(res)
    assert cell.log_likelihood == plugin_log_likelihood(res, cfg7, COUNTS, 0.5)
    assert cell.log_score == res.log_predictive_score
    assert out.argmin_mse == out.argmax_log_likelihood == 0.7


def test_grid_records_errors_and_continues():
    # a binomial count above n fails inside each run and is recorded per cell
    cfg = EngineConfig("binomial", Mode.DISCOUNT, delta=0.9, initial=(1.0, 2.0))
    out = grid_search_delta(cfg, [1, 2, 7], [0.5, 0.9], contexts=ObsContext(n=5))
    assert all(c.error is not None for c in out.cells)
    assert out.argmin_mse is None
    ok = grid_search_delta(cfg, [1, 2, 3], [0.5, 0.9], contexts=ObsContext(n=5))
    assert all(c.error is None for c in ok.cells)


def test_grid_table_shape():
    cfg = EngineConfig("poisson", Mode.DISCOUNT, delta=0.9, initial=(1.0, 1.0))
    table = grid_search_delta(cfg, COUNTS, [0.5, 0.9]).table().splitlines()
    assert table[0].split("\t") == ["delta", "mse", "log_likelihood", "log_score", "error"]
    assert [line.split("\t")[0] for line in table[1:]] == ["0.5", "0.9"]


def test_grid_validation():
    cfg = EngineConfig("poisson", Mode.DISCOUNT, delta=0.9, initial=(1.0, 1.0))
    with pytest.raises(DomainError):
        grid_search_delta(cfg, COUNTS, [0.0, 0.5])
    with pytest.raises(StructuralError):
        grid_search_delta(cfg, COUNTS, [])


@pytest.mark.parametrize("seed", range(5))
def test_lognormal_drift_prefers_low_discount(seed):
    ctx = ObsContext(V=0.1)
    sim = simulate_generic(SimSpec("lognormal", 200, seed, param0=0.0, Omega=0.3, ctx=ctx))
    cfg = EngineConfig("lognormal", Mode.STATE_SPACE, StateSpaceModel([1.0], [[1.0]], None, [0.0], [[1.0]]),
                       delta=0.9)
    out = grid_search_delta(cfg, sim.y, [0.5, 0.6, 0.7, 0.8, 0.9, 0.99], Omega=0.3, contexts=ctx)
    assert out.argmin_mse < 0.9


def test_weibull_study_likelihood_prefers_09_over_05():
    # published pattern: delta=0.9 has the largest plug-in likelihood
    ctx = ObsContext(nu=3.0)
    wins = 0
    seeds = range(50)
    for seed in seeds:
        sim = simulate_weibull(500, 3.0, 1.0, 1.0, seed)
        ll = {}
        for d in (0.5, 0.9):
            cfg = EngineConfig("weibull", Mode.STATE_SPACE, build_random_walk(1.0, 0.0, 1000.0), delta=d)
            ll[d] = plugin_log_likelihood(run_filter(sim.y, cfg, ctx), cfg, sim.y, 1.0, ctx)
        wins += ll[0.9] > ll[0.5]
    assert wins > len(seeds) / 2, f"delta=0.9 beat delta=0.5 in {wins} of {len(seeds)} seeds"
