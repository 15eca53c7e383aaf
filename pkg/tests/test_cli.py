import json

import numpy as np
import pytest
from scipy import stats

from dglm.cli import DataError, main, parse_grid, read_series
from dglm.families import ObsContext
from dglm.simulate import SimSpec, simulate_generic
from dglm.state_space import build_trend_harmonics


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def jsonl(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


@pytest.fixture
def counts(tmp_path):
    path = tmp_path / "counts.csv"
    path.write_text("t,y\n1,1\n2,0\n3,2\n")
    return str(path)


def test_fit_matches_hand_trace(capsys, counts):
    code, out, _ = run(capsys, "fit", counts, "--family", "poisson", "--mode", "discount", "--delta", "0.5")
    assert code == 0
    *steps, summary = jsonl(out)
    assert [(s["r"], s["s"]) for s in steps] == [(1.0, 1.0), (1.5, 1.0), (1.25, 1.0)]
    assert [s["forecast_mean"] for s in steps] == [1.0, 1.5, 1.25]
    for s, y in zip(steps, (1, 0, 2)):
        # gamma-Poisson predictive is NB(r, s/(1+s))
        assert s["log_density"] == pytest.approx(stats.nbinom.logpmf(y, s["r"], s["s"] / (1 + s["s"])), abs=1e-12)
    assert list(steps[0]) == ["t", "y", "f", "q", "r", "s", "f_star", "q_star", "forecast_mean",
                              "forecast_variance", "log_density", "posterior_mean", "m", "P", "warnings"]
    assert summary["summary"]["steps"] == 3
    assert summary["summary"]["mse"] == pytest.approx((0 + 1.5 ** 2 + 0.75 ** 2) / 3)


def test_fit_state_space_records_state(capsys, counts):
    code, out, _ = run(capsys, "fit", counts, "--family", "poisson", "--omega", "0.1", "--p0", "1")
    assert code == 0
    steps = jsonl(out)[:-1]
    assert all(len(s["m"]) == 1 and len(s["P"]) == 1 for s in steps)


def test_empty_file_is_data_error(capsys, tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    code, _, err = run(capsys, "fit", str(path), "--family", "poisson")
    assert code == 3 and "data error" in err


def test_bad_row_names_line(capsys, tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("t,y\n1,2\n2,abc\n")
    code, _, err = run(capsys, "fit", str(path), "--family", "poisson", "--mode", "discount", "--delta", "0.9")
    assert code == 3 and "bad.csv:3:" in err


def test_out_of_support_observation_is_data_error(capsys, tmp_path):
    path = tmp_path / "neg.csv"
    path.write_text("t,y\n1,-2\n")
    code, _, _ = run(capsys, "fit", str(path), "--family", "poisson", "--mode", "discount", "--delta", "0.9")
    assert code == 3


def test_delta_out_of_range_is_config_error(capsys, counts):
    code, _, err = run(capsys, "fit", counts, "--family", "poisson", "--mode", "discount", "--delta", "1.2")
    assert code == 2 and "config error" in err


def test_unknown_config_key(capsys, counts, tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("family = poisson\nbogus = 1\n")
    code, _, err = run(capsys, "fit", counts, "--config", str(cfg))
    assert code == 2 and "bogus" in err


def test_config_choice_validation(capsys, counts, tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("family = poisson\nmatching = fancy\n")
    code, _, _ = run(capsys, "fit", counts, "--config", str(cfg))
    assert code == 2


def test_config_from_environment_and_flag_override(capsys, counts, tmp_path, monkeypatch):
    cfg = tmp_path / "run.ini"
    cfg.write_text("family = poisson\nmode = discount\ndelta = 0.5\n")
    monkeypatch.setenv("DGLM_CONFIG", str(cfg))
    _, out, _ = run(capsys, "fit", counts)
    assert jsonl(out)[-1]["summary"]["delta"] == 0.5
    _, out, _ = run(capsys, "fit", counts, "--delta", "0.9")
    assert jsonl(out)[-1]["summary"]["delta"] == 0.9


def test_missing_observations(capsys, tmp_path):
    path = tmp_path / "gap.csv"
    path.write_text("t,y\n1,2\n2,NA\n3,\n4,1\n")
    code, out, _ = run(capsys, "fit", str(path), "--family", "poisson", "--mode", "discount", "--delta", "0.8")
    assert code == 0
    *steps, summary = jsonl(out)
    assert steps[1]["y"] is None and steps[1]["log_density"] is None
    assert summary["summary"]["observed"] == 2


def test_trial_column_only_for_count_families():
    with pytest.raises(DataError):
        read_series("t,y,n\n1,0.5,3\n", "normal", ObsContext(V=1.0))
    series = read_series("t\ty\tn\n1\t2\t5\n", "binomial", ObsContext())
    assert series is not None


def test_plot_data(capsys, counts):
    code, out, _ = run(capsys, "fit", counts, "--family", "poisson", "--mode", "discount", "--delta", "0.5",
                       "--plot-data")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "t,y,forecast_mean,lower,upper"
    rows = [list(map(float, line.split(","))) for line in lines[1:]]
    assert all(lo <= m <= hi for _, _, m, lo, hi in rows)


# -------------------------------------------------------------- forecast


def test_forecast_horizon_one_is_next_prior(capsys, counts):
    args = ("--family", "poisson", "--omega", "0.2", "--p0", "2")
    _, fit_out, _ = run(capsys, "fit", counts, *args)
    _, fc_out, _ = run(capsys, "forecast", counts, *args, "--horizon", "1")
    (row,) = jsonl(fc_out)
    # the horizon-1 forecast is the prior the next step would use
    extended = counts.replace("counts.csv", "more.csv")
    with open(extended, "w") as fh:
        fh.write(open(counts).read() + "4,3\n")
    _, more, _ = run(capsys, "fit", extended, *args)
    nxt = jsonl(more)[3]
    assert (row["f"], row["q"], row["r"], row["s"]) == (nxt["f"], nxt["q"], nxt["r"], nxt["s"])
    assert row["mean"] == nxt["forecast_mean"]
    assert set(row["quantiles"]) == {"0.05", "0.5", "0.95"}
    assert len(jsonl(fit_out)) == 4


def test_discount_forecast_constant_in_horizon(capsys, counts):
    _, out, _ = run(capsys, "forecast", counts, "--family", "poisson", "--mode", "discount", "--delta", "0.7",
                    "--horizon", "5")
    rows = jsonl(out)
    assert [r["ell"] for r in rows] == [1, 2, 3, 4, 5]
    assert all({k: v for k, v in r.items() if k != "ell"} == {k: v for k, v in rows[0].items() if k != "ell"}
               for r in rows)


def test_binomial_seasonal_forecast_pattern(capsys, tmp_path):
    sim = simulate_generic(SimSpec("binomial", 80, 1, model=build_trend_harmonics(4, 1e-8, 1e-8, 1.0),
                                   theta0=(0, 0, 1.5, 0, 0), ctx=ObsContext(n=50)))
    path = tmp_path / "seasonal.csv"
    path.write_text("t,y,n\n" + "".join(f"{i + 1},{int(v)},50\n" for i, v in enumerate(sim.y)))
    _, out, _ = run(capsys, "forecast", str(path), "--family", "binomial", "--model", "trend-harmonics",
                    "--horizon", "8", "--omega-trend", "1e-4", "--omega-seas", "1e-4", "--p0", "10")
    means = np.array([r["mean"] for r in jsonl(out)])
    z = means - means.mean()
    assert np.dot(z[:-4], z[4:]) / np.dot(z, z) > 0.4
    assert np.allclose(means[:4], means[4:], rtol=0.1)
    assert means.max() - means.min() > 20


# --------------------------------------------------------------- compare


def test_compare_same_config_is_unity(capsys, counts):
    _, out, _ = run(capsys, "compare", counts, "--family", "poisson", "--mode", "discount", "--delta", "0.7")
    *steps, summary = jsonl(out)
    assert all(s["h1"] == 1.0 and s["cumulative_log"] == 0.0 for s in steps)
    assert summary["summary"]["mean_h1"] == 1.0


def test_compare_pareto_persistent_data(capsys, tmp_path):
    path = tmp_path / "pareto.csv"
    assert main(["simulate", "--family", "pareto", "--param0", "3", "--omega", "0.0001", "--T", "200",
                 "--seed", "1", "-o", str(path)]) == 0
    _, out, _ = run(capsys, "compare", str(path), "--family", "pareto", "--mode", "discount", "--delta", "0.99",
                    "--delta-b", "0.5")
    *steps, summary = jsonl(out)
    assert len(steps) == 200
    assert summary["summary"]["mean_h1"] > 1.0
    assert list(steps[0]) == ["t", "log_h1", "h1", "log_hk", "cumulative_log"]


def test_compare_window(capsys, counts):
    _, out, _ = run(capsys, "compare", counts, "--family", "poisson", "--mode", "discount", "--delta", "0.5",
                    "--delta-b", "0.9", "--window", "2")
    steps = jsonl(out)[:-1]
    assert steps[2]["log_hk"] == pytest.approx(steps[1]["log_h1"] + steps[2]["log_h1"], abs=1e-12)


# -------------------------------------------------- simulate, grid, survival


def test_simulate_deterministic(capsys):
    _, a, _ = run(capsys, "simulate", "--family", "weibull", "--T", "500", "--nu", "3", "--seed", "7")
    _, b, _ = run(capsys, "simulate", "--family", "weibull", "--T", "500", "--nu", "3", "--seed", "7")
    assert a == b and a.splitlines()[0] == "t,y" and len(a.splitlines()) == 501


def test_simulate_fit_round_trip_without_warnings(capsys, tmp_path):
    path = tmp_path / "nb.csv"
    assert main(["simulate", "--family", "negative-binomial", "--T", "100", "--seed", "3", "-o", str(path)]) == 0
    assert path.read_text().splitlines()[0] == "t,y,n"
    code, out, err = run(capsys, "fit", str(path), "--family", "negative-binomial", "--mode", "discount",
                         "--delta", "0.8", "--r0", "2", "--s0", "2")
    assert code == 0 and err == ""
    assert jsonl(out)[-1]["summary"]["warnings"] == 0


def test_gridsearch_table(capsys, counts):
    _, out, _ = run(capsys, "gridsearch", counts, "--family", "poisson", "--mode", "discount", "--grid", "0.5:0.99")
    lines = out.splitlines()
    assert lines[0] == "delta\tmse\tlog_likelihood\tlog_score\terror"
    assert [line.split("\t")[0] for line in lines[1:-2]] == [f"{d:g}" for d in parse_grid("0.5:0.99")]
    assert lines[-2].startswith("# argmin_mse\t") and lines[-1].startswith("# argmax_log_likelihood\t")


def test_parse_grid():
    assert parse_grid("0.5:0.6:0.05") == [0.5, 0.55, 0.6]
    assert parse_grid("0.5:0.99")[-1] == 0.99
    assert parse_grid("0.3,0.9") == [0.3, 0.9]


def test_survival_direct_prediction(capsys, tmp_path):
    path = tmp_path / "rs.csv"
    path.write_text("r,s,gap\n2,3,1\n")
    code, out, _ = run(capsys, "survival", str(path), "--nu", "1")
    assert code == 0
    header, row = out.splitlines()
    assert header == "r,s,gap,nu,survivor"
    assert float(row.split(",")[-1]) == pytest.approx(4.0 / 9.0, abs=1e-15)


def test_survival_fit_curves(capsys, tmp_path):
    path = tmp_path / "events.csv"
    path.write_text("time,event,x\n0.5,1,1\n1.5,1,0\n2.5,0,1\n")
    code, out, _ = run(capsys, "survival", str(path), "--boundaries", "0,1,2,3", "--omega", "0.1", "--points", "3")
    rows = [line.split(",") for line in out.splitlines()]
    assert code == 0 and rows[0] == ["individual", "interval", "y", "survivor"]
    assert all(0.0 < float(r[3]) <= 1.0 for r in rows[1:])
    code, _, _ = run(capsys, "survival", str(path), "--omega", "0.1")
    assert code == 2


def test_numeric_error_exit_code(capsys, tmp_path):
    # survivor prediction is undefined for s <= 1
    path = tmp_path / "s.csv"
    path.write_text("r,s,gap\n2,0.5,1\n")
    code, _, err = run(capsys, "survival", str(path))
    assert code == 4 and "numeric error" in err
