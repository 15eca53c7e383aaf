"""Command-line interface.

Subcommands: ``fit``, ``forecast``, ``compare``, ``simulate``, ``gridsearch``
and ``survival``. Settings come from (in increasing precedence) built-in
defaults, a flat ``key = value`` config file (``--config`` or the
``DGLM_CONFIG`` environment variable) and command-line flags.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric or
domain error during a run.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, fields, replace
from typing import Sequence

import numpy as np

from .diagnostics import bayes_factors, grid_search_delta, mse, plugin_log_likelihood
from .engine import EngineConfig, Mode, forecast_path, run_filter
from .errors import ContextError, DGLMError, ObservationError, StructuralError
from .families import ConjugateParams, ObsContext, get_family
from .simulate import (
    SimSpec,
    simulate_generic,
    simulate_negative_binomial,
    simulate_weibull,
)
from .state_space import StateSpaceModel, build_model
from .survival import SurvivalModel, fit_survival, survivor_prediction

__all__ = ["RunConfig", "ConfigError", "DataError", "load_config", "read_series", "main"]

CONFIG_ENV = "DGLM_CONFIG"
EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4
PLOT_BAND = (0.025, 0.975)

logger = logging.getLogger("dglm")


class ConfigError(Exception):
    """Invalid or inconsistent settings (exit code 2)."""


class DataError(Exception):
    """Unreadable or malformed input data (exit code 3)."""


@dataclass(frozen=True)
class RunConfig:
    """Every setting a subcommand may read; see the README for the meaning of each key."""

    family: str = "poisson"
    mode: str = "state-space"
    delta: float | None = None
    model: str = "random-walk"
    omega: float = 1.0
    m0: float = 0.0
    p0: float = 1000.0
    cycle: int = 4
    omega_trend: float = 1000.0
    omega_seas: float = 100.0
    design: str | None = None
    evolution: str | None = None
    innovation: str | None = None
    initial_mean: str | None = None
    r0: float = 1.0
    s0: float = 1.0
    n: int | None = None
    v: float | None = None
    alpha: float | None = None
    nu: float | None = None
    lam: float | None = None
    horizon: int = 1
    approx: str = "exact"
    clamp: str = "error"
    matching: str | None = None
    seed: int = 0
    likelihood_omega: float = 1.0
    quantiles: str = "0.05,0.5,0.95"
    grid: str = "0.5:0.99"
    window: int = 1
    t_len: int = 100
    lambda0: float = 1.0
    param0: float | None = None
    boundaries: str | None = None
    points: int = 11
    input: str | None = None
    output: str | None = None


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
# config-file spelling of keys that are not valid identifiers or clash with flags
_ALIASES = {"t": "t_len", "T": "t_len", "clamp_policy": "clamp", "omega_likelihood": "likelihood_omega"}


def _convert(key: str, raw):
    if raw is None:
        return None
    kind = _FIELD_TYPES[key]
    try:
        if "float" in kind:
            value = float(raw)
            if not math.isfinite(value):
                raise ValueError
            return value
        if "int" in kind:
            f = float(raw)
            if f != int(f):
                raise ValueError
            return int(f)
    except (TypeError, ValueError):
        raise ConfigError(f"invalid value {raw!r} for {key}") from None
    return str(raw).strip()


def load_config(path: str | None) -> dict:
    """Read a flat ``key = value`` file (``#`` comments; no sections). Unknown keys are rejected."""
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"),
                                       inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string("[run]\n" + text, source=path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if parser.sections() != ["run"]:
        raise ConfigError(f"{path}: sections are not allowed; use flat key = value lines")
    out = {}
    for key, raw in parser.items("run"):
        name = _ALIASES.get(key, key.replace("-", "_").lower())
        if name not in _FIELD_TYPES:
            raise ConfigError(f"{path}: unknown key {key!r}")
        out[name] = _convert(name, raw)
    return out


_CHOICES = {
    "mode": ("state-space", "discount"),
    "approx": ("exact", "paper"),
    "clamp": ("error", "log"),
    "matching": ("closed", "exact"),
}


def resolve_config(args: argparse.Namespace, config_path: str | None = None) -> RunConfig:
    path = config_path or os.environ.get(CONFIG_ENV) or None
    values = load_config(path)
    for key in _FIELD_TYPES:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = _convert(key, flag)
    for key, allowed in _CHOICES.items():
        if values.get(key) is not None and values[key] not in allowed:
            raise ConfigError(f"{key} must be one of {', '.join(allowed)}; got {values[key]!r}")
    return RunConfig(**values)


# ------------------------------------------------------------- builders


def _floats(text: str, key: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"{key} must be a comma-separated list of numbers, got {text!r}") from None


def _json_array(text: str, key: str) -> np.ndarray:
    try:
        return np.asarray(json.loads(text), dtype=float)
    except (ValueError, TypeError):
        raise ConfigError(f"{key} must be a JSON number array, got {text!r}") from None


def base_context(cfg: RunConfig) -> ObsContext:
    return ObsContext(n=cfg.n, V=cfg.v, alpha=cfg.alpha, nu=cfg.nu, lam=cfg.lam)


def build_state_model(cfg: RunConfig) -> StateSpaceModel:
    if cfg.model == "explicit":
        if cfg.design is None or cfg.evolution is None or cfg.innovation is None:
            raise ConfigError("model = explicit needs design, evolution and innovation")
        F = _json_array(cfg.design, "design")
        d = F.size
        m0 = _json_array(cfg.initial_mean, "initial_mean") if cfg.initial_mean else np.full(d, cfg.m0)
        return StateSpaceModel(F, _json_array(cfg.evolution, "evolution"),
                               _json_array(cfg.innovation, "innovation"), m0, cfg.p0 * np.eye(d))
    if cfg.model == "random-walk":
        return build_model("random-walk", Omega=cfg.omega, m0=cfg.m0, P0=cfg.p0)
    if cfg.model == "linear-trend":
        return build_model("linear-trend", Omega=cfg.omega, m0=(cfg.m0, 0.0), P0=cfg.p0)
    if cfg.model == "trend-harmonics":
        return build_model("trend-harmonics", cycle=cfg.cycle, Omega_trend=cfg.omega_trend,
                           Omega_seas=cfg.omega_seas, P0=cfg.p0)
    raise ConfigError(f"unknown model {cfg.model!r}; use random-walk, linear-trend, trend-harmonics or explicit")


def build_engine_config(cfg: RunConfig, delta: float | None = None) -> EngineConfig:
    """``EngineConfig`` from settings; any package error here is a configuration error."""
    delta = cfg.delta if delta is None else delta
    try:
        family = get_family(cfg.family)
        mode = Mode.parse(cfg.mode)
        model = build_state_model(cfg) if mode is Mode.STATE_SPACE else None
        initial = ConjugateParams(cfg.r0, cfg.s0) if mode is Mode.DISCOUNT else None
        return EngineConfig(family, mode, model, delta, initial, cfg.approx, cfg.clamp, cfg.matching or "closed")
    except (DGLMError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


# ----------------------------------------------------------------- data


@dataclass(frozen=True)
class Series:
    labels: list[str]
    y: list[float | None]
    contexts: list[ObsContext]


def _open_input(path: str | None):
    if path is None or path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None


def _rows(text: str, source: str) -> tuple[list[str], list[tuple[int, list[str]]]]:
    lines = [(i, ln) for i, ln in enumerate(text.splitlines(), start=1) if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise DataError(f"{source}: empty input")
    delim = "\t" if "\t" in lines[0][1] else ","
    rows = list(csv.reader([ln for _, ln in lines], delimiter=delim))
    header = [h.strip() for h in rows[0]]
    body = [(lines[k][0], [c.strip() for c in row]) for k, row in enumerate(rows[1:], start=1)]
    for lineno, row in body:
        if len(row) != len(header):
            raise DataError(f"{source}:{lineno}: expected {len(header)} fields, got {len(row)}")
    return header, body


def _number(text: str, source: str, lineno: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"{source}:{lineno}: column {column}: not a number: {text!r}") from None
    if math.isinf(value):
        raise DataError(f"{source}:{lineno}: column {column}: infinite value")
    return value


_MISSING = {"", "na", "nan", "null"}


def read_series(text: str, family: str, ctx: ObsContext, source: str = "<input>") -> Series:
    """Parse ``t,y[,n]`` delimiter-separated text. Empty/``NA`` ``y`` cells are missing observations."""
    header, body = _rows(text, source)
    if header[:2] != ["t", "y"] or len(header) > 3 or (len(header) == 3 and header[2] != "n"):
        raise DataError(f"{source}:1: header must be t,y or t,y,n (got {','.join(header)})")
    has_n = len(header) == 3
    if has_n and family not in ("binomial", "negative-binomial", "geometric"):
        raise DataError(f"{source}:1: column n is only valid for binomial or negative-binomial data")
    if not body:
        raise DataError(f"{source}: no data rows")
    labels, ys, ctxs = [], [], []
    for lineno, row in body:
        labels.append(row[0])
        ys.append(None if row[1].lower() in _MISSING else _number(row[1], source, lineno, "y"))
        if has_n:
            n = _number(row[2], source, lineno, "n")
            if n != int(n) or n < 1:
                raise DataError(f"{source}:{lineno}: column n: expected a positive integer, got {row[2]!r}")
            ctxs.append(replace(ctx, n=int(n)))
        else:
            ctxs.append(ctx)
    return Series(labels, ys, ctxs)


# --------------------------------------------------------------- output


def _num(x):
    """JSON-safe float: non-finite values become null."""
    if x is None:
        return None
    if isinstance(x, np.ndarray):
        return [_num(v) for v in x.tolist()]
    if isinstance(x, (list, tuple)):
        return [_num(v) for v in x]
    x = float(x)
    return x if math.isfinite(x) else None


def _jsonl(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)


def _dsv(values) -> str:
    out = []
    for v in values:
        if v is None:
            out.append("NA")
        elif isinstance(v, str):
            out.append(v)
        elif isinstance(v, (int, np.integer)):
            out.append(str(int(v)))
        else:
            v = float(v)
            out.append(repr(v) if math.isfinite(v) else "NA")
    return ",".join(out)


def _step_line(label, rec) -> str:
    return _jsonl({
        "t": label,
        "y": _num(rec.y),
        "f": _num(rec.f),
        "q": _num(rec.q),
        "r": _num(rec.r),
        "s": _num(rec.s),
        "f_star": _num(rec.f_star),
        "q_star": _num(rec.q_star),
        "forecast_mean": _num(rec.forecast_mean),
        "forecast_variance": _num(rec.forecast_variance),
        "log_density": _num(rec.one_step_log_density),
        "posterior_mean": _num(rec.posterior_mean),
        "m": _num(rec.m),
        "P": _num(rec.P),
        "warnings": list(rec.warnings),
    })


def _band(family, rec, ctx):
    try:
        params = ConjugateParams(rec.r, rec.s)
        return tuple(float(family.forecast_quantile(params, p, ctx)) for p in PLOT_BAND)
    except (DGLMError, ValueError, ArithmeticError):
        return None, None


# ------------------------------------------------------------- commands


def _run(cfg: RunConfig, series: Series, engine: EngineConfig):
    return run_filter(series.y, engine, series.contexts)


def _summary(cfg, engine, series, result) -> dict:
    out = {
        "family": engine.family.name,
        "mode": engine.mode.value,
        "delta": engine.delta,
        "steps": len(result.records),
        "observed": sum(r.y is not None for r in result.records),
    }
    try:
        out["mse"] = _num(mse(result))
    except DGLMError:
        out["mse"] = None
    try:
        out["plugin_log_likelihood"] = _num(plugin_log_likelihood(result, engine, series.y, cfg.likelihood_omega,
                                                                  series.contexts))
    except (DGLMError, ValueError, ArithmeticError) as exc:
        out["plugin_log_likelihood"] = None
        out["plugin_log_likelihood_error"] = str(exc)
    out["log_predictive_score"] = _num(result.log_predictive_score)
    out["warnings"] = sum(len(r.warnings) for r in result.records)
    return out


def cmd_fit(cfg: RunConfig, series: Series, plot_data: bool) -> list[str]:
    engine = build_engine_config(cfg)
    result = _run(cfg, series, engine)
    if plot_data:
        lines = ["t,y,forecast_mean,lower,upper"]
        for label, rec, ctx in zip(series.labels, result.records, series.contexts):
            lo, hi = _band(engine.family, rec, engine.family.resolve(ctx))
            lines.append(_dsv([label, rec.y, rec.forecast_mean, lo, hi]))
        return lines
    lines = [_step_line(label, rec) for label, rec in zip(series.labels, result.records)]
    lines.append(_jsonl({"summary": _summary(cfg, engine, series, result)}))
    return lines


def cmd_forecast(cfg: RunConfig, series: Series, plot_data: bool) -> list[str]:
    if cfg.horizon < 1:
        raise ConfigError(f"horizon must be a positive integer, got {cfg.horizon}")
    probs = _floats(cfg.quantiles, "quantiles")
    if any(not 0.0 < p < 1.0 for p in probs):
        raise ConfigError("quantiles must lie in (0, 1)")
    engine = build_engine_config(cfg)
    result = _run(cfg, series, engine)
    rows = forecast_path(result.state, engine, cfg.horizon)
    lines = ["ell,mean,lower,upper"] if plot_data else []
    for fr in rows:
        if plot_data:
            lo, hi = _band(engine.family, fr, fr.ctx)
            lines.append(_dsv([fr.ell, fr.mean, lo, hi]))
            continue
        qs = {}
        for p in probs:
            try:
                qs[repr(p)] = _num(fr.quantile(p))
            except (DGLMError, ValueError, ArithmeticError):
                qs[repr(p)] = None
        lines.append(_jsonl({"ell": fr.ell, "f": _num(fr.f), "q": _num(fr.q), "r": _num(fr.r), "s": _num(fr.s),
                             "mean": _num(fr.mean), "variance": _num(fr.variance), "quantiles": qs}))
    return lines


def cmd_compare(cfg_a: RunConfig, cfg_b: RunConfig, series_a: Series, series_b: Series,
                plot_data: bool) -> list[str]:
    if cfg_a.window < 1:
        raise ConfigError(f"window must be a positive integer, got {cfg_a.window}")
    ea, eb = build_engine_config(cfg_a), build_engine_config(cfg_b)
    ra, rb = _run(cfg_a, series_a, ea), _run(cfg_b, series_b, eb)
    cmp = bayes_factors(ra, rb, cfg_a.window)
    if plot_data:
        lines = ["t,h1,hk,cumulative_log"]
        for label, h1, hk, c in zip(series_a.labels, cmp.h1, cmp.hk, cmp.cumulative):
            lines.append(_dsv([label, h1, hk, c]))
        return lines
    lines = [_jsonl({"t": label, "log_h1": _num(a), "h1": _num(b), "log_hk": _num(c), "cumulative_log": _num(d)})
             for label, a, b, c, d in zip(series_a.labels, cmp.log_h1, cmp.h1, cmp.log_hk, cmp.cumulative)]
    lines.append(_jsonl({"summary": {
        "model_1": {"family": ea.family.name, "mode": ea.mode.value, "delta": ea.delta},
        "model_2": {"family": eb.family.name, "mode": eb.mode.value, "delta": eb.delta},
        "window": cmp.k,
        "mean_h1": _num(cmp.mean_h1),
        "log_score_1": _num(cmp.score1),
        "log_score_2": _num(cmp.score2),
        "cumulative_log_bayes_factor": _num(cmp.cumulative[-1]),
    }}))
    return lines


def parse_grid(text: str) -> list[float]:
    """``a,b,c`` lists, ``a:b:step`` ranges, or ``a:b`` (step 0.05, always ending at ``b``)."""
    if ":" not in text:
        return _floats(text, "grid")
    parts = _floats(text.replace(":", ","), "grid")
    if len(parts) not in (2, 3):
        raise ConfigError(f"grid range must be a:b or a:b:step, got {text!r}")
    lo, hi = parts[:2]
    step = parts[2] if len(parts) == 3 else 0.05
    if step <= 0 or hi < lo:
        raise ConfigError(f"bad grid range {text!r}")
    count = int(math.floor((hi - lo) / step + 1e-9))
    grid = [round(lo + i * step, 10) for i in range(count + 1)]
    if not math.isclose(grid[-1], hi, abs_tol=1e-12):
        grid.append(hi)
    return grid


def cmd_gridsearch(cfg: RunConfig, series: Series) -> list[str]:
    grid = parse_grid(cfg.grid)
    engine = build_engine_config(cfg, delta=grid[0] if grid and 0 < grid[0] <= 1 else None)
    try:
        res = grid_search_delta(engine, series.y, grid, cfg.likelihood_omega, series.contexts)
    except DGLMError as exc:
        raise ConfigError(str(exc)) from None
    lines = res.table().splitlines()
    lines.append(f"# argmin_mse\t{res.argmin_mse}")
    lines.append(f"# argmax_log_likelihood\t{res.argmax_log_likelihood}")
    return lines


def cmd_simulate(cfg: RunConfig) -> list[str]:
    ctx = base_context(cfg)
    try:
        if cfg.family == "negative-binomial":
            n = 10 if cfg.n is None else cfg.n
            sim = simulate_negative_binomial(cfg.t_len, n, cfg.omega, cfg.seed)
            rows = [[t, int(y), n] for t, y in enumerate(sim.y, start=1)]
            header = "t,y,n"
        elif cfg.family == "weibull":
            sim = simulate_weibull(cfg.t_len, 3.0 if cfg.nu is None else cfg.nu, cfg.lambda0, cfg.omega, cfg.seed)
            rows = [[t, y] for t, y in enumerate(sim.y, start=1)]
            header = "t,y"
        else:
            if cfg.param0 is None:
                raise ConfigError(f"simulating {cfg.family} needs param0 (initial natural-scale parameter)")
            sim = simulate_generic(SimSpec(cfg.family, cfg.t_len, cfg.seed, param0=cfg.param0, Omega=cfg.omega,
                                           ctx=ctx))
            fam = get_family(cfg.family)
            if fam.name in ("binomial",):
                header = "t,y,n"
                rows = [[t, int(y), sim.ctx.n] for t, y in enumerate(sim.y, start=1)]
            else:
                header = "t,y"
                rows = [[t, int(y) if fam.discrete else y] for t, y in enumerate(sim.y, start=1)]
    except (DGLMError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return [header] + [_dsv(r) for r in rows]


def cmd_survival(cfg: RunConfig, text: str, source: str) -> list[str]:
    header, body = _rows(text, source)
    if not body:
        raise DataError(f"{source}: no data rows")
    if header[:3] == ["r", "s", "gap"] and len(header) <= 4:
        lines = ["r,s,gap,nu,survivor"]
        for lineno, row in body:
            r, s, gap = (_number(v, source, lineno, c) for v, c in zip(row[:3], header))
            nu = _number(row[3], source, lineno, "nu") if len(header) == 4 else (cfg.nu or 1.0)
            lines.append(_dsv([r, s, gap, nu, survivor_prediction(r, s, gap, nu)]))
        return lines
    if header[:2] != ["time", "event"]:
        raise DataError(f"{source}:1: header must be r,s,gap[,nu] or time,event[,covariates...]")
    if cfg.boundaries is None:
        raise ConfigError("fitting survival data needs boundaries")
    times, events, cov = [], [], []
    for lineno, row in body:
        times.append(_number(row[0], source, lineno, "time"))
        events.append(_number(row[1], source, lineno, "event"))
        cov.append([_number(v, source, lineno, c) for v, c in zip(row[2:], header[2:])])
    try:
        model = SurvivalModel(_floats(cfg.boundaries, "boundaries"), np.asarray(cov, dtype=float).reshape(len(cov), -1),
                              cfg.nu or 1.0, None if cfg.delta is not None else cfg.omega, cfg.delta,
                              P0=cfg.p0, matching=cfg.matching or "exact")
    except DGLMError as exc:
        raise ConfigError(str(exc)) from None
    try:
        fit = fit_survival(model, times, events)
    except StructuralError as exc:
        raise DataError(str(exc)) from None
    lines = ["individual,interval,y,survivor"]
    for j, t, ys, surv in fit.curves(cfg.points):
        for y, sv in zip(ys, surv):
            lines.append(_dsv([j + 1, t, y, sv]))
    return lines


# ------------------------------------------------------------------ main


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"flat key = value config file (default: ${CONFIG_ENV})")
    common.add_argument("--family")
    common.add_argument("--mode", choices=["state-space", "discount"])
    common.add_argument("--delta", type=float)
    common.add_argument("--horizon", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--approx", choices=["exact", "paper"])
    common.add_argument("--clamp", choices=["error", "log"])
    common.add_argument("--matching", choices=["closed", "exact"])
    common.add_argument("--model", help="random-walk, linear-trend, trend-harmonics or explicit")
    common.add_argument("--omega", type=float, help="state innovation variance (also the simulation variance)")
    common.add_argument("--cycle", type=int, help="season length of the trend-harmonics model")
    common.add_argument("--omega-trend", dest="omega_trend", type=float)
    common.add_argument("--omega-seas", dest="omega_seas", type=float)
    common.add_argument("--m0", type=float)
    common.add_argument("--p0", type=float)
    common.add_argument("--r0", type=float)
    common.add_argument("--s0", type=float)
    common.add_argument("--n", type=int)
    common.add_argument("--v", type=float)
    common.add_argument("--alpha", type=float)
    common.add_argument("--nu", type=float)
    common.add_argument("--lam", type=float)
    common.add_argument("--likelihood-omega", dest="likelihood_omega", type=float)
    common.add_argument("--output", "-o")
    common.add_argument("--plot-data", action="store_true", help="emit plot-ready DSV instead of records")

    p = argparse.ArgumentParser(prog="dglm", description="Dynamic generalized linear models.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("fit", "forecast", "gridsearch", "survival"):
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("input", nargs="?")
    sub.choices["forecast"].add_argument("--quantiles")
    sub.choices["gridsearch"].add_argument("--grid")
    sub.choices["survival"].add_argument("--boundaries")
    sub.choices["survival"].add_argument("--points", type=int)
    cp = sub.add_parser("compare", parents=[common])
    cp.add_argument("input", nargs="?")
    cp.add_argument("--config-b", dest="config_b", help="config file of model 2 (default: model 1's)")
    cp.add_argument("--family-b", dest="family_b")
    cp.add_argument("--mode-b", dest="mode_b", choices=["state-space", "discount"])
    cp.add_argument("--delta-b", dest="delta_b", type=float)
    cp.add_argument("--window", type=int)
    sp = sub.add_parser("simulate", parents=[common])
    sp.add_argument("--T", dest="t_len", type=int)
    sp.add_argument("--lambda0", type=float)
    sp.add_argument("--param0", type=float)
    return p


def _execute(args) -> list[str]:
    cfg = resolve_config(args, args.config)
    if args.command == "simulate":
        return cmd_simulate(cfg)
    source = args.input or cfg.input or "-"
    text = _open_input(source)
    if args.command == "survival":
        return cmd_survival(cfg, text, source)
    ctx = base_context(cfg)
    series = read_series(text, cfg.family, ctx, source)
    if args.command == "fit":
        return cmd_fit(cfg, series, args.plot_data)
    if args.command == "forecast":
        return cmd_forecast(cfg, series, args.plot_data)
    if args.command == "gridsearch":
        return cmd_gridsearch(cfg, series)
    # compare: model 2 starts from model 1's settings (or its own file) and takes the -b overrides
    cfg_b = resolve_config(args, args.config_b) if args.config_b else cfg
    overrides = {k: v for k, v in (("family", args.family_b), ("mode", args.mode_b), ("delta", args.delta_b))
                 if v is not None}
    cfg_b = replace(cfg_b, **overrides)
    series_b = read_series(text, cfg_b.family, base_context(cfg_b), source)
    return cmd_compare(cfg, cfg_b, series, series_b, args.plot_data)


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    args = build_parser().parse_args(argv)
    try:
        lines = _execute(args)
    except (ConfigError, ContextError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ObservationError, StructuralError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (DGLMError, ValueError, ArithmeticError) as exc:
        print(f"numeric error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    text = "\n".join(lines) + "\n"
    output = getattr(args, "output", None)
    if output:
        try:
            with open(output, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"config error: cannot write {output}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
