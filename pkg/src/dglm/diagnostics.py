"""Model assessment: plug-in log-likelihood, sequential Bayes factors, MSE
and discount-factor grid search."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .engine import EngineConfig, FilterResult, StepRecord, run_filter
from .errors import DGLMError, DomainError, StructuralError
from .families import ObsContext, ResponseFamily

__all__ = [
    "log_likelihood",
    "plugin_log_likelihood",
    "volatility_log_likelihood",
    "ModelComparison",
    "bayes_factors",
    "mse",
    "GridCell",
    "GridSearchResult",
    "grid_search_delta",
]


def _contexts(contexts, T):
    if contexts is None or isinstance(contexts, ObsContext):
        return [contexts] * T
    contexts = list(contexts)
    if len(contexts) != T:
        raise StructuralError(f"{len(contexts)} contexts for {T} observations")
    return contexts


def log_likelihood(family: ResponseFamily, path: Sequence[float], y: Sequence[float], Omega: float,
                   contexts=None, initial: float | None = None) -> float:
    """Log-likelihood of a fixed parameter path.

    ``sum_t log p(y_t | param_t) + sum_t log p(param_t | param_{t-1})`` where
    the transition is the family's Gaussian random walk (variance ``Omega``)
    on its transition scale. Without ``initial`` the transition sum starts at
    ``t = 2``. ``path`` holds natural-scale parameters (e.g. posterior means);
    ``None``/NaN observations contribute no observation term.
    """
    path = [float(p) for p in path]
    y = list(y)
    if len(path) != len(y):
        raise StructuralError(f"path has length {len(path)}, data has length {len(y)}")
    if not path:
        raise StructuralError("empty series")
    ctxs = _contexts(contexts, len(y))
    total = 0.0
    prev = initial
    for t, (p, yt, ct) in enumerate(zip(path, y, ctxs), start=1):
        try:
            ctx = family.resolve(ct)
            if yt is not None and not (isinstance(yt, float) and math.isnan(yt)):
                total += family.obs_logpdf(p, family.check_obs(yt, ctx), ctx)
            if prev is not None:
                total += family.transition_logpdf(p, prev, Omega, ctx)
        except (DGLMError, ValueError, ZeroDivisionError, OverflowError) as exc:
            raise DomainError(f"log-likelihood undefined at t={t}: {exc}") from exc
        if not math.isfinite(total):
            raise DomainError(f"log-likelihood undefined at t={t}: non-finite term")
        prev = p
    return float(total)


def plugin_log_likelihood(result: FilterResult, config: EngineConfig, y: Sequence[float], Omega: float,
                          contexts=None, initial: float | None = None) -> float:
    """:func:`log_likelihood` along the path of posterior point estimates of a run.

    Steps with a missing observation are dropped from the path.
    """
    ctxs = _contexts(contexts, len(result.records))
    keep = [(rec.posterior_mean, rec.y, c) for rec, c in zip(result.records, ctxs) if rec.y is not None]
    if not keep:
        raise StructuralError("no observed steps")
    path, ys, cs = zip(*keep)
    return log_likelihood(config.family, path, ys, Omega, list(cs), initial)


def volatility_log_likelihood(y2: Sequence[float], beta: Sequence[float], Omega: float,
                              beta0: float) -> float:
    """Closed-form likelihood used to score the gamma volatility model:

    ``-(T/2) log(2 Omega pi^2) - sum log y2_t - sum (log beta_t - log beta_{t-1})^2 / (2 Omega)``

    with ``beta_t = 1/(2 sigma_t^2)`` and ``y2`` the squared returns. This
    is not the general likelihood of the gamma family: it drops the
    ``-beta_t y2_t - log(beta_t)/2`` terms and doubles the ``log y2`` term
    (see the errata table); kept for comparison with published values.
    """
    y2 = np.asarray(y2, dtype=float)
    lb = np.log(np.concatenate(([beta0], np.asarray(beta, dtype=float))))
    if y2.size != lb.size - 1:
        raise StructuralError("y2 and beta must have equal length")
    if not Omega > 0:
        raise DomainError(f"Omega must be positive, got {Omega!r}")
    T = y2.size
    return float(-0.5 * T * math.log(2.0 * Omega * math.pi ** 2) - np.log(y2).sum()
                 - np.sum(np.diff(lb) ** 2) / (2.0 * Omega))


# --------------------------------------------------------- Bayes factors


def _log_densities(records) -> np.ndarray:
    if isinstance(records, FilterResult):
        records = records.records
    out = []
    for rec in records:
        v = rec.one_step_log_density if isinstance(rec, StepRecord) else rec
        out.append(math.nan if v is None else float(v))
    return np.asarray(out, dtype=float)


@dataclass(frozen=True)
class ModelComparison:
    """Sequential comparison of model 1 against model 2.

    ``log_h1[t]`` is ``log H_t(1)``, the log ratio of one-step predictive
    densities (0 where either density is missing); ``log_hk[t]`` is the sum
    over the last ``k`` steps (fewer at the start of the series) and
    ``cumulative`` the running sum from the first step.
    """

    log_h1: np.ndarray
    log_hk: np.ndarray
    cumulative: np.ndarray
    k: int
    score1: float
    score2: float

    @property
    def h1(self) -> np.ndarray:
        return np.exp(self.log_h1)

    @property
    def hk(self) -> np.ndarray:
        return np.exp(self.log_hk)

    @property
    def mean_h1(self) -> float:
        """Arithmetic mean of ``H_t(1)`` over all steps."""
        return float(np.mean(self.h1))

    @property
    def log_score_difference(self) -> float:
        return self.score1 - self.score2

    def __len__(self):
        return self.log_h1.size


def bayes_factors(model1, model2, k: int = 1) -> ModelComparison:
    """``H_t(k) = H_{t-1}(k-1) H_t(1)`` with ``H_t(0) = 1``, in log space.

    ``model1``/``model2`` are :class:`FilterResult` objects, record lists, or
    sequences of one-step predictive log-densities, aligned in time.
    """
    l1, l2 = _log_densities(model1), _log_densities(model2)
    if l1.size != l2.size:
        raise StructuralError(f"record sequences differ in length ({l1.size} vs {l2.size})")
    if l1.size == 0:
        raise StructuralError("empty record sequences")
    if int(k) != k or k < 1:
        raise DomainError(f"window k must be a positive integer, got {k!r}")
    k = int(k)
    both = ~(np.isnan(l1) | np.isnan(l2))
    log_h1 = np.where(both, l1 - l2, 0.0)
    cumulative = np.cumsum(log_h1)
    shifted = np.concatenate((np.zeros(k), cumulative[:-k])) if k < log_h1.size else np.zeros(log_h1.size)
    log_hk = cumulative - shifted[: log_h1.size]
    return ModelComparison(log_h1, log_hk, cumulative, k,
                           math.fsum(l1[both]), math.fsum(l2[both]))


# ------------------------------------------------------------------- MSE


def mse(records, y: Sequence[float] | None = None) -> float:
    """Mean squared one-step forecast error over observed steps.

    ``y`` defaults to the observations stored in the records.
    """
    if isinstance(records, FilterResult):
        records = records.records
    records = list(records)
    ys = [rec.y for rec in records] if y is None else list(y)
    if len(ys) != len(records):
        raise StructuralError(f"{len(records)} records for {len(ys)} observations")
    err = [(float(v) - rec.forecast_mean) ** 2 for rec, v in zip(records, ys)
           if v is not None and not (isinstance(v, float) and math.isnan(v))]
    if not err:
        raise StructuralError("no observed steps")
    return float(np.mean(err))


# ----------------------------------------------------------- grid search


@dataclass(frozen=True)
class GridCell:
    delta: float
    mse: float = math.nan
    log_likelihood: float = math.nan
    log_score: float = math.nan
    error: str | None = None


@dataclass(frozen=True)
class GridSearchResult:
    cells: tuple[GridCell, ...]
    results: dict = field(default_factory=dict, repr=False, compare=False)

    def _best(self, key, sign):
        ok = [c for c in self.cells if c.error is None and math.isfinite(getattr(c, key))]
        if not ok:
            return None
        return max(ok, key=lambda c: sign * getattr(c, key)).delta

    @property
    def argmin_mse(self) -> float | None:
        return self._best("mse", -1.0)

    @property
    def argmax_log_likelihood(self) -> float | None:
        return self._best("log_likelihood", 1.0)

    def table(self) -> str:
        lines = ["delta\tmse\tlog_likelihood\tlog_score\terror"]
        for c in self.cells:
            lines.append(f"{c.delta:g}\t{c.mse:.6g}\t{c.log_likelihood:.6g}\t{c.log_score:.6g}\t{c.error or ''}")
        return "\n".join(lines)


def grid_search_delta(config: EngineConfig, y: Sequence[float], grid: Sequence[float], Omega: float = 1.0,
                      contexts=None, initial: float | None = None, keep_results: bool = False,
                      ) -> GridSearchResult:
    """One full run per discount factor, scored by MSE and plug-in log-likelihood.

    ``Omega`` is the random-walk variance used in the likelihood's transition
    terms. Errors in a cell are recorded and the search continues.
    """
    grid = [float(d) for d in grid]
    if not grid:
        raise StructuralError("empty grid")
    for d in grid:
        if not 0.0 < d <= 1.0:
            raise DomainError(f"grid values must lie in (0, 1], got {d!r}")
    y = list(y)
    cells, results = [], {}
    for d in grid:
        try:
            cfg = replace(config, delta=d)
            res = run_filter(y, cfg, contexts)
            cell = GridCell(d, mse(res), plugin_log_likelihood(res, cfg, y, Omega, contexts, initial),
                            res.log_predictive_score)
            if keep_results:
                results[d] = res
        except (DGLMError, ValueError, ZeroDivisionError, OverflowError) as exc:
            cell = GridCell(d, error=f"{type(exc).__name__}: {exc}")
        cells.append(cell)
    return GridSearchResult(tuple(cells), results)
