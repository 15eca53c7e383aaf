"""Brute-force numerical checks for closed-form densities and moments.

Everything here works from a density handle alone (a pmf on the integers or
a pdf on an interval) and never calls the closed forms it is used to check.

* Discrete totals and moments: partial sums in doubling chunks with a tail
  bound from the last terms.
* Continuous integrals: QUADPACK adaptive quadrature (``scipy.integrate.quad``);
  infinite ranges use its ``x = a + (1 - u)/u`` map.
* Monte Carlo: sample moments with a 3-sigma band.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import DomainError

__all__ = [
    "OracleReport",
    "pmf_total",
    "pmf_moment",
    "pdf_integral",
    "moment_by_oracle",
    "mc_moment",
]

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


@dataclass(frozen=True)
class OracleReport:
    """Closed-form value against an oracle value.

    ``verdict`` is ``pass`` iff ``abs_error <= tolerance`` (relative error
    when ``relative`` is set), ``inconclusive`` when the oracle itself did
    not converge. ``detail`` carries oracle diagnostics (tail bound, number
    of terms, quadrature error estimate, MC standard error).
    """

    target: str
    closed_form: float
    oracle_value: float
    abs_error: float
    rel_error: float
    tolerance: float
    verdict: str
    relative: bool = False
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def line(self) -> str:
        return (f"{self.target}\tclosed={self.closed_form:.12g}\toracle={self.oracle_value:.12g}"
                f"\tabs={self.abs_error:.3g}\trel={self.rel_error:.3g}\ttol={self.tolerance:.3g}"
                f"\t{self.verdict}\t{self.detail}")


def _report(target, closed, value, tol, relative=False, converged=True, detail="", band=None):
    abs_err = abs(value - closed)
    rel_err = abs_err / abs(closed) if closed != 0.0 else abs_err
    err = rel_err if relative else abs_err
    if band is not None:
        verdict = PASS if abs_err <= band else FAIL
    else:
        verdict = PASS if err <= tol else FAIL
    if not converged:
        verdict = INCONCLUSIVE
    return OracleReport(target, float(closed), float(value), float(abs_err), float(rel_err), float(tol),
                        verdict, relative, detail)


# -------------------------------------------------------------- discrete


def _eval_terms(pmf, ks: np.ndarray, weight) -> np.ndarray:
    try:
        p = np.asarray(pmf(ks), dtype=float)
        if p.shape != ks.shape:
            raise TypeError
    except (TypeError, ValueError):
        p = np.array([float(pmf(int(k))) for k in ks])
    return p * weight(ks) if weight is not None else p


def _tail_bound(ks: np.ndarray, terms: np.ndarray) -> tuple[float, bool]:
    """Bound on the sum of terms beyond ``ks[-1]``.

    If the last term ratios are below 1 and nonincreasing the geometric bound
    ``t_K rho / (1 - rho)`` is rigorous for that pattern (certified). If
    instead the local power-law exponents are above 1 and nondecreasing,
    ``t_K K / (b_K - 1)`` is rigorous for that pattern (certified). Otherwise a
    power-law extrapolation ``2 t_K K / (b - 1)`` from the decay between ``K/2``
    and ``K`` (estimated, not certified).
    """
    last = terms[-1]
    if last == 0.0:
        nz = np.flatnonzero(terms)
        if nz.size == 0 or nz[-1] < terms.size - 64:
            return 0.0, True
    tail = terms[-32:]
    if np.all(tail > 0):
        ratios = tail[1:] / tail[:-1]
        if ratios[-1] < 1.0 and np.all(np.diff(ratios) <= 1e-15):
            rho = ratios[-1]
            return float(last * rho / (1.0 - rho)), True
        # local power-law exponents t_k / t_{k+1} = ((k+1)/k)^b_k; if they are
        # nondecreasing and above 1, t_j <= t_K (K/j)^b_K for j > K
        kt = ks[-32:].astype(float)
        if kt[0] > 0:
            b = np.log(tail[:-1] / tail[1:]) / np.log(kt[1:] / kt[:-1])
            if b[-1] > 1.0 and np.all(np.diff(b) >= -1e-9 * np.abs(b[1:])):
                return float(last * kt[-1] / (b[-1] - 1.0)), True
    K = float(ks[-1])
    half = int(np.searchsorted(ks, K / 2.0))
    if K < 8 or terms[half] <= 0.0 or last <= 0.0:
        return math.inf, False
    b = math.log(terms[half] / last) / math.log(K / ks[half])
    if b <= 1.0:
        return math.inf, False
    return float(2.0 * last * K / (b - 1.0)), False


def _partial_sum(pmf, start, stop, tail_tol, cap, weight=None):
    total, k, chunk = 0.0, int(start), 64
    certified, bound = True, 0.0
    while True:
        hi = k + chunk
        if stop is not None:
            hi = min(hi, int(stop) + 1)
        ks = np.arange(k, hi)
        terms = _eval_terms(pmf, ks, weight)
        total += float(math.fsum(terms))
        k = hi
        if stop is not None and k > stop:
            return total, 0.0, True, k - start, True
        bound, certified = _tail_bound(ks, terms)
        if bound < tail_tol:
            return total, bound, certified, k - start, True
        if k - start >= cap:
            return total, bound, certified, k - start, False
        chunk = min(2 * chunk, cap - (k - start))


def pmf_total(pmf: Callable, tail_tol: float = 1e-12, tol: float = 1e-6, start: int = 0,
              stop: int | None = None, cap: int = 10**6, target: str = "pmf total") -> OracleReport:
    """Sum a pmf over ``start, start+1, ...`` (up to ``stop`` for finite support)
    and compare with 1.

    Summation stops once the tail bound drops below ``tail_tol``; hitting
    ``cap`` terms gives an inconclusive verdict.
    """
    total, bound, certified, n, ok = _partial_sum(pmf, start, stop, tail_tol, cap)
    detail = f"terms={n} tail<={bound:.3g} {'certified' if certified else 'extrapolated'}"
    return _report(target, 1.0, total, tol, converged=ok, detail=detail)


def pmf_moment(pmf: Callable, order: int = 1, closed_form: float = math.nan, tol: float = 1e-4,
               central: bool = False, start: int = 0, stop: int | None = None, tail_tol: float = 1e-10,
               cap: int = 10**6, target: str = "pmf moment") -> OracleReport:
    """Raw (or central, about the oracle mean) moment of a pmf by summation;
    relative tolerance."""
    m1 = _partial_sum(pmf, start, stop, tail_tol, cap, lambda k: k.astype(float))
    if order == 1 and not central:
        value, bound, cert, n, ok = m1
    else:
        c = m1[0] if central else 0.0
        value, bound, cert, n, ok = _partial_sum(pmf, start, stop, tail_tol, cap,
                                                 lambda k: (k.astype(float) - c) ** order)
        ok = ok and m1[4]
    detail = f"terms={n} tail<={bound:.3g}"
    return _report(target, closed_form, value, tol, relative=True, converged=ok, detail=detail)


# ------------------------------------------------------------ continuous


def _quad(fn, lo, hi, breaks, epsabs, epsrel):
    """Integrate over ``[lo, hi]`` split at ``breaks``; returns (value, error, converged)."""
    edges = [lo] + sorted(b for b in breaks if lo < b < hi) + [hi]
    total, err, ok = 0.0, 0.0, True
    for a, b in zip(edges[:-1], edges[1:]):
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                v, e = integrate.quad(fn, a, b, epsabs=epsabs, epsrel=epsrel, limit=500)
            except integrate.IntegrationWarning:
                warnings.simplefilter("ignore", integrate.IntegrationWarning)
                v, e = integrate.quad(fn, a, b, epsabs=epsabs, epsrel=epsrel, limit=500)
                ok = False
        total += v
        err += e
    return total, err, ok


def pdf_integral(pdf: Callable, support: tuple[float, float] = (-math.inf, math.inf), tol: float = 1e-8,
                 breaks=(), closed_form: float = 1.0, target: str = "pdf integral") -> OracleReport:
    """``int pdf`` over ``support`` against ``closed_form`` (default 1).

    ``breaks`` are interior split points (e.g. the mode and a few scale
    multiples), which help quadrature on sharply peaked densities.
    """
    lo, hi = support
    if not lo < hi:
        raise DomainError(f"empty support {support!r}")
    value, err, ok = _quad(pdf, lo, hi, breaks, epsabs=min(tol, 1e-10) * 1e-2, epsrel=1e-12)
    return _report(target, closed_form, value, tol, converged=ok and err <= tol,
                   detail=f"quad_err={err:.3g}")


def moment_by_oracle(pdf: Callable, order: int = 1, support: tuple[float, float] = (-math.inf, math.inf),
                     closed_form: float = math.nan, tol: float = 1e-4, central: bool = False, breaks=(),
                     target: str = "pdf moment") -> OracleReport:
    """Raw (or central) moment of a continuous density by quadrature; relative tolerance."""
    lo, hi = support
    c = 0.0
    ok_c = True
    if central:
        c, _, ok_c = _quad(lambda x: x * pdf(x), lo, hi, breaks, 0.0, 1e-12)
    value, err, ok = _quad(lambda x: (x - c) ** order * pdf(x), lo, hi, breaks, 0.0, 1e-12)
    return _report(target, closed_form, value, tol, relative=True, converged=ok and ok_c,
                   detail=f"quad_err={err:.3g}")


# ----------------------------------------------------------- Monte Carlo


def mc_moment(sampler: Callable[[np.random.Generator, int], np.ndarray], closed_form: float,
              n_draws: int = 100_000, seed: int = 0, order: int = 1, central: bool = False,
              sigmas: float = 3.0, target: str = "mc moment") -> OracleReport:
    """Sample moment of ``sampler(rng, n_draws)`` with a ``sigmas``-sigma band.

    Passes iff the closed form lies inside the band. For ``central`` moments
    the band uses the standard error of the raw statistic, which is adequate
    for the sample sizes used here.
    """
    if n_draws < 1000:
        raise DomainError("n_draws must be at least 1000")
    from .simulate import make_rng

    x = np.asarray(sampler(make_rng(seed), int(n_draws)), dtype=float)
    if central:
        x = x - x.mean()
    stat = x ** order
    value = float(stat.mean())
    se = float(stat.std(ddof=1) / math.sqrt(stat.size))
    return _report(target, closed_form, value, sigmas * se, band=sigmas * se,
                   detail=f"n={stat.size} se={se:.3g}")
