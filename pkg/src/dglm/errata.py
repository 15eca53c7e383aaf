"""Machine-checked table of printed formulas that disagree with their derivation.

``errata.tsv`` (shipped with the package) has one row per discrepancy:
``id``, ``topic``, ``printed`` form, ``derived`` form and the ``check`` that
arbitrates it (``oracle:<id>``, or ``-`` for purely notational rows).

Each check evaluates the printed and the derived closed forms at a fixed
parameter point and an independent oracle value (summation, quadrature,
Monte Carlo or direct log-density sums). A discrepancy is *detected* when the
derived form agrees with the oracle and the printed form does not.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from importlib import resources
from typing import Callable

import numpy as np
from scipy import special as sc
from scipy import stats

from . import oracle
from .families import ConjugateParams, ObsContext, get_family
from .families.inverse_gaussian import kappa, prior_mean
from .special import ApproxMode, digamma

__all__ = ["ErrataEntry", "ErrataCheck", "load_errata", "run_check", "CHECKS"]


@dataclass(frozen=True)
class ErrataEntry:
    id: str
    topic: str
    printed: str
    derived: str
    check: str


@dataclass(frozen=True)
class ErrataCheck:
    id: str
    printed_value: float
    derived_value: float
    report: oracle.OracleReport
    separation: float

    @property
    def printed_error(self) -> float:
        return abs(self.printed_value - self.report.oracle_value)

    @property
    def detected(self) -> bool:
        """Derived form passes the oracle and the printed form misses it by more than ``separation``."""
        return self.report.passed and self.printed_error > self.separation


def load_errata() -> list[ErrataEntry]:
    text = resources.files("dglm").joinpath("errata.tsv").read_text(encoding="utf-8")
    rows = csv.DictReader(io.StringIO(text), delimiter="\t")
    return [ErrataEntry(**row) for row in rows]


def _check(id_, printed, derived, report, separation=1e-6):
    return ErrataCheck(id_, float(printed), float(derived), report, separation)


def _quad(fn, lo, hi, breaks=()):
    return oracle.pdf_integral(fn, (lo, hi), closed_form=0.0, breaks=breaks).oracle_value


def _powered_moment(logpdf, lo, hi, delta, order=1, breaks=()):
    """Raw moment of the normalized ``pdf^delta``."""
    z = _quad(lambda x: math.exp(delta * logpdf(x)), lo, hi, breaks)
    return _quad(lambda x: x ** order * math.exp(delta * logpdf(x)), lo, hi, breaks) / z


# ------------------------------------------------------------- binomial


def _binomial_forecast_mean():
    fam, ctx, p = get_family("binomial"), ObsContext(n=5), ConjugateParams(2.0, 4.0)
    r, s, n = 2.0, 4.0, 5
    rep = oracle.pmf_moment(lambda k: fam.forecast_pdf(p, k, ctx), 1, fam.forecast_moments(p, ctx)[0],
                            tol=1e-10, stop=n, target="binomial forecast mean")
    return _check("binomial-forecast-mean", n * (r + 1) / (r + s + 1), rep.closed_form, rep)


def _binomial_forecast_variance():
    fam, ctx, p = get_family("binomial"), ObsContext(n=5), ConjugateParams(2.0, 4.0)
    r, s, n = 2.0, 4.0, 5
    printed = (n * (r + 1) / (r + s + 1) - n * (r + 1) * (r + 2) / ((r + s + 1) * (r + s + 2))
               + n * n * (r + 1) * s / ((r + s + 1) ** 2 * (r + s + 2)))
    rep = oracle.pmf_moment(lambda k: fam.forecast_pdf(p, k, ctx), 2, fam.forecast_moments(p, ctx)[1],
                            tol=1e-10, central=True, stop=n, target="binomial forecast variance")
    return _check("binomial-forecast-variance", printed, rep.closed_form, rep)


def _binomial_forecast_pmf():
    fam, ctx, p = get_family("binomial"), ObsContext(n=5), ConjugateParams(2.0, 4.0)
    n = 5
    rep = oracle.pmf_total(lambda k: fam.forecast_pdf(p, k, ctx), stop=n, tol=1e-10,
                           target="binomial forecast pmf total")
    printed_total = oracle.pmf_total(lambda k: fam.forecast_pdf(p, k, ctx) / n, stop=n).oracle_value
    return _check("binomial-forecast-pmf", printed_total, 1.0, rep)


def _binomial_posterior_trigamma():
    # posterior Beta(r + y, s - r + n - y) at r=2, s=4, n=5, y=3
    a, b = 5.0, 4.0
    s_post, r_post = 4.0 + 5.0 - 3.0, a
    printed = sc.polygamma(1, r_post) + sc.polygamma(1, s_post)
    derived = sc.polygamma(1, a) + sc.polygamma(1, b)
    law = stats.beta(a, b)
    mean = _quad(lambda x: (math.log(x) - math.log1p(-x)) * law.pdf(x), 0.0, 1.0, (0.5,))
    rep = oracle.moment_by_oracle(lambda x: law.pdf(x), 1, (0.0, 1.0), closed_form=derived, tol=1e-8,
                                  breaks=(0.5,), target="binomial posterior logit variance")
    var = _quad(lambda x: (math.log(x) - math.log1p(-x) - mean) ** 2 * law.pdf(x), 0.0, 1.0, (0.5,))
    rep = oracle._report("binomial posterior logit variance", derived, var, 1e-8, relative=True,
                         detail=rep.detail)
    return _check("binomial-posterior-trigamma", printed, derived, rep)


def _binomial_discount():
    fam, ctx = get_family("binomial"), ObsContext(n=5)
    post, delta = ConjugateParams(5.0, 9.0), 0.7
    derived = fam.power_discount(post, delta, ctx)
    printed = fam.power_discount(post, delta, ctx, ApproxMode.PAPER)
    law = stats.beta(post.r, post.s - post.r)
    mean = _powered_moment(law.logpdf, 0.0, 1.0, delta)
    rep = oracle._report("binomial discounted mean", derived.r / derived.s, mean, 1e-8, relative=True)
    return _check("binomial-discount", printed.r / printed.s, derived.r / derived.s, rep)


# ---------------------------------------------------- negative binomial


def _nb_forecast_pmf():
    fam, ctx, p = get_family("negative-binomial"), ObsContext(n=10), ConjugateParams(4.0, 0.6)
    r, s, n = 4.0, 0.6, 10

    def printed_pmf(y):
        return math.exp(sc.gammaln(r + n + s + 1) + sc.gammaln(r + y) + sc.gammaln(n * s + n + 1)
                        - sc.gammaln(r) - sc.gammaln(n * s + 1) - sc.gammaln(r + y + n * s + n + 1)
                        + sc.gammaln(y + n) - sc.gammaln(n) - sc.gammaln(y + 1))

    rep = oracle.pmf_total(lambda k: fam.forecast_pdf(p, k, ctx), tail_tol=1e-10,
                           target="negative-binomial forecast pmf total")
    printed_total = oracle.pmf_total(printed_pmf, tail_tol=1e-10).oracle_value
    return _check("negative-binomial-forecast-pmf", printed_total, 1.0, rep)


def _nb_forecast_variance():
    fam, ctx, p = get_family("negative-binomial"), ObsContext(n=10), ConjugateParams(4.0, 0.6)
    r, s, n = 4.0, 0.6, 10
    printed = (r + n * s) * (r + n * r + n * n * s - n) / (s * (n * s - 1)) - r * r / (n * n * s * s)
    derived = fam.forecast_moments(p, ctx)[1]
    rep = oracle.pmf_moment(lambda k: fam.forecast_pdf(p, k, ctx), 2, derived, tol=1e-6, central=True,
                            target="negative-binomial forecast variance")
    return _check("negative-binomial-forecast-variance", printed, derived, rep)


def _nb_pi0_mean():
    law = stats.beta(2.0, 1.0)
    rep = oracle.moment_by_oracle(law.pdf, 1, (0.0, 1.0), closed_form=2.0 / 3.0, tol=1e-10,
                                  target="Beta(2,1) mean")
    return _check("negative-binomial-pi0-mean", 2.0, 2.0 / 3.0, rep)


# ---------------------------------------------------------------- normal


def _normal_discount():
    fam, ctx = get_family("normal"), ObsContext(V=1.0)
    post, delta = ConjugateParams(5.0, 3.0), 0.8
    derived = fam.power_discount(post, delta, ctx)
    printed = fam.power_discount(post, delta, ctx, ApproxMode.PAPER)
    m, sd = post.r / post.s, 1.0 / math.sqrt(post.s)
    logpdf = stats.norm(m, sd).logpdf
    lo, hi = m - 40 * sd, m + 40 * sd
    mean = _powered_moment(logpdf, lo, hi, delta, breaks=(m,))
    var = _powered_moment(logpdf, lo, hi, delta, 2, breaks=(m,)) - mean * mean
    rep = oracle._report("normal discounted variance", 1.0 / derived.s, var, 1e-8, relative=True)
    return _check("normal-discount", 1.0 / printed.s, 1.0 / derived.s, rep)


# ----------------------------------------------------------------- gamma


def _gamma_forecast_pdf():
    fam, ctx, p = get_family("gamma"), ObsContext(alpha=2.0), ConjugateParams(3.0, 0.5)
    alpha, (r, s) = 2.0, p
    A = alpha * s + 1.0
    rep = oracle.pdf_integral(lambda y: fam.forecast_pdf(p, y, ctx), (0.0, math.inf), tol=1e-8,
                              breaks=(r,), target="gamma forecast pdf integral")
    # printed: Gamma(r) where the derivation has Gamma(alpha s + 1)
    printed_total = rep.oracle_value * math.exp(math.lgamma(A) - math.lgamma(r))
    return _check("gamma-forecast-pdf", printed_total, 1.0, rep)


def _gamma_posterior_moments():
    alpha, r, s, y = 2.0, 2.0, 0.5, 1.5
    A, R = alpha * s + alpha + 1.0, r + y
    printed = float(digamma(alpha * s + y + 1.0)) - math.log(r + 1.0)
    derived = float(digamma(A)) - math.log(R)
    law = stats.gamma(A, scale=1.0 / R)
    val = _quad(lambda b: math.log(b) * law.pdf(b), 0.0, math.inf, (A / R,))
    rep = oracle._report("gamma posterior E log beta", derived, val, 1e-8)
    return _check("gamma-posterior-moments", printed, derived, rep)


def _gamma_bayes_factor():
    fam = get_family("gamma")
    y, p = 1.3, ConjugateParams(2.0, 1.5)
    a1, a2 = 2.0, 1.0
    c1, c2 = ObsContext(alpha=a1), ObsContext(alpha=a2)
    derived = fam.forecast_logpdf(p, y, c1) - fam.forecast_logpdf(p, y, c2)
    r, s = p
    printed = (s * (a1 - a2) * math.log(r) + (a1 - a2) * math.log(y) + (s + 1) * (a2 - a1) * math.log(r + y)
               + math.lgamma(a2) + math.lgamma(a1 * s + a1 + 1) - math.lgamma(a1) - math.lgamma(a2 * s + a2 + 1))
    d1 = stats.gamma(a1 * s + 1.0, scale=1.0 / r)
    d2 = stats.gamma(a2 * s + 1.0, scale=1.0 / r)
    m1 = _quad(lambda b: stats.gamma.pdf(y, a1, scale=1.0 / b) * d1.pdf(b), 0.0, math.inf, (1.0,))
    m2 = _quad(lambda b: stats.gamma.pdf(y, a2, scale=1.0 / b) * d2.pdf(b), 0.0, math.inf, (1.0,))
    rep = oracle._report("gamma log Bayes factor (shape comparison)", derived, math.log(m1 / m2), 1e-8)
    return _check("gamma-bayes-factor", printed, derived, rep)


def _volatility_shape():
    from .families import volatility_posterior

    post = ConjugateParams(3.0, 6.0)
    beta = stats.gamma(0.5 * post.s + 1.0, scale=1.0 / post.r)
    # sigma^2 = 1/(2 beta): E sigma^2 = E(1/beta)/2
    val = 0.5 * _quad(lambda b: beta.pdf(b) / b, 0.0, math.inf, (1.0,))
    derived = volatility_posterior(post).mean()
    printed = stats.invgamma(0.5 * (post.s + 3.0), scale=0.5 * post.r).mean()
    rep = oracle._report("volatility E sigma^2", derived, val, 1e-8, relative=True)
    return _check("volatility-shape", printed, derived, rep)


def _volatility_likelihood():
    from .diagnostics import log_likelihood, volatility_log_likelihood

    fam, ctx = get_family("gamma"), ObsContext(alpha=0.5)
    y2 = np.array([0.5, 2.0, 1.0])
    beta = np.array([0.8, 0.4, 0.6])
    beta0, Omega = 1.0, 0.5
    derived = log_likelihood(fam, beta, y2, Omega, ctx, initial=beta0)
    printed = volatility_log_likelihood(y2, beta, Omega, beta0)
    lb = np.log(np.concatenate(([beta0], beta)))
    direct = float(np.sum(stats.gamma.logpdf(y2, 0.5, scale=1.0 / beta))
                   + np.sum(stats.lognorm.logpdf(beta, math.sqrt(Omega), scale=np.exp(lb[:-1]))))
    rep = oracle._report("volatility log-likelihood (direct log-density sum)", derived, direct, 1e-10)
    return _check("volatility-likelihood", printed, derived, rep)


# --------------------------------------------------------------- Weibull


def _weibull_forecast_pdf():
    fam, ctx, p = get_family("weibull"), ObsContext(nu=3.0), ConjugateParams(2.0, 4.0)
    rep = oracle.pdf_integral(lambda y: fam.forecast_pdf(p, y, ctx), (0.0, math.inf), tol=1e-8,
                              breaks=(1.0,), target="Weibull forecast pdf integral")
    return _check("weibull-forecast-pdf", rep.oracle_value / 3.0, 1.0, rep)


def _weibull_posterior_moments():
    r, s, y, nu = 2.0, 4.0, 1.2, 3.0
    w = y ** nu
    printed = float(digamma(s + w - 1.0)) - math.log(r + 1.0)
    derived = math.log(r + w) - float(digamma(s))
    # posterior 1/lambda ~ G(s, r + y^nu); eta = log lambda = -log(1/lambda)
    law = stats.gamma(s, scale=1.0 / (r + w))
    val = _quad(lambda x: -math.log(x) * law.pdf(x), 0.0, math.inf, (s / (r + w),))
    rep = oracle._report("Weibull posterior E log lambda", derived, val, 1e-8)
    return _check("weibull-posterior-moments", printed, derived, rep)


def _weibull_discount():
    fam, ctx = get_family("weibull"), ObsContext(nu=3.0)
    post, delta = ConjugateParams(3.0, 5.0), 0.7
    derived = fam.power_discount(post, delta, ctx)
    printed = fam.power_discount(post, delta, ctx, ApproxMode.PAPER)
    law = stats.gamma(post.s - 1.0, scale=1.0 / post.r)  # 1/lambda
    mean = _powered_moment(law.logpdf, 0.0, math.inf, delta, breaks=(1.0,))
    rep = oracle._report("Weibull discounted E(1/lambda)", (derived.s - 1.0) / derived.r, mean, 1e-8,
                         relative=True)
    return _check("weibull-discount", (printed.s - 1.0) / printed.r, (derived.s - 1.0) / derived.r, rep)


# ---------------------------------------------------------------- Pareto


def _pareto_forecast_pdf():
    fam, p = get_family("pareto"), ConjugateParams(2.0, 3.0)
    r, s = p
    # integrate over u = log y up to u = 700 (beyond it exp(u) overflows); the
    # omitted mass is (r / (r + 700))^(s + 1) < 2e-10
    rep = oracle.pdf_integral(lambda u: math.exp(fam.forecast_logpdf(p, math.exp(u)) + u), (0.0, 700.0),
                              tol=1e-8, breaks=(1.0, 10.0, 100.0), target="Pareto forecast pdf integral")
    printed_total = _quad(lambda u: r ** (s + 1) * (s + 1) / (r + u) ** (s + 1), 0.0, math.inf, (1.0, 10.0))
    return _check("pareto-forecast-pdf", printed_total, 1.0, rep)


def _pareto_posterior_moments():
    r, s, y = 2.0, 1.0, 4.0
    printed = float(digamma(s + math.log(y) + 1.0)) - math.log(r + 1.0)
    derived = float(digamma(s + 2.0)) - math.log(r + math.log(y))
    law = stats.gamma(s + 2.0, scale=1.0 / (r + math.log(y)))
    val = _quad(lambda lam: math.log(lam) * law.pdf(lam), 0.0, math.inf, (1.0,))
    rep = oracle._report("Pareto posterior E log lambda", derived, val, 1e-8)
    return _check("pareto-posterior-moments", printed, derived, rep)


def _pareto_bayes_factor():
    fam = get_family("pareto")
    y = 2.5
    (r1, s1), (r2, s2) = p1, p2 = ConjugateParams(2.0, 1.0), ConjugateParams(1.5, 3.0)
    u = math.log(y)
    derived = fam.forecast_logpdf(p1, y) - fam.forecast_logpdf(p2, y)
    printed = ((s1 + 1) * math.log(r1) + math.log(s1 + 1) + (s1 + 1) * math.log(r2 + u)
               - (s2 + 1) * math.log(r2) - math.log(s2 + 1) - (s2 + 1) * math.log(r1 + u))
    m = []
    for r, s in (p1, p2):
        law = stats.gamma(s + 1.0, scale=1.0 / r)
        m.append(_quad(lambda lam: lam * y ** (-lam - 1.0) * law.pdf(lam), 0.0, math.inf, (1.0,)))
    rep = oracle._report("Pareto log Bayes factor (mixing integrals)", derived, math.log(m[0] / m[1]), 1e-8)
    return _check("pareto-bayes-factor", printed, derived, rep)


def _beta_transform():
    lam = 3.0

    def derived_sampler(rng, n):
        return 1.0 - 1.0 / (rng.random(n) ** (-1.0 / lam))  # x = 1 - 1/y for Pareto y

    def printed_sampler(rng, n):
        return 1.0 / (1.0 - rng.random(n) ** (-1.0 / lam))

    rep = oracle.mc_moment(derived_sampler, 1.0 / (1.0 + lam), 100_000, seed=3,
                           target="Beta(1, lambda) mean via Pareto")
    printed = float(np.mean(printed_sampler(np.random.Generator(np.random.Philox(3)), 100_000)))
    return _check("beta-transform", printed, 1.0 / (1.0 + lam), rep, separation=0.05)


# ------------------------------------------------------ inverse Gaussian


def _ig_prior_pdf(r, s, k):
    return lambda mu: 2.0 * k * mu ** -3 * math.exp(-r / mu ** 2 + 2.0 * s / mu)


def _ig_kappa():
    r, s = 2.0, 1.0
    printed_k = r / (math.exp(s * s / r) * s * math.sqrt(math.pi / r) + 1.0)
    rep = oracle.pdf_integral(_ig_prior_pdf(r, s, kappa(r, s)), (0.0, math.inf), tol=1e-8,
                              breaks=(0.5, 1.0, 5.0), target="inverse-Gaussian prior integral")
    printed_total = _quad(_ig_prior_pdf(r, s, printed_k), 0.0, math.inf, (0.5, 1.0, 5.0))
    return _check("inverse-gaussian-kappa", printed_total, 1.0, rep)


def _ig_posterior():
    r, s, lam, y = 2.0, 1.0, 0.5, 1.5
    derived = prior_mean(r + lam * y / 2.0, s + lam / 2.0)
    printed = prior_mean(r + lam * y, s + lam)
    prior = _ig_prior_pdf(r, s, kappa(r, s))

    def joint(mu):
        return prior(mu) * stats.invgauss.pdf(y, mu / lam, scale=lam)

    z = _quad(joint, 0.0, math.inf, (0.5, 1.0, 5.0))
    mean = _quad(lambda mu: mu * joint(mu), 0.0, math.inf, (0.5, 1.0, 5.0)) / z
    rep = oracle._report("inverse-Gaussian posterior mean (Bayes by quadrature)", derived, mean, 1e-7,
                         relative=True)
    return _check("inverse-gaussian-posterior", printed, derived, rep)


def _digamma_approximation():
    x = 10.0
    series = -np.euler_gamma + sum(1.0 / k - 1.0 / (k + x - 1.0) for k in range(1, 2_000_000))
    derived = math.log(x) - 1.0 / (2.0 * x)
    printed = float(digamma(x, ApproxMode.PAPER))
    rep = oracle._report("digamma(10) series", derived, series, 1e-2)
    return _check("digamma-approximation", printed, derived, rep, separation=0.05)


CHECKS: dict[str, Callable[[], ErrataCheck]] = {
    "binomial-forecast-mean": _binomial_forecast_mean,
    "binomial-forecast-variance": _binomial_forecast_variance,
    "binomial-forecast-pmf": _binomial_forecast_pmf,
    "binomial-posterior-trigamma": _binomial_posterior_trigamma,
    "binomial-discount": _binomial_discount,
    "negative-binomial-forecast-pmf": _nb_forecast_pmf,
    "negative-binomial-forecast-variance": _nb_forecast_variance,
    "negative-binomial-pi0-mean": _nb_pi0_mean,
    "normal-discount": _normal_discount,
    "gamma-forecast-pdf": _gamma_forecast_pdf,
    "gamma-posterior-moments": _gamma_posterior_moments,
    "gamma-bayes-factor": _gamma_bayes_factor,
    "volatility-shape": _volatility_shape,
    "volatility-likelihood": _volatility_likelihood,
    "weibull-forecast-pdf": _weibull_forecast_pdf,
    "weibull-posterior-moments": _weibull_posterior_moments,
    "weibull-discount": _weibull_discount,
    "pareto-forecast-pdf": _pareto_forecast_pdf,
    "pareto-posterior-moments": _pareto_posterior_moments,
    "pareto-bayes-factor": _pareto_bayes_factor,
    "beta-transform": _beta_transform,
    "inverse-gaussian-kappa": _ig_kappa,
    "inverse-gaussian-posterior": _ig_posterior,
    "digamma-approximation": _digamma_approximation,
}


def run_check(entry: ErrataEntry | str) -> ErrataCheck | None:
    """Run the oracle check of an errata row; ``None`` for notational rows."""
    key = entry if isinstance(entry, str) else entry.id
    check = entry.check if isinstance(entry, ErrataEntry) else f"oracle:{key}"
    if check == "-":
        return None
    return CHECKS[check.split(":", 1)[1]]()
