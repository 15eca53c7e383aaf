"""Response families and a name registry."""
from __future__ import annotations

from ..errors import DomainError
from .base import ConjugateParams, ObsContext, ResponseFamily, expit, logit
from .continuous import (
    BetaViaParetoFamily,
    ExponentialFamily,
    GammaFamily,
    InverseGammaFamily,
    LogNormalFamily,
    NormalFamily,
    ParetoFamily,
    WeibullFamily,
    ewma_variance,
    gamma_log_bayes_factor,
    lognormal_log_bayes_factor,
    pareto_log_bayes_factor,
    squared_returns,
    volatility_posterior,
    weibull_log_bayes_factor,
)
from .discrete import (
    BinomialFamily,
    GeometricFamily,
    NegativeBinomialFamily,
    PoissonFamily,
)
from .inverse_gaussian import InverseGaussianFamily, kappa, prior_mean

_REGISTRY = {
    "binomial": BinomialFamily,
    "poisson": PoissonFamily,
    "negative-binomial": NegativeBinomialFamily,
    "geometric": GeometricFamily,
    "normal": NormalFamily,
    "lognormal": LogNormalFamily,
    "gamma": GammaFamily,
    "inverse-gamma": InverseGammaFamily,
    "weibull": WeibullFamily,
    "exponential": ExponentialFamily,
    "pareto": ParetoFamily,
    "beta-a": lambda: BetaViaParetoFamily("a"),
    "beta-b": lambda: BetaViaParetoFamily("b"),
    "inverse-gaussian": InverseGaussianFamily,
}

FAMILY_NAMES = tuple(_REGISTRY)


def get_family(name: str) -> ResponseFamily:
    """Family instance by registry name (underscores and case ignored)."""
    key = name.strip().lower().replace("_", "-")
    aliases = {"negbin": "negative-binomial", "log-normal": "lognormal", "ig": "inverse-gaussian"}
    key = aliases.get(key, key)
    try:
        return _REGISTRY[key]()
    except KeyError:
        raise DomainError(f"unknown family {name!r}; choose from {', '.join(FAMILY_NAMES)}") from None


def binomial_family() -> BinomialFamily:
    return BinomialFamily()


def poisson_family() -> PoissonFamily:
    return PoissonFamily()


def negative_binomial_family() -> NegativeBinomialFamily:
    return NegativeBinomialFamily()


def normal_family() -> NormalFamily:
    return NormalFamily()


def lognormal_family() -> LogNormalFamily:
    return LogNormalFamily()


def gamma_family() -> GammaFamily:
    return GammaFamily()


def weibull_family() -> WeibullFamily:
    return WeibullFamily()


def pareto_family() -> ParetoFamily:
    return ParetoFamily()


def inverse_gaussian_family() -> InverseGaussianFamily:
    return InverseGaussianFamily()


__all__ = [
    "ConjugateParams", "ObsContext", "ResponseFamily", "logit", "expit",
    "BinomialFamily", "PoissonFamily", "NegativeBinomialFamily", "GeometricFamily",
    "NormalFamily", "LogNormalFamily", "GammaFamily", "InverseGammaFamily",
    "WeibullFamily", "ExponentialFamily", "ParetoFamily", "BetaViaParetoFamily",
    "InverseGaussianFamily", "kappa", "prior_mean",
    "lognormal_log_bayes_factor", "gamma_log_bayes_factor", "weibull_log_bayes_factor",
    "pareto_log_bayes_factor", "squared_returns", "volatility_posterior", "ewma_variance",
    "get_family", "FAMILY_NAMES",
    "binomial_family", "poisson_family", "negative_binomial_family", "normal_family",
    "lognormal_family", "gamma_family", "weibull_family", "pareto_family",
    "inverse_gaussian_family",
]
