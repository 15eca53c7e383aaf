"""Synthetic series for the simulation studies and for property tests.

Randomness comes from numpy's counter-based ``Philox`` bit generator seeded
with the user seed; every variate is an inverse-CDF transform of uniforms
(normals via ``ndtri``), so a seed reproduces the same series on any platform
with the same numpy/scipy versions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special as sc
from scipy import stats

from .errors import DomainError, StructuralError
from .families import ObsContext, ResponseFamily, expit, get_family, logit
from .state_space import StateSpaceModel

RNG_NAME = "numpy.random.Philox"


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


def standard_normals(rng: np.random.Generator, size) -> np.ndarray:
    return sc.ndtri(rng.random(size))


@dataclass(frozen=True)
class SimulatedSeries:
    param: np.ndarray
    y: np.ndarray
    ctx: ObsContext = field(default_factory=ObsContext)
    eta: np.ndarray | None = None

    def __len__(self):
        return self.y.size


def _check_T(T):
    if int(T) != T or T < 1:
        raise DomainError(f"T must be a positive integer, got {T!r}")
    return int(T)


def simulate_negative_binomial(T: int = 100, n: int = 10, Omega: float = 1.0, seed: int = 0,
                               pi0: float | None = None) -> SimulatedSeries:
    """``pi_0 ~ Beta(2, 1)``; ``logit pi_t = logit pi_{t-1} - omega_t``, ``omega_t ~ N(0, Omega)``;
    ``y_t ~ NB(n, pi_t)`` (failures before the ``n``-th success)."""
    T = _check_T(T)
    rng = make_rng(seed)
    u0 = rng.random()
    pi = np.sqrt(u0) if pi0 is None else float(pi0)  # Beta(2, 1) by inversion
    omega = np.sqrt(Omega) * standard_normals(rng, T)
    path = np.empty(T)
    for t in range(T):
        pi = expit(logit(pi) - omega[t])
        path[t] = pi
    y = stats.nbinom.ppf(rng.random(T), n, path)
    return SimulatedSeries(path, y.astype(float), ObsContext(n=n))


def simulate_weibull(T: int = 500, nu: float = 3.0, lambda0: float = 1.0, Omega: float = 1.0,
                     seed: int = 0) -> SimulatedSeries:
    """``lambda_t = exp(omega_t) lambda_{t-1}``, ``y_t = (-lambda_t log U)^(1/nu)``."""
    T = _check_T(T)
    rng = make_rng(seed)
    omega = np.sqrt(Omega) * standard_normals(rng, T)
    lam = lambda0 * np.exp(np.cumsum(omega))
    y = (-lam * np.log(rng.random(T))) ** (1.0 / nu)
    return SimulatedSeries(lam, y, ObsContext(nu=nu))


@dataclass(frozen=True)
class SimSpec:
    """Generic simulation: ``eta_t = F' theta_t`` with a linear-Gaussian state,
    or (``model=None``) a scalar random walk on the family's transition scale."""

    family: str | ResponseFamily
    T: int
    seed: int = 0
    model: StateSpaceModel | None = None
    theta0: tuple[float, ...] | None = None
    param0: float | None = None
    Omega: float = 0.0
    ctx: ObsContext = field(default_factory=ObsContext)


def _check_in_domain(fam, p, ctx, t):
    # the Pareto walk on log(lambda/(lambda-1)) can cross lambda = 1
    try:
        ok = math.isfinite(p) and math.isfinite(float(fam.transition_eta(p, ctx)))
    except DomainError:
        ok = False
    if not ok:
        raise DomainError(f"{fam.name} random walk left the parameter domain at t={t} (value {p!r})")


def simulate_generic(spec: SimSpec) -> SimulatedSeries:
    fam = get_family(spec.family) if isinstance(spec.family, str) else spec.family
    T = _check_T(spec.T)
    ctx = fam.resolve(spec.ctx)
    rng = make_rng(spec.seed)
    if spec.model is not None:
        model = spec.model
        if model.Omega is None:
            raise StructuralError("generic simulation needs model.Omega")
        theta = np.asarray(spec.theta0 if spec.theta0 is not None else model.m0, dtype=float)
        if theta.size != model.dim:
            raise StructuralError(f"theta0 has length {theta.size}, model has dimension {model.dim}")
        # Cholesky of a PSD matrix via eigh so singular Omega is allowed
        w, v = np.linalg.eigh(model.Omega)
        root = v * np.sqrt(np.clip(w, 0.0, None))
        eta = np.empty(T)
        for t in range(T):
            theta = model.G @ theta + root @ standard_normals(rng, model.dim)
            eta[t] = model.F @ theta
        param = np.asarray(fam.param_from_eta(eta, ctx), dtype=float)
    else:
        if spec.param0 is None:
            raise StructuralError("random-walk simulation needs param0")
        if spec.Omega < 0:
            raise DomainError("Omega must be nonnegative")
        omega = np.sqrt(spec.Omega) * standard_normals(rng, T)
        param = np.empty(T)
        p = spec.param0
        for t in range(T):
            p = float(fam.evolve(p, omega[t], ctx))
            _check_in_domain(fam, p, ctx, t + 1)
            param[t] = p
        eta = np.asarray(fam.eta_from_param(param, ctx), dtype=float)
    y = np.asarray(fam.sample_obs(param, ctx, rng), dtype=float)
    return SimulatedSeries(param, y, ctx, eta)
