"""Linear state evolution for the coefficients behind the linear predictor.

The predictor is ``eta_t = F' theta_t`` with ``theta_t = G theta_{t-1} + omega_t``
and ``Var(omega_t) = Omega``. Everything here is plain linear algebra on the
first two moments; the response family only enters through the scalar
moments ``(f, q)`` before and ``(f*, q*)`` after an observation.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePredictorError, DomainError, StructuralError

logger = logging.getLogger(__name__)

PSD_TOL = 1e-10


@dataclass(frozen=True)
class PredictorMoments:
    """Mean ``f`` and variance ``q`` of the linear predictor."""

    f: float
    q: float

    def __iter__(self):
        yield self.f
        yield self.q


def _as_vector(x, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise StructuralError(f"{name} must be a vector, got shape {arr.shape}")
    return arr


def _as_matrix(x, name: str, d: int) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr * np.eye(d) if d > 1 else arr.reshape(1, 1)
    elif arr.ndim == 1 and arr.size == d and d == 1:
        arr = arr.reshape(1, 1)
    if arr.shape != (d, d):
        raise StructuralError(f"{name} must be {d}x{d}, got shape {arr.shape}")
    return arr


def _symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def _check_psd(a: np.ndarray, name: str) -> None:
    if not np.allclose(a, a.T, atol=1e-8, rtol=1e-8):
        raise DomainError(f"{name} is not symmetric")
    if a.shape[0] and np.linalg.eigvalsh(_symmetrize(a)).min() < -PSD_TOL * max(1.0, np.abs(a).max()):
        raise DomainError(f"{name} is not positive semidefinite")


@dataclass(frozen=True)
class StateMoments:
    """Mean ``m`` and covariance ``P`` of the state vector."""

    m: np.ndarray
    P: np.ndarray

    def __post_init__(self):
        m = _as_vector(self.m, "m")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "P", _as_matrix(self.P, "P", m.size))

    @property
    def dim(self) -> int:
        return self.m.size


@dataclass(frozen=True)
class StateSpaceModel:
    """Time-invariant design ``F``, evolution ``G``, innovation covariance ``Omega``
    and initial moments ``(m0, P0)``.

    ``Omega`` may be ``None`` when the innovation is specified by a discount
    factor in the engine instead.
    """

    F: np.ndarray
    G: np.ndarray
    Omega: np.ndarray | None
    m0: np.ndarray
    P0: np.ndarray

    def __post_init__(self):
        F = _as_vector(self.F, "F")
        d = F.size
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "G", _as_matrix(self.G, "G", d))
        if self.Omega is not None:
            Omega = _as_matrix(self.Omega, "Omega", d)
            _check_psd(Omega, "Omega")
            object.__setattr__(self, "Omega", Omega)
        m0 = _as_vector(self.m0, "m0")
        if m0.size != d:
            raise StructuralError(f"m0 has length {m0.size}, expected {d}")
        object.__setattr__(self, "m0", m0)
        P0 = _as_matrix(self.P0, "P0", d)
        _check_psd(P0, "P0")
        object.__setattr__(self, "P0", P0)

    @property
    def dim(self) -> int:
        return self.F.size

    def initial_moments(self) -> StateMoments:
        return StateMoments(self.m0.copy(), self.P0.copy())

    def with_design(self, F) -> "StateSpaceModel":
        return StateSpaceModel(F, self.G, self.Omega, self.m0, self.P0)


def _clamp_psd(a: np.ndarray, warnings: list[str] | None, name: str) -> np.ndarray:
    a = _symmetrize(a)
    if a.shape[0] == 1:
        if a[0, 0] < 0.0:
            if a[0, 0] < -PSD_TOL:
                _warn(warnings, f"{name}: negative variance {a[0, 0]:.3e} clamped to 0")
            a = np.zeros_like(a)
        return a
    w, v = np.linalg.eigh(a)
    if w.min() < 0.0:
        if w.min() < -PSD_TOL * max(1.0, w.max()):
            _warn(warnings, f"{name}: eigenvalue {w.min():.3e} clamped to 0")
        a = _symmetrize((v * np.clip(w, 0.0, None)) @ v.T)
    return a


def _warn(warnings, message):
    logger.warning(message)
    if warnings is not None:
        warnings.append(message)


def propagate(prev: StateMoments, model: StateSpaceModel, Omega=None):
    """Prior moments ``h = G m`` and ``R = G P G' + Omega``.

    ``Omega`` overrides ``model.Omega`` (used for discount-specified innovations).
    """
    if prev.dim != model.dim:
        raise StructuralError(f"state has dimension {prev.dim}, model {model.dim}")
    Om = model.Omega if Omega is None else _as_matrix(Omega, "Omega", model.dim)
    if Om is None:
        raise StructuralError("no innovation covariance supplied")
    G = model.G
    h = G @ prev.m
    R = _symmetrize(G @ prev.P @ G.T + Om)
    return h, R


def predictor_moments(h, R, F) -> PredictorMoments:
    """``f = F'h`` and ``q = F'RF``."""
    F = _as_vector(F, "F")
    h = _as_vector(h, "h")
    R = np.asarray(R, dtype=float).reshape(F.size, F.size)
    if h.size != F.size:
        raise StructuralError(f"h has length {h.size}, F has length {F.size}")
    f = float(F @ h)
    q = float(F @ R @ F)
    if not q > 0.0:
        raise DegeneratePredictorError(f"predictor variance q={q!r} is not positive")
    return PredictorMoments(f, q)


def bayes_linear_update(h, R, F, prior: PredictorMoments, posterior: PredictorMoments,
                        warnings: list[str] | None = None) -> StateMoments:
    """Map a change in predictor moments ``(f, q) -> (f*, q*)`` onto the state.

    ``m = h + R F (f* - f) / q`` and ``P = R - R F F' R (1 - q*/q) / q``.
    """
    f, q = prior
    f_star, q_star = posterior
    if not q > 0.0:
        raise DegeneratePredictorError(f"prior predictor variance q={q!r} is not positive")
    F = _as_vector(F, "F")
    h = _as_vector(h, "h")
    R = np.asarray(R, dtype=float).reshape(F.size, F.size)
    a = R @ F
    m = h + a * ((f_star - f) / q)
    P = R - np.outer(a, a) * ((1.0 - q_star / q) / q)
    return StateMoments(m, _clamp_psd(P, warnings, "P"))


def k_step_predictor(current: StateMoments, model: StateSpaceModel, ell: int,
                     Omega=None) -> PredictorMoments:
    """Moments of ``eta_{t+ell}`` given the current posterior.

    ``f(ell) = F' G^ell m`` and
    ``q(ell) = F' (G^ell P G^ell' + sum_{j<ell} G^j Omega G^j') F``.
    """
    if int(ell) != ell or ell < 1:
        raise DomainError(f"horizon must be a positive integer, got {ell!r}")
    m, P = current.m, current.P
    Om = model.Omega if Omega is None else _as_matrix(Omega, "Omega", model.dim)
    if Om is None:
        raise StructuralError("no innovation covariance supplied")
    G = model.G
    for _ in range(int(ell)):
        m = G @ m
        P = G @ P @ G.T + Om
    return predictor_moments(m, _symmetrize(P), model.F)


def discount_innovation(P_prev, delta: float) -> np.ndarray:
    """Innovation covariance ``(1 - delta) / delta * P_prev``."""
    if not (0.0 < delta <= 1.0):
        raise DomainError(f"discount factor must lie in (0, 1], got {delta!r}")
    return (1.0 - delta) / delta * np.asarray(P_prev, dtype=float)


# ---------------------------------------------------------------- builders

def build_random_walk(Omega: float = 1.0, m0: float = 0.0, P0: float = 1000.0) -> StateSpaceModel:
    return StateSpaceModel([1.0], [[1.0]], [[Omega]], [m0], [[P0]])


def build_linear_trend(Omega=1.0, m0=(0.0, 0.0), P0: float = 1000.0) -> StateSpaceModel:
    """Local linear trend: level plus slope, level observed."""
    Om = np.asarray(Omega, dtype=float)
    if Om.ndim == 0:
        Om = float(Om) * np.eye(2)
    return StateSpaceModel([1.0, 0.0], [[1.0, 1.0], [0.0, 1.0]], Om, m0, float(P0) * np.eye(2))


def harmonic_block(cycle: int) -> tuple[np.ndarray, np.ndarray]:
    """Design and evolution for a full set of seasonal harmonics of period ``cycle``.

    Harmonic ``j < cycle/2`` is a 2x2 rotation by ``2 pi j / cycle``; the
    Nyquist harmonic contributes the scalar ``-1``.
    """
    if int(cycle) != cycle or cycle < 2 or cycle % 2:
        raise DomainError(f"cycle must be an even integer >= 2, got {cycle!r}")
    cycle = int(cycle)
    blocks_F: list[float] = []
    blocks_G: list[np.ndarray] = []
    for j in range(1, cycle // 2):
        w = 2.0 * math.pi * j / cycle
        c, s = math.cos(w), math.sin(w)
        # cos(pi/2) must come out as an exact zero for the quarterly model
        c = 0.0 if abs(c) < 1e-15 else c
        s = 0.0 if abs(s) < 1e-15 else s
        blocks_G.append(np.array([[c, s], [-s, c]]))
        blocks_F.extend([1.0, 0.0])
    blocks_G.append(np.array([[-1.0]]))
    blocks_F.append(1.0)
    d = len(blocks_F)
    G = np.zeros((d, d))
    i = 0
    for b in blocks_G:
        k = b.shape[0]
        G[i:i + k, i:i + k] = b
        i += k
    return np.array(blocks_F), G


def build_trend_harmonics(cycle: int = 4, Omega_trend: float = 1000.0, Omega_seas: float = 100.0,
                          P0: float = 1000.0) -> StateSpaceModel:
    """Linear trend plus full seasonal harmonics; block-diagonal ``G`` and ``Omega``."""
    Fs, Gs = harmonic_block(cycle)
    ds = Fs.size
    d = 2 + ds
    F = np.concatenate([[1.0, 0.0], Fs])
    G = np.zeros((d, d))
    G[:2, :2] = [[1.0, 1.0], [0.0, 1.0]]
    G[2:, 2:] = Gs
    Omega = np.diag([Omega_trend] * 2 + [Omega_seas] * ds)
    return StateSpaceModel(F, G, Omega, np.zeros(d), float(P0) * np.eye(d))


def build_model(name: str, **params) -> StateSpaceModel:
    """Builder lookup by name: ``random-walk``, ``linear-trend``, ``trend-harmonics``."""
    builders = {
        "random-walk": build_random_walk,
        "linear-trend": build_linear_trend,
        "trend-harmonics": build_trend_harmonics,
    }
    try:
        return builders[name](**params)
    except KeyError:
        raise DomainError(f"unknown state model {name!r}; choose from {sorted(builders)}") from None
