"""Discrete n-particle energy and its minimisation by gradient descent.

    E(x) = (1/n^2) sum_{j != k} W(x_j - x_k) + (1/n) sum_j V(x_j)
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from ._kernels import pair_sums
from .anisotropy import KernelSpec, as_kernel
from .ellipse_solver import EllipseShape

logger = logging.getLogger(__name__)

COLLISION_GUARD = 1e-9
MIN_STEP = 1e-14
ROUNDING_FLOOR = 1e-13  # relative energy change below which Armijo tests are noise
OVERFLOW = math.inf  # energy reported for coincident particles


@dataclass(frozen=True)
class ParticleConfig:
    positions: np.ndarray

    def __post_init__(self):
        p = np.array(self.positions, dtype=float)
        if p.ndim != 2 or p.shape[1] != 2 or p.shape[0] < 1:
            raise ValueError(f"positions must have shape (n, 2) with n >= 1, got {p.shape}")
        if not np.all(np.isfinite(p)):
            raise ValueError("positions must be finite")
        p.setflags(write=False)
        object.__setattr__(self, "positions", p)

    @property
    def n(self) -> int:
        return self.positions.shape[0]


@dataclass(frozen=True)
class Quadratic:
    pass


@dataclass(frozen=True)
class Power:
    p: float

    def __post_init__(self):
        if not (math.isfinite(self.p) and self.p > 0):
            raise ValueError(f"power exponent must be > 0, got {self.p}")


@dataclass(frozen=True)
class EllipticalWell:
    domain: EllipseShape

    def __post_init__(self):
        self.domain.require_nondegenerate()


ConfinementSpec = Union[Quadratic, Power, EllipticalWell]


def confinement_value(conf: ConfinementSpec, X: np.ndarray) -> np.ndarray:
    r2 = np.einsum("ni,ni->n", X, X)
    if isinstance(conf, Quadratic):
        return r2
    if isinstance(conf, Power):
        return r2 ** (0.5 * conf.p)
    if isinstance(conf, EllipticalWell):
        # hard wall: feasibility is enforced by projection
        return np.zeros(X.shape[0])
    raise TypeError(f"unknown confinement {conf!r}")


def confinement_gradient(conf: ConfinementSpec, X: np.ndarray) -> np.ndarray:
    if isinstance(conf, Quadratic):
        return 2.0 * X
    if isinstance(conf, Power):
        r2 = np.einsum("ni,ni->n", X, X)
        with np.errstate(divide="ignore", invalid="ignore"):
            f = np.where(r2 > 0, conf.p * r2 ** (0.5 * conf.p - 1.0), 0.0)
        return f[:, None] * X
    if isinstance(conf, EllipticalWell):
        return np.zeros_like(X)
    raise TypeError(f"unknown confinement {conf!r}")


def project_to_ellipse(X: np.ndarray, shape: EllipseShape, iters: int = 60) -> np.ndarray:
    """Closest points of the filled ellipse; inside points are left alone.

    Outside points solve sum_i a_i^2 p_i^2 / (a_i^2 + t)^2 = 1 for t > 0 by
    Newton from t = 0, which converges monotonically (the left side is convex
    and decreasing in t).
    """
    X = np.asarray(X, dtype=float)
    R = shape.rotation
    P = X @ R
    a2 = np.array([shape.a1**2, shape.a2**2])
    level = (P**2 / a2).sum(axis=1)
    out = level > 1.0
    if not out.any():
        return X.copy()
    p = P[out]
    t = np.zeros(p.shape[0])
    num = a2 * p**2
    for _ in range(iters):
        d = a2 + t[:, None]
        F = (num / d**2).sum(axis=1) - 1.0
        dF = -2.0 * (num / d**3).sum(axis=1)
        step = F / dF
        t = t - step
        if np.all(np.abs(step) <= 1e-15 * (1.0 + t)):
            break
    y = a2 * p / (a2 + t[:, None])
    # round-off can leave y a hair outside
    lev = np.sqrt((y**2 / a2).sum(axis=1))
    y = np.where(lev[:, None] > 1.0, y / lev[:, None], y)
    res = X.copy()
    res[out] = y @ R.T
    return res


def _positions(cfg) -> np.ndarray:
    if isinstance(cfg, ParticleConfig):
        return cfg.positions
    return np.asarray(cfg, dtype=float)


def _energy_and_gradient(X, kernel: KernelSpec, conf, backend=None):
    n = X.shape[0]
    s = kernel.series
    with np.errstate(divide="ignore", invalid="ignore"):
        pair, pgrad, rmin = pair_sums(X, kernel.log_strength, s.a, s.b, backend)
    if rmin < COLLISION_GUARD:
        return OVERFLOW, np.full_like(X, np.nan), rmin
    E = 2.0 * pair / n**2 + confinement_value(conf, X).sum() / n
    G = 2.0 * pgrad / n**2 + confinement_gradient(conf, X) / n
    return float(E), G, rmin


def discrete_energy(cfg, kernel, conf: ConfinementSpec, backend: str | None = None) -> float:
    """Discrete energy; ``math.inf`` when two particles (nearly) coincide."""
    return _energy_and_gradient(_positions(cfg), as_kernel(kernel), conf, backend)[0]


def discrete_gradient(cfg, kernel, conf: ConfinementSpec, backend: str | None = None) -> np.ndarray:
    """Gradient of :func:`discrete_energy` with respect to every position, shape (n, 2)."""
    E, G, _ = _energy_and_gradient(_positions(cfg), as_kernel(kernel), conf, backend)
    if not math.isfinite(E):
        raise FloatingPointError("coincident particles: gradient undefined")
    return G


def interaction_gradient(cfg, kernel, backend: str | None = None) -> np.ndarray:
    """Interaction part of the gradient alone; sums to zero over particles."""
    X = _positions(cfg)
    kernel = as_kernel(kernel)
    _, pgrad, _ = pair_sums(X, kernel.log_strength, kernel.series.a, kernel.series.b, backend)
    return 2.0 * pgrad / X.shape[0] ** 2


@dataclass(frozen=True)
class DescentOptions:
    max_iters: int = 5000
    step0: float = 0.05
    armijo_c: float = 1e-4
    shrink: float = 0.5
    grow: float = 1.5
    tol: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        for name in ("max_iters", "step0", "shrink", "grow", "tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.armijo_c < 1:
            raise ValueError(f"armijo_c must lie in (0, 1), got {self.armijo_c}")
        if not 0 < self.shrink < 1:
            raise ValueError(f"shrink must lie in (0, 1), got {self.shrink}")


@dataclass(frozen=True)
class LogRow:
    iter: int
    energy: float
    grad_norm: float
    step: float


@dataclass
class DescentResult:
    config: ParticleConfig
    log: list[LogRow] = field(default_factory=list)
    converged: bool = False
    stalled: bool = False
    precision_limited: bool = False

    @property
    def energy(self) -> float:
        return self.log[-1].energy


def initial_config(n: int, seed: int = 0, radius: float = math.sqrt(2.0)) -> ParticleConfig:
    """n points uniform in the disc of the given radius."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.random(n))
    t = 2.0 * math.pi * rng.random(n)
    return ParticleConfig(np.stack([r * np.cos(t), r * np.sin(t)], axis=1))


def minimize(cfg0, kernel, conf: ConfinementSpec, opts: DescentOptions | None = None,
             backend: str | None = None) -> DescentResult:
    """Armijo gradient descent (projected for an elliptical well).

    Steps are taken along -n * grad E, the force on each particle in units
    that do not shrink with n. ``grad_norm`` is the sup-norm of that force
    (of the projected-gradient map for a well).
    """
    opts = opts or DescentOptions()
    kernel = as_kernel(kernel)
    X = np.array(_positions(cfg0), dtype=float)
    n = X.shape[0]
    well = conf.domain if isinstance(conf, EllipticalWell) else None
    if well is not None and not np.allclose(project_to_ellipse(X, well), X, atol=1e-12, rtol=0):
        raise ValueError("start configuration lies outside the well")

    E, G, _ = _energy_and_gradient(X, kernel, conf, backend)
    if not math.isfinite(E):
        raise ValueError("start configuration has coincident particles")

    def stationarity(X, G, step):
        D = -n * G
        if well is None:
            return float(np.max(np.abs(D)))
        return float(np.max(np.abs(project_to_ellipse(X + D, well) - X)))

    step = opts.step0
    res = DescentResult(ParticleConfig(X))
    gnorm = stationarity(X, G, step)
    res.log.append(LogRow(0, E, gnorm, 0.0))
    for it in range(1, opts.max_iters + 1):
        if gnorm <= opts.tol:
            res.converged = True
            break
        D = -n * G
        first_decrease = None
        collapsed = False
        while True:
            Y = X + step * D
            if well is not None:
                Y = project_to_ellipse(Y, well)
            E_new, G_new, _ = _energy_and_gradient(Y, kernel, conf, backend)
            decrease = float(np.sum(G * (Y - X)))
            if first_decrease is None:
                first_decrease = decrease
            if math.isfinite(E_new) and E_new <= E + opts.armijo_c * decrease and E_new <= E:
                break
            step *= opts.shrink
            if step < MIN_STEP:
                collapsed = True
                break
        if collapsed:
            if abs(first_decrease) <= ROUNDING_FLOOR * max(1.0, abs(E)):
                # the predicted decrease is below what the energy sum can resolve
                res.converged = True
                res.precision_limited = True
                logger.info("descent reached the rounding floor at iteration %d", it)
            else:
                res.stalled = True
                logger.warning("descent stalled at iteration %d (energy %.12g)", it, E)
            break
        X, E, G = Y, E_new, G_new
        gnorm = stationarity(X, G, step)
        res.log.append(LogRow(it, E, gnorm, step))
        step *= opts.grow
    else:
        res.converged = gnorm <= opts.tol
    res.config = ParticleConfig(X)
    return res


def second_moments(cfg) -> np.ndarray:
    """(1/n) sum_j x_j x_j^T."""
    X = _positions(cfg)
    if X.shape[0] < 1:
        raise ValueError("need at least one particle")
    S = X.T @ X / X.shape[0]
    return 0.5 * (S + S.T)
