"""Ellipse law for quadratic confinement.

With confinement |x|^2, the minimiser is the uniform law on an ellipse
``E = {x : x^T M^{-1} x <= 1}`` whenever the matrix M solves

    (1/pi) \\oint psi_hat(y) y_j y_k / (M y . y) dH^1(y) = delta_jk.

Writing ``M = L (I + [[u, v], [v, -u]])`` on the trace slice tr M = 2L, the
solution is the critical point of the convex function

    g(u, v) = -(1/pi) \\oint psi_hat(y) log(1 + u cos 2t + v sin 2t) dt

on the open unit disc. When psi_hat touches zero the minimum may sit on the
rim of the disc; that is detected by continuation in the log strength and
reported as a semicircle law on a line.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from ._quad import circle_rule, pow2_at_least
from .anisotropy import (
    TOL_POS,
    AnisotropySeries,
    KernelSpec,
    PsiClassification,
    as_kernel,
    classify_psi,
)

logger = logging.getLogger(__name__)

DEFAULT_QUAD_NODES = 512
EPS_SCHEDULE = (0.1, 0.05, 0.025, 0.0125, 0.00625)
SEGMENT_THRESHOLD = 1e-3
WALL = 1e-6  # closest approach of beta to 0 or 2


class OutsideConvexityError(ValueError):
    """psi_hat takes negative values; no minimiser characterisation applies."""

    def __init__(self, classification: PsiClassification):
        self.classification = classification
        super().__init__(
            "outside the convexity range: psi_hat has minimum "
            f"{classification.min_value:.6g} at angle {classification.argmin_angle:.6g}"
        )


class SolverError(RuntimeError):
    def __init__(self, message: str, best_residual: float):
        self.best_residual = best_residual
        super().__init__(f"{message} (best residual {best_residual:.3e})")


@dataclass(frozen=True)
class EllipseShape:
    phi: float
    a1: float
    a2: float

    def __post_init__(self):
        if not (self.a1 >= 0 and self.a2 >= 0):
            raise ValueError(f"semi-axes must be non-negative, got {self.a1}, {self.a2}")

    @property
    def rotation(self) -> np.ndarray:
        c, s = math.cos(self.phi), math.sin(self.phi)
        return np.array([[c, -s], [s, c]])

    @property
    def matrix(self) -> np.ndarray:
        R = self.rotation
        return R @ np.diag([self.a1**2, self.a2**2]) @ R.T

    @property
    def area(self) -> float:
        return math.pi * self.a1 * self.a2

    def contains(self, x, dilation: float = 1.0) -> np.ndarray:
        """Whether points lie in the ellipse scaled by ``dilation``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        z = x @ self.rotation
        q = (z[:, 0] / self.a1) ** 2 + (z[:, 1] / self.a2) ** 2
        return q <= dilation**2

    def require_nondegenerate(self):
        if not (self.a1 > 0 and self.a2 > 0):
            raise ValueError(f"degenerate ellipse (a1={self.a1}, a2={self.a2})")


@dataclass(frozen=True)
class Ellipse:
    shape: EllipseShape

    def to_json(self) -> dict:
        return {"kind": "ellipse", "phi": self.shape.phi, "a1": self.shape.a1, "a2": self.shape.a2}


@dataclass(frozen=True)
class Segment:
    """Semicircle law along the line at ``direction_angle`` through the origin."""

    direction_angle: float
    half_length: float = math.sqrt(2.0)

    @property
    def direction(self) -> np.ndarray:
        return np.array([math.cos(self.direction_angle), math.sin(self.direction_angle)])

    def density(self, t):
        t = np.asarray(t, dtype=float)
        R = self.half_length
        return np.where(np.abs(t) < R, 2.0 / (math.pi * R**2) * np.sqrt(np.clip(R**2 - t**2, 0, None)), 0.0)

    def to_json(self) -> dict:
        return {"kind": "segment", "direction": self.direction_angle}


MinimizerPrediction = Union[Ellipse, Segment]


def prediction_from_json(d: dict) -> MinimizerPrediction:
    kind = d.get("kind")
    if kind == "ellipse":
        return Ellipse(EllipseShape(float(d["phi"]), float(d["a1"]), float(d["a2"])))
    if kind == "segment":
        return Segment(float(d["direction"]), float(d.get("half_length", math.sqrt(2.0))))
    raise ValueError(f"unknown prediction kind {kind!r}")


def _check_nodes(quad_nodes: int):
    if quad_nodes < 64 or quad_nodes % 2:
        raise ValueError(f"quad_nodes must be even and >= 64, got {quad_nodes}")


def _check_beta(beta: float):
    if not (0.0 < beta < 2.0):
        raise ValueError(f"beta must lie in (0, 2), got {beta}")


def gamma_objective(series, beta: float, phi: float, quad_nodes: int = DEFAULT_QUAD_NODES) -> float:
    """-(1/pi) \\oint psi_hat(Q y) log(beta y1^2 + (2 - beta) y2^2), Q = rotation by phi."""
    _check_beta(beta)
    _check_nodes(quad_nodes)
    kernel = as_kernel(series)
    t, w = circle_rule(quad_nodes)
    psi = kernel.psi_hat(t + phi)
    c2, s2 = np.cos(t) ** 2, np.sin(t) ** 2
    return float(-w / math.pi * np.sum(psi * np.log(beta * c2 + (2.0 - beta) * s2)))


def gamma_beta_derivative(series, beta: float, phi: float, quad_nodes: int = DEFAULT_QUAD_NODES) -> float:
    _check_beta(beta)
    _check_nodes(quad_nodes)
    kernel = as_kernel(series)
    t, w = circle_rule(quad_nodes)
    psi = kernel.psi_hat(t + phi)
    c2, s2 = np.cos(t) ** 2, np.sin(t) ** 2
    return float(w / math.pi * np.sum(psi * (2.0 * s2 - 1.0) / (beta * c2 + (2.0 - beta) * s2)))


def system_residual(series, shape: EllipseShape, quad_nodes: int = DEFAULT_QUAD_NODES) -> np.ndarray:
    """(1/pi) \\oint psi_hat(y) y y^T / (M y . y) dH^1 - I for the ellipse ``shape``."""
    shape.require_nondegenerate()
    _check_nodes(quad_nodes)
    kernel = as_kernel(series)
    t, w = circle_rule(quad_nodes)
    y = np.stack([np.cos(t), np.sin(t)], axis=1)
    My = np.einsum("ij,nj->ni", shape.matrix, y)
    q = np.einsum("ni,ni->n", My, y)
    weight = kernel.psi_hat(t) / q * (w / math.pi)
    S = np.einsum("n,ni,nj->ij", weight, y, y)
    S = 0.5 * (S + S.T)
    return S - np.eye(2)


# -- trace-slice Newton ------------------------------------------------------


def _nodes_for(rho: float, base: int) -> int:
    """Node count resolving 1/(1 - rho cos) to rounding error."""
    gap = max(1.0 - rho, WALL / 2)
    return min(max(base, pow2_at_least(64.0 / math.sqrt(gap))), 1 << 20)


class _TraceProblem:
    """g(u, v) and its derivatives for a fixed angular profile."""

    def __init__(self, kernel: KernelSpec, shift: float, base_nodes: int):
        self.kernel = kernel
        self.shift = shift  # extra log strength added on top of the kernel
        self.level = kernel.log_strength + shift
        self.base = max(base_nodes, 4 * kernel.series.N + 64)
        self._cache: dict[int, tuple] = {}

    def _tables(self, n: int):
        if n not in self._cache:
            t, w = circle_rule(n)
            p = (self.kernel.psi_hat(t) + self.shift) / self.level  # mean 1
            self._cache[n] = (np.cos(2 * t), np.sin(2 * t), p * w / math.pi)
        return self._cache[n]

    def value(self, u: float, v: float) -> float:
        rho = math.hypot(u, v)
        c, s, pw = self._tables(_nodes_for(rho, self.base))
        D = 1.0 + u * c + v * s
        return float(-np.sum(pw * np.log(D)))

    def derivatives(self, u: float, v: float):
        rho = math.hypot(u, v)
        c, s, pw = self._tables(_nodes_for(rho, self.base))
        D = 1.0 + u * c + v * s
        val = float(-np.sum(pw * np.log(D)))
        gc, gs = pw * c / D, pw * s / D
        grad = -np.array([gc.sum(), gs.sum()])
        hcc = np.sum(gc * c / D)
        hcs = np.sum(gc * s / D)
        hss = np.sum(gs * s / D)
        return val, grad, np.array([[hcc, hcs], [hcs, hss]])


@dataclass
class NewtonResult:
    u: float
    v: float
    grad_norm: float
    iterations: int
    converged: bool
    at_wall: bool

    @property
    def rho(self) -> float:
        return math.hypot(self.u, self.v)


def _newton(problem: _TraceProblem, start=(0.0, 0.0), max_iter: int = 200, gtol: float = 1e-13) -> NewtonResult:
    rho_max = 1.0 - WALL
    u, v = start
    val, grad, H = problem.derivatives(u, v)
    it = 0
    at_wall = False
    for it in range(1, max_iter + 1):
        gnorm = float(np.max(np.abs(grad)))
        if gnorm <= gtol:
            return NewtonResult(u, v, gnorm, it - 1, True, False)
        try:
            step = -np.linalg.solve(H, grad)
            if not np.all(np.isfinite(step)) or step @ grad >= 0:
                raise np.linalg.LinAlgError
        except np.linalg.LinAlgError:
            step = -grad
        # keep the trial inside the disc
        tau = 1.0
        uv = np.array([u, v])
        for _ in range(200):
            if np.hypot(*(uv + tau * step)) < rho_max:
                break
            tau *= 0.5
        slope = float(step @ grad)
        accepted = False
        for _ in range(60):
            un, vn = uv + tau * step
            vn_val = problem.value(un, vn)
            if vn_val <= val + 1e-4 * tau * slope or abs(vn_val - val) <= 1e-15 * max(1.0, abs(val)):
                accepted = True
                break
            tau *= 0.5
        if not accepted:
            break
        moved = math.hypot(un - u, vn - v)
        u, v = float(un), float(vn)
        val, grad, H = problem.derivatives(u, v)
        at_wall = math.hypot(u, v) >= rho_max * (1 - 1e-12) - 1e-15
        if moved <= 1e-16 and at_wall:
            break
    gnorm = float(np.max(np.abs(grad)))
    return NewtonResult(u, v, gnorm, it, gnorm <= gtol, at_wall)


def _shape_from_uv(u: float, v: float, level: float) -> EllipseShape:
    rho = math.hypot(u, v)
    major = math.sqrt(level * (1.0 + rho))
    minor = math.sqrt(level * max(1.0 - rho, 0.0))
    ang = 0.5 * math.atan2(v, u) if rho > 0 else 0.0
    # canonical angle in (-pi/4, pi/4], swapping the axes as needed
    if ang > math.pi / 4:
        phi, a1, a2 = ang - math.pi / 2, minor, major
    elif ang <= -math.pi / 4:
        phi, a1, a2 = ang + math.pi / 2, minor, major
    else:
        phi, a1, a2 = ang, major, minor
    if abs(a1 - a2) <= 1e-9 or phi == 0.0:
        phi = 0.0
    return EllipseShape(phi, a1, a2)


def _major_angle(u: float, v: float) -> float:
    return (0.5 * math.atan2(v, u)) % math.pi


# -- public solve ------------------------------------------------------------


@dataclass(frozen=True)
class SolverOptions:
    quad_nodes: int = DEFAULT_QUAD_NODES
    residual_tol: float = 1e-8
    eps_schedule: tuple[float, ...] = EPS_SCHEDULE
    segment_threshold: float = SEGMENT_THRESHOLD
    max_extra_halvings: int = 40
    max_iter: int = 200


@dataclass
class ContinuationStep:
    epsilon: float
    beta: float  # collapsing principal value on the trace-2 scale, in (0, 1]
    major_angle: float


@dataclass
class SolveReport:
    prediction: MinimizerPrediction
    classification: PsiClassification
    residual: float | None = None
    iterations: int = 0
    trace: list[ContinuationStep] = field(default_factory=list)
    extrapolated_beta: float | None = None


def _classify_kernel(kernel: KernelSpec) -> PsiClassification:
    cls = classify_psi(kernel.series)
    if kernel.epsilon == 0:
        return cls
    shifted = cls.min_value + kernel.epsilon
    if shifted > TOL_POS:
        label = "strictly-positive"
    elif shifted < -TOL_POS:
        label = "indefinite"
    else:
        label = "degenerate"
    return PsiClassification(shifted, cls.argmin_angle, label)


def _ellipse_from_newton(kernel, res: NewtonResult, opts: SolverOptions) -> tuple[EllipseShape, float]:
    shape = _shape_from_uv(res.u, res.v, kernel.log_strength)
    n = _nodes_for(res.rho, max(opts.quad_nodes, 4 * kernel.series.N + 64))
    residual = float(np.max(np.abs(system_residual(kernel, shape, n))))
    return shape, residual


def _extrapolate(trace: list[ContinuationStep]) -> float:
    """Quadratic extrapolation of beta(eps) to eps = 0 from the last three points."""
    pts = trace[-3:]
    eps = np.array([p.epsilon for p in pts])
    beta = np.array([p.beta for p in pts])
    coef = np.polyfit(eps, beta, len(pts) - 1)
    return float(np.polyval(coef, 0.0))


def solve_report(series, opts: SolverOptions | None = None) -> SolveReport:
    """Predict the minimiser for confinement |x|^2, with diagnostics."""
    opts = opts or SolverOptions()
    _check_nodes(opts.quad_nodes)
    kernel = as_kernel(series)
    cls = _classify_kernel(kernel)
    if cls.label == "indefinite":
        raise OutsideConvexityError(cls)

    if cls.label == "strictly-positive":
        problem = _TraceProblem(kernel, 0.0, opts.quad_nodes)
        res = _newton(problem, max_iter=opts.max_iter)
        shape, residual = _ellipse_from_newton(kernel, res, opts)
        if residual > opts.residual_tol or res.at_wall:
            raise SolverError("ellipse system did not converge", residual)
        return SolveReport(Ellipse(shape), cls, residual, res.iterations)

    # degenerate profile: continuation in the log strength
    trace: list[ContinuationStep] = []
    start = (0.0, 0.0)
    total_iter = 0

    def step(eps):
        nonlocal start, total_iter
        res = _newton(_TraceProblem(kernel, eps, opts.quad_nodes), start=start, max_iter=opts.max_iter)
        total_iter += res.iterations
        if not res.converged:
            raise SolverError(f"continuation solve failed at eps={eps}", res.grad_norm)
        start = (res.u, res.v)
        trace.append(ContinuationStep(eps, 1.0 - res.rho, _major_angle(res.u, res.v)))
        logger.debug("continuation eps=%g beta=%.6g", eps, 1.0 - res.rho)

    for eps in opts.eps_schedule:
        step(eps)

    def monotone():
        b = [s.beta for s in trace]
        return all(b1 < b0 for b0, b1 in zip(b, b[1:]))

    beta0 = _extrapolate(trace)
    collapsing = monotone() and (trace[-1].beta < opts.segment_threshold or beta0 < opts.segment_threshold)
    if collapsing:
        eps = trace[-1].epsilon
        extra = 0
        while trace[-1].beta >= opts.segment_threshold and extra < opts.max_extra_halvings:
            eps *= 0.5
            extra += 1
            step(eps)
        if monotone() and trace[-1].beta < opts.segment_threshold:
            direction = trace[-1].major_angle
            seg = Segment(direction, math.sqrt(2.0 * kernel.log_strength))
            return SolveReport(seg, cls, None, total_iter, trace, beta0)

    # the limit is a genuine ellipse: solve the degenerate system directly
    res = _newton(_TraceProblem(kernel, 0.0, opts.quad_nodes), start=start, max_iter=opts.max_iter)
    total_iter += res.iterations
    if res.converged and not res.at_wall:
        shape, residual = _ellipse_from_newton(kernel, res, opts)
        if residual <= opts.residual_tol:
            return SolveReport(Ellipse(shape), cls, residual, total_iter, trace, beta0)
    # fall back to the extrapolated continuation limit
    beta_lim = min(max(beta0, WALL), 1.0)
    ang = trace[-1].major_angle
    rho = 1.0 - beta_lim
    shape = _shape_from_uv(rho * math.cos(2 * ang), rho * math.sin(2 * ang), kernel.log_strength)
    residual = float(np.max(np.abs(system_residual(kernel, shape, _nodes_for(rho, opts.quad_nodes)))))
    logger.warning("degenerate system did not converge directly; returning extrapolated ellipse")
    return SolveReport(Ellipse(shape), cls, residual, total_iter, trace, beta0)


def solve(series, opts: SolverOptions | None = None) -> MinimizerPrediction:
    return solve_report(series, opts).prediction
