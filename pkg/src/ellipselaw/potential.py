"""Potentials of candidate minimisers and Euler-Lagrange residuals.

For the uniform law ``chi`` on an ellipse with shape matrix M, the gradient of
``W * chi`` is obtained by Fourier inversion:

    grad(W * chi)(x) = -(1/pi) \\oint psi_hat(y) / |D R^T y| * T(alpha(x, y)) y dH^1(y)

with ``alpha(x, y) = x.y / |D R^T y|`` and ``T`` the closed-form value of
``int_0^inf J1(r) sin(alpha r) / r dr`` (see :func:`tail_factor`). Inside the
ellipse ``|alpha| <= 1`` and the gradient is linear in x.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from ._quad import circle_rule, gauss_legendre, graded_rule
from .anisotropy import KernelSpec, as_kernel, eval_kappa
from .ellipse_solver import (
    DEFAULT_QUAD_NODES,
    Ellipse,
    EllipseShape,
    MinimizerPrediction,
    Segment,
    _nodes_for,
)

# -- Bessel J1 ---------------------------------------------------------------

_SERIES_CUTOFF = 12.0
_SERIES_TERMS = 60
_ASYMP_TERMS = 30


def _j1_series(r: np.ndarray) -> np.ndarray:
    h2 = (0.5 * r) ** 2
    term = 0.5 * r
    total = term.copy()
    for k in range(_SERIES_TERMS):
        term = -term * h2 / ((k + 1) * (k + 2))
        total += term
    return total


def _j1_asymptotic(r: np.ndarray) -> np.ndarray:
    # Hankel expansion, each series truncated at its smallest term
    mu = 4.0
    P = np.ones_like(r)
    Q = np.zeros_like(r)
    term = np.ones_like(r)
    best = np.full_like(r, np.inf)
    done = np.zeros(r.shape, dtype=bool)
    for k in range(1, 2 * _ASYMP_TERMS):
        term = term * ((mu - (2 * k - 1) ** 2) / (k * 8.0)) / r
        mag = np.abs(term)
        # stop at the smallest term, or once terms drop below double precision
        done |= (mag >= best) | (best < 1e-17)
        best = np.minimum(best, mag)
        sign = -1.0 if (k // 2) % 2 else 1.0
        contrib = np.where(done, 0.0, sign * term)
        if k % 2 == 0:
            P += contrib
        else:
            Q += contrib
        if np.all(done):
            break
    chi = r - 0.75 * math.pi
    return np.sqrt(2.0 / (math.pi * r)) * (P * np.cos(chi) - Q * np.sin(chi))


def bessel_j1(r):
    """Bessel function of the first kind of order one, for r >= 0."""
    r = np.asarray(r, dtype=float)
    if np.any(~np.isfinite(r)):
        raise ValueError("bessel_j1 requires finite arguments")
    x = np.abs(r)
    out = np.empty_like(x)
    small = x < _SERIES_CUTOFF
    out[small] = _j1_series(x[small])
    out[~small] = _j1_asymptotic(x[~small])
    return (np.sign(r) * out)[()] if np.any(r < 0) else out[()]


def tail_factor(alpha_val):
    """int_0^inf J1(r) sin(alpha r) / r dr for alpha >= 0."""
    a = np.asarray(alpha_val, dtype=float)
    if np.any(a < 0):
        raise ValueError("tail_factor requires alpha >= 0")
    big = a > 1.0
    safe = np.where(big, a, 2.0)
    out = np.where(big, 1.0 / (safe + np.sqrt(safe * safe - 1.0)), a)
    return out[()]


def tail_integral_numeric(alpha_val: float, upper: float = 1e4, panel: float = 1.0, nodes: int = 16) -> float:
    """int_0^upper J1(r) sin(alpha r) / r dr by composite Gauss-Legendre.

    A brute-force check on :func:`tail_factor`; the truncated tail is O(upper^{-3/2}).
    """
    k = max(1, math.ceil(upper / panel))
    s, w = gauss_legendre(nodes)
    h = upper / k
    r = (h * np.arange(k)[:, None] + h * s[None, :]).ravel()
    wt = np.tile(h * w, k)
    return float(wt @ (bessel_j1(r) * np.sin(alpha_val * r) / r))


def _signed_tail(alpha: np.ndarray) -> np.ndarray:
    return np.sign(alpha) * tail_factor(np.abs(alpha))


# -- ellipse interiors -------------------------------------------------------


def _base_nodes(kernel: KernelSpec, shape: EllipseShape, quad_nodes: int) -> int:
    lo, hi = sorted((shape.a1**2, shape.a2**2))
    rho = (hi - lo) / (hi + lo)
    return _nodes_for(rho, max(quad_nodes, 4 * kernel.series.N + 64))


def interior_matrix(series, shape: EllipseShape, quad_nodes: int = DEFAULT_QUAD_NODES) -> np.ndarray:
    """G with grad(W * chi)(x) = -G x for x inside the ellipse."""
    kernel = as_kernel(series)
    shape.require_nondegenerate()
    t, w = circle_rule(_base_nodes(kernel, shape, quad_nodes))
    y = np.stack([np.cos(t), np.sin(t)], axis=1)
    q = np.einsum("ni,ij,nj->n", y, shape.matrix, y)
    wt = kernel.psi_hat(t) / q * (w / math.pi)
    G = np.einsum("n,ni,nj->ij", wt, y, y)
    return 0.5 * (G + G.T)


def _level_roots(X: np.ndarray, M: np.ndarray) -> np.ndarray:
    """For each exterior x, the four angles in [0, 2 pi) where (x.y)^2 = M y.y."""
    A11 = X[:, 0] ** 2 - M[0, 0]
    A22 = X[:, 1] ** 2 - M[1, 1]
    A12 = X[:, 0] * X[:, 1] - M[0, 1]
    C = 0.5 * (A11 + A22)
    a = 0.5 * (A11 - A22)
    K = np.hypot(a, A12)
    # x outside E makes the form indefinite, so |C| < K
    delta = np.arctan2(A12, a)
    acs = np.arccos(np.clip(-C / K, -1.0, 1.0))
    r1 = 0.5 * (delta + acs)
    r2 = 0.5 * (delta - acs)
    roots = np.stack([r1, r1 + math.pi, r2, r2 + math.pi], axis=1)
    return np.sort(np.mod(roots, 2 * math.pi), axis=1)


def _arc_rule(X: np.ndarray, M: np.ndarray, n_arc: int):
    """Angles and weights splitting the circle at the level roots of each x.

    The tail factor has square-root kinks at the roots; a cosine map on each
    arc clusters nodes there and restores spectral convergence.
    """
    roots = _level_roots(X, M)
    lo = roots
    hi = np.concatenate([roots[:, 1:], roots[:, :1] + 2 * math.pi], axis=1)
    L = (hi - lo)[..., None]
    s, ws = gauss_legendre(n_arc)
    u = math.pi * s
    theta = lo[..., None] + 0.5 * L * (1.0 - np.cos(u))
    w = 0.5 * L * np.sin(u) * math.pi * ws
    m = X.shape[0]
    return theta.reshape(m, -1), w.reshape(m, -1)


def _arc_nodes(n_base: int) -> int:
    return n_base // 4 + 64


def _exterior_grads(kernel: KernelSpec, M: np.ndarray, X: np.ndarray, n_base: int, chunk: int = 128) -> np.ndarray:
    out = np.empty_like(X)
    for i in range(0, X.shape[0], chunk):
        Xc = X[i : i + chunk]
        theta, w = _arc_rule(Xc, M, _arc_nodes(n_base))
        c, s_ = np.cos(theta), np.sin(theta)
        q = M[0, 0] * c * c + 2 * M[0, 1] * c * s_ + M[1, 1] * s_ * s_
        sq = np.sqrt(q)
        alpha = (Xc[:, :1] * c + Xc[:, 1:] * s_) / sq
        f = w * kernel.psi_hat(theta) / sq * _signed_tail(alpha)
        out[i : i + chunk, 0] = -(f * c).sum(axis=1) / math.pi
        out[i : i + chunk, 1] = -(f * s_).sum(axis=1) / math.pi
    return out


def _is_inside(X: np.ndarray, M: np.ndarray) -> np.ndarray:
    return np.einsum("ni,ij,nj->n", X, np.linalg.inv(M), X) <= 1.0


def grad_potential(series, shape: EllipseShape, x, quad_nodes: int = DEFAULT_QUAD_NODES) -> np.ndarray:
    """Gradient of W * (chi_E / |E|) at ``x`` (a point, or an (m, 2) array of points)."""
    kernel = as_kernel(series)
    shape.require_nondegenerate()
    x = np.asarray(x, dtype=float)
    X = np.atleast_2d(x)
    M = shape.matrix
    inside = _is_inside(X, M)
    out = np.empty_like(X)
    if inside.any():
        out[inside] = -X[inside] @ interior_matrix(kernel, shape, quad_nodes).T
    if (~inside).any():
        out[~inside] = _exterior_grads(kernel, M, X[~inside], _base_nodes(kernel, shape, quad_nodes))
    return out.reshape(x.shape)


def radial_residual(series, shape: EllipseShape, x, quad_nodes: int = DEFAULT_QUAD_NODES):
    """grad(W * chi)(x) . x + |x|^2; non-negative off the support of a minimiser.

    Accepts a point or an (m, 2) array of points.
    """
    x = np.asarray(x, dtype=float)
    g = grad_potential(series, shape, x, quad_nodes)
    r = np.sum(g * x, axis=-1) + np.sum(x * x, axis=-1)
    return r[()] if np.ndim(r) else float(r)


def radial_residual_tail_form(series, shape: EllipseShape, x, quad_nodes: int = 4096) -> float:
    """(1/pi) \\oint psi_hat |alpha| sqrt(alpha^2 - 1) 1{|alpha| > 1} dH^1.

    Equals :func:`radial_residual` when the ellipse solves the first
    Euler-Lagrange equation.
    """
    kernel = as_kernel(series)
    x = np.asarray(x, dtype=float)
    M = shape.matrix
    if _is_inside(x[None, :], M)[0]:
        return 0.0
    theta, w = _arc_rule(x[None, :], M, _arc_nodes(quad_nodes))
    theta, w = theta[0], w[0]
    y = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    alpha = (y @ x) / np.sqrt(np.einsum("ni,ij,nj->n", y, M, y))
    f = kernel.psi_hat(theta) * np.abs(alpha) * np.sqrt(np.clip(alpha**2 - 1.0, 0.0, None))
    return float(w @ f) / math.pi


def _radial_extent(M: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Distance from the centre to the ellipse boundary along ``theta``."""
    y = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    Minv = np.linalg.inv(M)
    return 1.0 / np.sqrt(np.einsum("ni,ij,nj->n", y, Minv, y))


def _disk_radial_primitive(R: np.ndarray, L: float) -> np.ndarray:
    # int_0^R -L log(r) r dr
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -L * (0.5 * R**2 * np.log(R) - 0.25 * R**2)
    return np.where(R > 0, out, 0.0)


def potential_at_center(series, shape: EllipseShape, quad_nodes: int = DEFAULT_QUAD_NODES) -> float:
    """(W * chi)(0) by polar integration about the centre."""
    return float(direct_ellipse_potential(series, shape, np.zeros(2), quad_nodes))


def direct_ellipse_potential(series, shape: EllipseShape, x, quad_nodes: int = DEFAULT_QUAD_NODES) -> float:
    """(W * chi)(x) for x inside the ellipse, by polar integration about x.

    The radial integral is done in closed form, leaving a periodic integral in
    the ray angle. Independent of the Fourier route.
    """
    kernel = as_kernel(series)
    shape.require_nondegenerate()
    x = np.asarray(x, dtype=float)
    M = shape.matrix
    Minv = np.linalg.inv(M)
    if x @ Minv @ x >= 1.0:
        raise ValueError("direct_ellipse_potential needs a point inside the ellipse")
    t, w = circle_rule(_base_nodes(kernel, shape, quad_nodes))
    e = np.stack([np.cos(t), np.sin(t)], axis=1)
    # ray x + R e hits the boundary: (x + R e)^T Minv (x + R e) = 1
    qa = np.einsum("ni,ij,nj->n", e, Minv, e)
    qb = e @ (Minv @ x)
    qc = x @ Minv @ x - 1.0
    R = (-qb + np.sqrt(qb * qb - qa * qc)) / qa
    integrand = _disk_radial_primitive(R, kernel.log_strength) + kernel.kappa(t) * 0.5 * R**2
    return float(w * integrand.sum() / shape.area)


def continuum_energy(series, shape: EllipseShape, quad_nodes: int = DEFAULT_QUAD_NODES) -> float:
    """I(chi) = \\iint W d chi d chi + \\int |x|^2 d chi for the uniform ellipse law."""
    kernel = as_kernel(series)
    G = interior_matrix(kernel, shape, quad_nodes)
    sigma = shape.matrix / 4.0
    return potential_at_center(kernel, shape, quad_nodes) - 0.5 * float(np.trace(G @ sigma)) + float(np.trace(sigma))


def disk_coulomb_potential(x, r: float) -> float:
    """Coulomb potential of the uniform probability on the disk of radius r."""
    if r <= 0:
        raise ValueError("radius must be positive")
    d = float(np.hypot(*np.asarray(x, dtype=float)))
    if d <= r:
        return 0.5 - 0.5 * d * d / (r * r) - math.log(r)
    return -math.log(d)


# -- boundary measure ---------------------------------------------------------


def boundary_distance_estimate(shape: EllipseShape, x) -> float:
    x = np.asarray(x, dtype=float)
    Minv = np.linalg.inv(shape.matrix)
    f = x @ Minv @ x - 1.0
    g = 2.0 * np.linalg.norm(Minv @ x)
    return math.inf if g == 0 else abs(f) / g


def boundary_potential(series, shape: EllipseShape, x, quad_nodes: int = 1024) -> float:
    """(W * mu)(x) for the equilibrium measure on the boundary of the ellipse.

    In the parametrisation y = R (a1 cos t, a2 sin t) that measure is dt / 2 pi.
    """
    if quad_nodes < 256:
        raise ValueError(f"quad_nodes must be >= 256, got {quad_nodes}")
    kernel = as_kernel(series)
    shape.require_nondegenerate()
    x = np.asarray(x, dtype=float)
    if boundary_distance_estimate(shape, x) < 1e-6:
        raise ValueError("point lies within 1e-6 of the ellipse boundary")
    t, w = circle_rule(quad_nodes)
    y = np.stack([shape.a1 * np.cos(t), shape.a2 * np.sin(t)], axis=1) @ shape.rotation.T
    z = x - y
    r = np.hypot(z[:, 0], z[:, 1])
    ang = np.arctan2(z[:, 1], z[:, 0])
    W = -kernel.log_strength * np.log(r) + kernel.kappa(ang)
    return float(w * W.sum() / (2 * math.pi))


# -- segments ------------------------------------------------------------------


def _segment_nodes(s_split: float, R: float, quad_nodes: int):
    """Nodes in u (t = R sin u) split and graded at u0 = arcsin(s/R)."""
    u0 = math.asin(max(-1.0, min(1.0, s_split / R)))
    n = max(quad_nodes // 2, 32)
    us, ws = [], []
    if u0 > -math.pi / 2:
        u, w = graded_rule(u0, -math.pi / 2, n)
        us.append(u)
        ws.append(-w)
    if u0 < math.pi / 2:
        u, w = graded_rule(u0, math.pi / 2, n)
        us.append(u)
        ws.append(w)
    return np.concatenate(us), np.concatenate(ws)


def segment_potential(series, direction: float, s: float, quad_nodes: int = DEFAULT_QUAD_NODES,
                      half_length: float = math.sqrt(2.0)) -> float:
    """(W * mu)(s e) for the semicircle law on the line at angle ``direction``."""
    if quad_nodes < 256:
        raise ValueError(f"quad_nodes must be >= 256, got {quad_nodes}")
    kernel = as_kernel(series)
    R = half_length
    u, w = _segment_nodes(s, R, quad_nodes)
    t = R * np.sin(u)
    weight = (2.0 / math.pi) * np.cos(u) ** 2 * w
    with np.errstate(divide="ignore"):
        logs = np.log(np.abs(s - t))
    logs = np.where(np.isfinite(logs), logs, 0.0)
    return float(-kernel.log_strength * (weight @ logs) + eval_kappa(kernel.series, direction))


def segment_potential_at(series, segment: Segment, x, quad_nodes: int = DEFAULT_QUAD_NODES) -> float:
    """(W * mu)(x) at an arbitrary planar point x."""
    kernel = as_kernel(series)
    x = np.asarray(x, dtype=float)
    e = segment.direction
    R = segment.half_length
    u, w = _segment_nodes(float(x @ e), R, quad_nodes)
    t = R * np.sin(u)
    weight = (2.0 / math.pi) * np.cos(u) ** 2 * w
    z = x[None, :] - t[:, None] * e[None, :]
    r = np.hypot(z[:, 0], z[:, 1])
    with np.errstate(divide="ignore"):
        logs = np.log(r)
    ok = r > 0
    ang = np.arctan2(z[:, 1], z[:, 0])
    vals = np.where(ok, -kernel.log_strength * np.where(ok, logs, 0.0) + kernel.kappa(ang), 0.0)
    return float(weight @ vals)


# -- Euler-Lagrange scan ---------------------------------------------------------


@dataclass
class ELReport:
    interior_max_grad_residual: float
    exterior_min_radial_residual: float
    constant_c: float

    def to_json(self) -> dict:
        return asdict(self)

    def within(self, tol: float) -> bool:
        return self.interior_max_grad_residual <= tol and self.exterior_min_radial_residual >= -tol


def ellipse_probes(shape: EllipseShape, radii, n_angles: int) -> np.ndarray:
    t = 2 * math.pi * np.arange(n_angles) / n_angles
    r = np.asarray(radii, dtype=float)
    local = np.stack(
        [np.outer(r, np.cos(t)).ravel() * shape.a1, np.outer(r, np.sin(t)).ravel() * shape.a2], axis=1
    )
    return local @ shape.rotation.T


def el_scan(series, prediction: MinimizerPrediction, n_radii: int = 32, n_angles: int = 64,
            n_segment: int = 64, quad_nodes: int = DEFAULT_QUAD_NODES) -> ELReport:
    """Euler-Lagrange residuals of ``prediction`` for confinement |x|^2.

    Ellipse: the interior residual is max |grad(W*chi)(x) + x| over a polar grid
    filling 0.95 E; the exterior residual is min grad(W*chi)(x).x + |x|^2 over
    the elliptical annulus 1.05 E .. 3 E.

    Segment: the interior residual is the spread of U(s) + s^2/2 over 64 points
    of the support; the exterior residual is min of (W*mu)(x) + |x|^2/2 - c over
    points off the support, including points close to the line.
    """
    kernel = as_kernel(series)
    if isinstance(prediction, Ellipse):
        shape = prediction.shape
        inner = ellipse_probes(shape, 0.95 * np.arange(1, n_radii + 1) / n_radii, n_angles)
        G = interior_matrix(kernel, shape, quad_nodes)
        grads = -inner @ G.T
        interior = float(np.max(np.linalg.norm(grads + inner, axis=1)))
        outer = ellipse_probes(shape, np.linspace(1.05, 3.0, n_radii), n_angles)
        radial = radial_residual(kernel, shape, outer, quad_nodes)
        c0 = potential_at_center(kernel, shape, quad_nodes)
        levels = c0 - 0.5 * np.einsum("ni,ij,nj->n", inner, G, inner) + 0.5 * np.einsum("ni,ni->n", inner, inner)
        return ELReport(interior, float(np.min(radial)), float(np.mean(levels)))

    if isinstance(prediction, Segment):
        R = prediction.half_length
        e = prediction.direction
        nrm = np.array([-e[1], e[0]])
        nodes = max(quad_nodes, 512)
        s_on = np.linspace(-0.95 * R, 0.95 * R, n_segment)
        on = np.array([segment_potential(kernel, prediction.direction_angle, s, nodes, R) + 0.5 * s * s for s in s_on])
        c = float(np.mean(on))
        s_off = np.linspace(-0.95 * R, 0.95 * R, 16)
        pts = [s * e + h * nrm for s in s_off for h in (-1.0, -0.25, -0.05, 0.05, 0.25, 1.0)]
        pts += [s * e for s in np.concatenate([np.linspace(-3 * R, -1.05 * R, 8), np.linspace(1.05 * R, 3 * R, 8)])]
        t = 2 * math.pi * np.arange(n_angles) / n_angles
        for r in np.linspace(1.05 * R, 3 * R, 4):
            pts += list(np.stack([r * np.cos(t), r * np.sin(t)], axis=1))
        ext = [segment_potential_at(kernel, prediction, x, nodes) + 0.5 * float(x @ x) - c for x in pts]
        return ELReport(float(np.max(on) - np.min(on)), float(np.min(ext)), c)

    raise TypeError(f"unsupported prediction {type(prediction).__name__}")
