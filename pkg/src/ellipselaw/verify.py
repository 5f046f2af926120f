"""Fourier-side cross-checks of the interaction energy.

For a signed measure nu of zero mass,

    \\int (W * nu) d nu = 2 pi \\int psi_hat(xi / |xi|) / |xi|^2 |nu_hat(xi)|^2 d xi,

with nu_hat(xi) = (1/2 pi) \\int e^{-i xi.x} d nu. Both sides are evaluated
for nu a difference of two Gaussian blobs, each by its own quadrature.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from ._quad import circle_rule, gauss_legendre, graded_rule
from .anisotropy import TOL_POS, as_kernel, classify_psi

_CUTOFF = 12.0


@dataclass(frozen=True)
class GaussianBlobPair:
    """nu = g_sigma(. - p) - g_sigma(. - q) with g_sigma the isotropic Gaussian."""

    p: tuple[float, float] = (1.0, 0.0)
    q: tuple[float, float] = (-1.0, 0.0)
    sigma: float = 0.5

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        object.__setattr__(self, "p", tuple(float(v) for v in self.p))
        object.__setattr__(self, "q", tuple(float(v) for v in self.q))

    @property
    def offset(self) -> np.ndarray:
        return np.subtract(self.p, self.q)


@dataclass(frozen=True)
class QuadOptions:
    n_theta: int = 256
    panel_nodes: int = 16
    panels_per_sigma: int = 4

    def refined(self) -> "QuadOptions":
        return QuadOptions(2 * self.n_theta, self.panel_nodes, 2 * self.panels_per_sigma)


@dataclass
class ParsevalReport:
    lhs: float
    rhs: float
    rel_gap: float

    def to_json(self) -> dict:
        return asdict(self)


def _panel_rule(a: float, b: float, width: float, m: int):
    k = max(1, math.ceil((b - a) / width))
    s, w = gauss_legendre(m)
    h = (b - a) / k
    x = (a + h * np.arange(k)[:, None] + h * s[None, :]).ravel()
    wt = np.tile(h * w, k)
    return x, wt


def _radial_rule(rmax: float, sigma: float, quad: QuadOptions):
    # graded first panel absorbs r log r at the origin
    width = sigma / quad.panels_per_sigma
    h0 = min(width, rmax)
    r0, w0 = graded_rule(0.0, h0, quad.panel_nodes)
    if rmax <= h0:
        return r0, w0
    r1, w1 = _panel_rule(h0, rmax, width, quad.panel_nodes)
    return np.concatenate([r0, r1]), np.concatenate([w0, w1])


def smoothed_kernel(series, c, sigma: float, quad: QuadOptions | None = None) -> float:
    """K(c) = \\int W(z) G(z - c) dz, G the Gaussian of variance 2 sigma^2 per axis.

    Polar quadrature about the log singularity at the origin.
    """
    kernel = as_kernel(series)
    quad = quad or QuadOptions()
    c = np.asarray(c, dtype=float)
    var = 2.0 * sigma**2
    rmax = _CUTOFF * sigma + float(np.hypot(*c))
    r, wr = _radial_rule(rmax, sigma, quad)
    t, wt = circle_rule(quad.n_theta)
    ct, st = np.cos(t), np.sin(t)
    zx = r[:, None] * ct[None, :] - c[0]
    zy = r[:, None] * st[None, :] - c[1]
    g = np.exp(-(zx**2 + zy**2) / (2.0 * var)) / (2.0 * math.pi * var)
    W = -kernel.log_strength * np.log(r)[:, None] + np.asarray(kernel.kappa(t))[None, :]
    return float(wt * (wr * r) @ (W * g).sum(axis=1))


def _fourier_side(series, d: np.ndarray, sigma: float, quad: QuadOptions) -> float:
    kernel = as_kernel(series)
    rmax = _CUTOFF / sigma
    dn = float(np.hypot(*d))
    # panels resolve both the Gaussian scale 1/sigma and the oscillation |d|
    width = min(1.0 / sigma, 2.0 / max(dn, 1e-300)) / quad.panels_per_sigma
    rho, wr = _panel_rule(0.0, rmax, width, quad.panel_nodes)
    t, wt = circle_rule(quad.n_theta)
    proj = d[0] * np.cos(t) + d[1] * np.sin(t)
    F = (np.exp(-(sigma * rho) ** 2) / rho * wr) @ (1.0 - np.cos(rho[:, None] * proj[None, :]))
    return float(wt * (kernel.psi_hat(t) @ F) / math.pi)


def parseval_gap(series, blobs: GaussianBlobPair | None = None, quad: QuadOptions | None = None):
    """(lhs, rhs): the energy of nu in physical space and on the Fourier side."""
    blobs = blobs or GaussianBlobPair()
    quad = quad or QuadOptions()
    d = blobs.offset
    if not np.any(d):
        return 0.0, 0.0
    s = blobs.sigma
    # autocorrelation of nu is 2 G(z) - G(z - d) - G(z + d)
    lhs = 2.0 * smoothed_kernel(series, (0.0, 0.0), s, quad) - smoothed_kernel(series, d, s, quad) - smoothed_kernel(
        series, -d, s, quad
    )
    rhs = _fourier_side(series, d, s, quad)
    return lhs, rhs


def parseval_report(series, blobs: GaussianBlobPair | None = None, quad: QuadOptions | None = None) -> ParsevalReport:
    lhs, rhs = parseval_gap(series, blobs, quad)
    if rhs == 0.0:
        gap = 0.0 if lhs == 0.0 else math.inf
    else:
        gap = abs(lhs - rhs) / abs(rhs)
    return ParsevalReport(lhs, rhs, gap)


@dataclass
class ConvexityProbe:
    t: tuple[float, ...]
    energies: tuple[float, ...]
    midpoint_gap: float  # chord midpoint minus E(1/2); positive for strict convexity
    claimed: bool  # False when psi_hat is indefinite


def _cross_energy(kernel, A: np.ndarray, B: np.ndarray, sigma: float, quad: QuadOptions) -> float:
    total = 0.0
    cache: dict[tuple[float, float], float] = {}
    for x in A:
        for y in B:
            c = x - y
            key = (float(c[0]), float(c[1]))
            # W is even, so K(c) = K(-c)
            alt = (-key[0] + 0.0, -key[1] + 0.0)
            if key in cache:
                v = cache[key]
            elif alt in cache:
                v = cache[alt]
            else:
                v = cache[key] = smoothed_kernel(kernel, c, sigma, quad)
            total += v
    return total / (len(A) * len(B))


def convexity_probe(series, cfgA, cfgB, sigma: float = 0.3, quad: QuadOptions | None = None) -> ConvexityProbe:
    """Interaction energy along mu_t = (1 - t) mu_A + t mu_B for Gaussian-smoothed clouds."""
    from .particles import _positions

    kernel = as_kernel(series)
    quad = quad or QuadOptions()
    A = np.asarray(_positions(cfgA), dtype=float)
    B = np.asarray(_positions(cfgB), dtype=float)
    eAA = _cross_energy(kernel, A, A, sigma, quad)
    eBB = _cross_energy(kernel, B, B, sigma, quad)
    eAB = _cross_energy(kernel, A, B, sigma, quad)
    ts = (0.0, 0.25, 0.5, 0.75, 1.0)
    Es = tuple((1 - t) ** 2 * eAA + 2 * t * (1 - t) * eAB + t * t * eBB for t in ts)
    gap = 0.25 * (eAA - 2.0 * eAB + eBB)
    claimed = classify_psi(kernel.series).min_value + kernel.epsilon >= -TOL_POS
    return ConvexityProbe(ts, Es, gap, claimed)
