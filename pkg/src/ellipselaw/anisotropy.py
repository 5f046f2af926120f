"""Angular part of the interaction kernel.

The anisotropy ``kappa`` is an even, 0-homogeneous function, stored as the
truncated Fourier series

    kappa(theta) = sum_n a_{2n} cos(2 n theta) + b_{2n} sin(2 n theta)

with the constant term dropped. The Fourier transform of the full kernel
``-L log|x| + kappa(x)`` away from the origin is ``psi_hat(xi/|xi|) / |xi|^2``
where

    psi_hat(theta) = L + sum_n (-1)^n 2n (a_{2n} cos(2 n theta) + b_{2n} sin(2 n theta)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

TOL_POS = 1e-10

PsiLabel = Literal["strictly-positive", "degenerate", "indefinite"]


@dataclass(frozen=True)
class AnisotropySeries:
    cos_coeffs: tuple[float, ...] = ()
    sin_coeffs: tuple[float, ...] = ()

    def __post_init__(self):
        a = tuple(float(c) for c in self.cos_coeffs)
        b = tuple(float(c) for c in self.sin_coeffs)
        if len(a) != len(b):
            raise ValueError(
                f"cos_coeffs and sin_coeffs must have equal length, got {len(a)} and {len(b)}"
            )
        if not all(math.isfinite(c) for c in a + b):
            raise ValueError("anisotropy coefficients must be finite")
        object.__setattr__(self, "cos_coeffs", a)
        object.__setattr__(self, "sin_coeffs", b)

    @property
    def N(self) -> int:
        return len(self.cos_coeffs)

    @property
    def a(self) -> np.ndarray:
        return np.asarray(self.cos_coeffs, dtype=float)

    @property
    def b(self) -> np.ndarray:
        return np.asarray(self.sin_coeffs, dtype=float)

    @classmethod
    def from_harmonics(cls, cos=None, sin=None) -> "AnisotropySeries":
        """Build from ``{n: coeff}`` maps keyed by the harmonic index n (angle 2n)."""
        cos = dict(cos or {})
        sin = dict(sin or {})
        n_max = max([0, *cos, *sin])
        a = [float(cos.get(n, 0.0)) for n in range(1, n_max + 1)]
        b = [float(sin.get(n, 0.0)) for n in range(1, n_max + 1)]
        return cls(tuple(a), tuple(b))

    def padded(self, N: int) -> tuple[np.ndarray, np.ndarray]:
        if N < self.N:
            raise ValueError(f"cannot pad a series of order {self.N} down to {N}")
        a = np.zeros(N)
        b = np.zeros(N)
        a[: self.N] = self.a
        b[: self.N] = self.b
        return a, b

    def rotated(self, psi: float) -> "AnisotropySeries":
        """Series of ``theta -> kappa(theta - psi)``."""
        if self.N == 0:
            return self
        n2 = 2.0 * np.arange(1, self.N + 1)
        c, s = np.cos(n2 * psi), np.sin(n2 * psi)
        a, b = self.a, self.b
        return AnisotropySeries(tuple(a * c - b * s), tuple(a * s + b * c))


@dataclass(frozen=True)
class PsiClassification:
    min_value: float
    argmin_angle: float
    label: PsiLabel


@dataclass(frozen=True)
class KernelSpec:
    """Kernel ``-log_strength * log|x| + kappa(x)``."""

    log_strength: float = 1.0
    series: AnisotropySeries = field(default_factory=AnisotropySeries)

    def __post_init__(self):
        if not math.isfinite(self.log_strength) or self.log_strength < 1.0:
            raise ValueError(f"log_strength must be finite and >= 1, got {self.log_strength}")

    @property
    def epsilon(self) -> float:
        return self.log_strength - 1.0

    def kappa(self, theta):
        return eval_kappa(self.series, theta)

    def psi_hat(self, theta):
        return eval_psi_hat(self.series, theta) + self.epsilon


def as_kernel(obj) -> KernelSpec:
    if isinstance(obj, KernelSpec):
        return obj
    if isinstance(obj, AnisotropySeries):
        return KernelSpec(1.0, obj)
    raise TypeError(f"expected KernelSpec or AnisotropySeries, got {type(obj).__name__}")


def _harmonics(series: AnisotropySeries, theta):
    theta = np.asarray(theta, dtype=float)
    n2 = 2.0 * np.arange(1, series.N + 1)
    phase = theta[..., None] * n2
    return theta, n2, np.cos(phase), np.sin(phase)


def eval_kappa(series: AnisotropySeries, theta):
    """Value of the anisotropy at angle ``theta`` (scalar or array)."""
    if series.N == 0:
        return np.zeros_like(np.asarray(theta, dtype=float))[()]
    _, _, c, s = _harmonics(series, theta)
    return (c @ series.a + s @ series.b)[()]


def eval_kappa_angular_derivative(series: AnisotropySeries, theta):
    if series.N == 0:
        return np.zeros_like(np.asarray(theta, dtype=float))[()]
    _, n2, c, s = _harmonics(series, theta)
    return (c @ (n2 * series.b) - s @ (n2 * series.a))[()]


def psi_weights(series: AnisotropySeries) -> np.ndarray:
    """Factors (-1)^n 2n mapping kappa harmonics to psi_hat harmonics."""
    n = np.arange(1, series.N + 1)
    return np.where(n % 2 == 0, 1.0, -1.0) * 2.0 * n


def eval_psi_hat(series: AnisotropySeries, theta):
    """Angular profile of the kernel's Fourier transform (base kernel, log_strength 1)."""
    if series.N == 0:
        return np.ones_like(np.asarray(theta, dtype=float))[()]
    _, _, c, s = _harmonics(series, theta)
    w = psi_weights(series)
    return (1.0 + c @ (w * series.a) + s @ (w * series.b))[()]


def classify_psi(series: AnisotropySeries, grid_size: int | None = None) -> PsiClassification:
    """Locate the minimum of psi_hat on the circle and label its sign."""
    min_grid = 4 * series.N + 16
    if grid_size is None:
        grid_size = max(min_grid, 4096)
    if grid_size < min_grid:
        raise ValueError(f"grid_size must be >= 4N+16 = {min_grid}, got {grid_size}")
    # psi_hat is pi-periodic
    h = math.pi / grid_size
    theta = h * np.arange(grid_size)
    vals = np.asarray(eval_psi_hat(series, theta))
    i = int(np.argmin(vals))
    fm, f0, fp = vals[i - 1], vals[i], vals[(i + 1) % grid_size]
    curv = fm - 2.0 * f0 + fp
    best_theta, best = theta[i], f0
    if curv > 0:
        offset = 0.5 * h * (fm - fp) / curv
        t_ref = theta[i] + offset
        v_ref = float(eval_psi_hat(series, t_ref))
        if v_ref < best:
            best_theta, best = t_ref, v_ref
    best_theta = float(best_theta % math.pi)
    if best > TOL_POS:
        label = "strictly-positive"
    elif best < -TOL_POS:
        label = "indefinite"
    else:
        label = "degenerate"
    return PsiClassification(float(best), best_theta, label)


def series_from_samples(values, trim_tol: float = 1e-15) -> AnisotropySeries:
    """Even-harmonic series of samples taken at ``2 pi j / m``, j = 0..m-1.

    The mean is discarded and N = m/4 harmonics are kept; trailing harmonics
    below ``trim_tol`` (relative to the sample scale) are dropped.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 1:
        raise ValueError("samples must be a one-dimensional sequence")
    m = v.size
    if m % 2 != 0:
        raise ValueError(f"sample count m must be even, got m={m}")
    if m < 8:
        raise ValueError(f"sample count m must be >= 8, got m={m}")
    if not np.all(np.isfinite(v)):
        raise ValueError("samples must be finite")
    scale = max(1.0, float(np.max(np.abs(v))))
    asym = float(np.max(np.abs(v - np.roll(v, m // 2))))
    if asym > 1e-10 * scale:
        raise ValueError(
            f"samples must be even on the circle (value(theta+pi) == value(theta)); "
            f"max asymmetry {asym:.3e}"
        )
    c = np.fft.rfft(v) / m
    N = m // 4
    k = 2 * np.arange(1, N + 1)
    a = 2.0 * c[k].real
    b = -2.0 * c[k].imag
    if k[-1] == m // 2:
        # Nyquist harmonic: only the cosine part is observable
        a[-1] = c[m // 2].real
        b[-1] = 0.0
    keep = np.nonzero((np.abs(a) > trim_tol * scale) | (np.abs(b) > trim_tol * scale))[0]
    n_keep = int(keep[-1]) + 1 if keep.size else 0
    return AnisotropySeries(tuple(a[:n_keep]), tuple(b[:n_keep]))


def elastic_kappa(theta, a: float, b: float):
    """Edge-dislocation anisotropy of a cubic crystal with constants ``b > a > 0``."""
    theta = np.asarray(theta, dtype=float)
    c2, s2 = np.cos(theta) ** 2, np.sin(theta) ** 2
    p = (a + b) / a
    q = (b - a) / a
    return -0.25 * p * np.log(c2 + (a + b) ** 2 * s2) + 0.25 * q * np.log(c2 + (b - a) ** 2 * s2)


def make_preset(name: str, **params) -> KernelSpec:
    """Named kernels: ``coulomb``, ``dislocation`` (alpha), ``elastic`` (a, b)."""
    log_strength = float(params.pop("log_strength", 1.0))
    if name == "coulomb":
        if params:
            raise ValueError(f"coulomb preset takes no parameters, got {sorted(params)}")
        series = AnisotropySeries()
    elif name == "dislocation":
        alpha = float(params.pop("alpha"))
        if params:
            raise ValueError(f"unexpected dislocation parameters {sorted(params)}")
        series = AnisotropySeries((alpha / 2.0,), (0.0,))
    elif name == "elastic":
        a = float(params.pop("a"))
        b = float(params.pop("b"))
        if params:
            raise ValueError(f"unexpected elastic parameters {sorted(params)}")
        if not (a > 0 and b > a):
            raise ValueError(f"elastic preset requires b > a > 0, got a={a}, b={b}")
        m = 512
        theta = 2.0 * math.pi * np.arange(m) / m
        series = series_from_samples(elastic_kappa(theta, a, b))
    else:
        raise ValueError(f"unknown preset {name!r}")
    return KernelSpec(log_strength, series)
