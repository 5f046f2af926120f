from __future__ import annotations

import math
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def circle_rule(n: int) -> tuple[np.ndarray, float]:
    """Trapezoid nodes on [0, 2 pi) and the common weight."""
    theta = 2.0 * math.pi * np.arange(n) / n
    theta.setflags(write=False)
    return theta, 2.0 * math.pi / n


@lru_cache(maxsize=64)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def graded_rule(a: float, b: float, n: int, power: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """Nodes on [a, b] clustered algebraically towards ``a``.

    Integrands with an integrable log or power singularity at ``a`` become
    smooth enough for Gauss-Legendre after the substitution t = a + (b-a) s^power.
    """
    s, w = gauss_legendre(n)
    L = b - a
    t = a + L * s**power
    wt = w * L * power * s ** (power - 1)
    return t, wt


def pow2_at_least(n: float) -> int:
    return 1 << max(0, math.ceil(math.log2(max(n, 1.0))))
