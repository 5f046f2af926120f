"""Pairwise interaction kernels, O(n^2).

For W(x) = -L log|x| + sum_n a_n cos(2 n theta) + b_n sin(2 n theta) these
return the pair sum S = sum_{i<j} W(x_i - x_j), the per-particle gradient
sum_{j != i} grad W(x_i - x_j), and the smallest pair distance. Harmonics are
built from powers of w = exp(2 i theta) so no trig calls are needed per pair.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from ._jit import HAVE_NUMBA, njit


@njit(cache=True)
def _pair_sums_jit(X, L, a, b):
    n = X.shape[0]
    N = a.shape[0]
    grad = np.zeros((n, 2))
    total = 0.0
    rmin = np.inf
    for i in range(n - 1):
        xi = X[i, 0]
        yi = X[i, 1]
        for j in range(i + 1, n):
            dx = xi - X[j, 0]
            dy = yi - X[j, 1]
            r2 = dx * dx + dy * dy
            r = np.sqrt(r2)
            if r < rmin:
                rmin = r
            c = dx / r
            s = dy / r
            wr = c * c - s * s
            wi = 2.0 * c * s
            pr = 1.0
            pi = 0.0
            kap = 0.0
            dkap = 0.0
            for k in range(N):
                t = pr * wr - pi * wi
                pi = pr * wi + pi * wr
                pr = t
                kap += a[k] * pr + b[k] * pi
                dkap += 2.0 * (k + 1) * (b[k] * pr - a[k] * pi)
            total += -L * 0.5 * np.log(r2) + kap
            # grad W = -L x / r^2 + kappa'(theta) (-y, x) / r^2
            gx = (-L * dx - dkap * dy) / r2
            gy = (-L * dy + dkap * dx) / r2
            grad[i, 0] += gx
            grad[i, 1] += gy
            grad[j, 0] -= gx
            grad[j, 1] -= gy
    return total, grad, rmin


@lru_cache(maxsize=8)
def _pairs(n):
    i, j = np.triu_indices(n, 1)
    i.setflags(write=False)
    j.setflags(write=False)
    return i, j


def _pair_sums_numpy(X, L, a, b):
    n = X.shape[0]
    if n < 2:
        return 0.0, np.zeros((n, 2)), np.inf
    i, j = _pairs(n)
    dx = X[i, 0] - X[j, 0]
    dy = X[i, 1] - X[j, 1]
    r2 = dx * dx + dy * dy
    inv = 1.0 / r2
    # (c, s) = (cos, sin) of 2 theta; (pr, pi) runs over the harmonics
    c = (dx * dx - dy * dy) * inv
    s = 2.0 * dx * dy * inv
    pr, pi = c, s
    kap = a[0] * pr + b[0] * pi if a.shape[0] else np.zeros_like(r2)
    dkap = 2.0 * (b[0] * pr - a[0] * pi) if a.shape[0] else np.zeros_like(r2)
    for k in range(1, a.shape[0]):
        pr, pi = pr * c - pi * s, pr * s + pi * c
        kap += a[k] * pr + b[k] * pi
        dkap += 2.0 * (k + 1) * (b[k] * pr - a[k] * pi)
    total = float(-0.5 * L * np.sum(np.log(r2)) + np.sum(kap))
    gx = (-L * dx - dkap * dy) * inv
    gy = (-L * dy + dkap * dx) * inv
    grad = np.empty((n, 2))
    grad[:, 0] = np.bincount(i, gx, n) - np.bincount(j, gx, n)
    grad[:, 1] = np.bincount(i, gy, n) - np.bincount(j, gy, n)
    return total, grad, float(np.sqrt(r2.min()))


def pair_sums(X, L, a, b, backend: str | None = None):
    """(pair energy sum, gradient sums, min distance); backend 'numba' or 'numpy'."""
    X = np.ascontiguousarray(X, dtype=float)
    a = np.ascontiguousarray(a, dtype=float)
    b = np.ascontiguousarray(b, dtype=float)
    if backend is None:
        backend = "numba" if HAVE_NUMBA else "numpy"
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is unavailable or disabled")
        if X.shape[0] < 2:
            return 0.0, np.zeros_like(X), np.inf
        total, grad, rmin = _pair_sums_jit(X, float(L), a, b)
        return float(total), grad, float(rmin)
    if backend == "numpy":
        return _pair_sums_numpy(X, float(L), a, b)
    raise ValueError(f"unknown backend {backend!r}")
