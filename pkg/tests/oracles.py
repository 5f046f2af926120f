"""Independent reference computations used to freeze expected values.

Nothing here calls into the package under test except for plain data types.
"""

import math
import warnings

import mpmath
import numpy as np
from scipy import integrate, optimize, special

warnings.filterwarnings("ignore", category=integrate.IntegrationWarning)


def j1_series(r, terms=200):
    """J1 by its power series in 60-digit arithmetic."""
    with mpmath.workdps(60):
        x = mpmath.mpf(r)
        s = mpmath.mpf(0)
        for k in range(terms):
            s += (-1) ** k * (x / 2) ** (2 * k + 1) / (mpmath.factorial(k) * mpmath.factorial(k + 1))
        return float(s)


def elastic_kappa(theta, a, b):
    c2, s2 = math.cos(theta) ** 2, math.sin(theta) ** 2
    return -0.25 * (a + b) / a * math.log(c2 + (a + b) ** 2 * s2) + 0.25 * (b - a) / a * math.log(c2 + (b - a) ** 2 * s2)


def fourier_coeffs(f, N):
    """a_n, b_n of f on harmonics cos/sin(2 n t), n = 1..N, by adaptive quadrature."""
    a, b = [], []
    for n in range(1, N + 1):
        a.append(integrate.quad(lambda t: f(t) * math.cos(2 * n * t), 0, math.pi, limit=400, epsabs=1e-14)[0] * 2 / math.pi)
        b.append(integrate.quad(lambda t: f(t) * math.sin(2 * n * t), 0, math.pi, limit=400, epsabs=1e-14)[0] * 2 / math.pi)
    return np.array(a), np.array(b)


def psi_from_coeffs(a, b):
    n = np.arange(1, len(a) + 1)
    w = (-1.0) ** n * 2 * n

    def psi(t):
        return 1.0 + float(np.sum(w * (a * np.cos(2 * n * t) + b * np.sin(2 * n * t))))

    return psi


def system_matrix(psi, a1, a2, phi):
    """(1/pi) \\oint psi y y^T / (M y . y) by adaptive quadrature."""
    c, s = math.cos(phi), math.sin(phi)
    R = np.array([[c, -s], [s, c]])
    M = R @ np.diag([a1 * a1, a2 * a2]) @ R.T
    out = np.zeros((2, 2))
    for j in range(2):
        for k in range(j, 2):
            def f(t):
                y = np.array([math.cos(t), math.sin(t)])
                return psi(t) * y[j] * y[k] / (y @ M @ y)
            out[j, k] = out[k, j] = integrate.quad(f, 0, 2 * math.pi, limit=400, epsabs=1e-14)[0] / math.pi
    return out


def solve_system(psi, guess):
    """Root of system_matrix = I in (a1, a2, phi)."""
    def F(p):
        G = system_matrix(psi, *p) - np.eye(2)
        return [G[0, 0], G[1, 1], G[0, 1]]

    sol = optimize.fsolve(F, guess, xtol=1e-13)
    return sol, np.max(np.abs(F(sol)))


def gaussian_log_potential(c, var):
    """\\int -log|z| g(z - c) dz for g the centred Gaussian of variance ``var`` per axis."""
    r = float(np.hypot(*c))
    if r == 0:
        return -0.5 * (math.log(2 * var) - np.euler_gamma)
    return -math.log(r) - 0.5 * special.exp1(r * r / (2 * var))


def fourier_side_coulomb(d, sigma):
    """(1/pi) \\int\\int e^{-s^2 r^2} (1 - cos(r d.e)) / r dr dtheta.

    The radial integral is x 2F2(1, 1; 2, 3/2; -x) with x = (d.e)^2 / (4 s^2)
    (termwise from the cosine series); the angle is done by quadrature.
    """
    dn = float(np.hypot(*d))

    def radial(t):
        x = (dn * math.cos(t)) ** 2 / (4 * sigma * sigma)
        return float(x * mpmath.hyp2f2(1, 1, 2, 1.5, -x))

    return integrate.quad(radial, 0, 2 * math.pi, limit=200, epsabs=1e-13)[0] / math.pi


def psi_min_oracle(series):
    """Minimum of psi_hat: dense grid, then bounded scalar minimisation around each low node."""
    n = np.arange(1, series.N + 1)
    w = (-1.0) ** n * 2 * n
    a, b = np.asarray(series.cos_coeffs), np.asarray(series.sin_coeffs)

    def psi(t):
        return 1.0 + float(np.sum(w * (a * np.cos(2 * n * t) + b * np.sin(2 * n * t))))

    t = np.linspace(0, math.pi, 4001)
    vals = np.array([psi(x) for x in t])
    best = float(vals.min())
    h = t[1] - t[0]
    for i in np.argsort(vals)[:8]:
        r = optimize.minimize_scalar(psi, bounds=(t[i] - h, t[i] + h), method="bounded", options={"xatol": 1e-12})
        best = min(best, float(r.fun))
    return best
