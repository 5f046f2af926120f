"""Acceptance criteria, one test each. Every test records a PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

import conftest
from ellipselaw.anisotropy import AnisotropySeries, make_preset
from ellipselaw.ellipse_solver import Ellipse, Segment, solve, solve_report, system_residual
from ellipselaw.particles import (
    DescentOptions,
    Quadratic,
    discrete_energy,
    discrete_gradient,
    initial_config,
    minimize,
    second_moments,
)
from ellipselaw.potential import boundary_potential, el_scan, tail_factor, tail_integral_numeric
from ellipselaw.ellipse_solver import EllipseShape
from ellipselaw.verify import parseval_report


def record(k: int, ok: bool, detail: str):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {k}: {detail}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def test_criterion_1_circle_law():
    t0 = time.perf_counter()
    pred = solve(make_preset("coulomb"))
    rep = el_scan(make_preset("coulomb"), pred)
    dt = time.perf_counter() - t0
    s = pred.shape
    ok = (
        isinstance(pred, Ellipse)
        and abs(s.a1 - 1) <= 1e-6
        and abs(s.a2 - 1) <= 1e-6
        and rep.interior_max_grad_residual <= 1e-8
        and rep.exterior_min_radial_residual >= -1e-8
        and dt < 1.0
    )
    record(1, ok, f"circle law a=({s.a1:.9f}, {s.a2:.9f}), interior {rep.interior_max_grad_residual:.1e}, "
                  f"exterior min {rep.exterior_min_radial_residual:.3g}, {dt:.2f}s")
    assert ok


def test_criterion_2_ellipse_law():
    t0 = time.perf_counter()
    errs = []
    for alpha in (0.25, 0.5, 0.9):
        s = solve(make_preset("dislocation", alpha=alpha)).shape
        # canonical orientation: a1 along the x axis, phi = 0
        errs.append(max(abs(s.a1 - math.sqrt(1 - alpha)), abs(s.a2 - math.sqrt(1 + alpha)), abs(s.phi)))
    dt = time.perf_counter() - t0
    ok = max(errs) <= 1e-6 and dt < 5.0
    record(2, ok, f"ellipse law max axis error {max(errs):.1e}, {dt:.2f}s")
    assert ok


def test_criterion_3_degenerate_collapse():
    rep = solve_report(make_preset("dislocation", alpha=1.0))
    pred = rep.prediction
    betas = [step.beta for step in rep.trace]
    monotone = all(b < a for a, b in zip(betas, betas[1:]))
    ok = (
        isinstance(pred, Segment)
        and abs(pred.direction_angle - math.pi / 2) <= 1e-9
        and monotone
        and betas[-1] < 1e-3
    )
    record(3, ok, f"segment at {pred.direction_angle if isinstance(pred, Segment) else None!r}, "
                  f"beta trace {betas[0]:.3g} -> {betas[-1]:.3g} ({len(betas)} steps, monotone={monotone})")
    assert ok


def test_criterion_4_elasticity_threshold():
    below = solve(make_preset("elastic", a=0.5, b=1.0))
    above = solve(make_preset("elastic", a=0.5, b=1.2))
    ok = (
        isinstance(below, Ellipse)
        and isinstance(above, Segment)
        and abs(above.direction_angle - math.pi / 2) <= 1e-9
    )
    record(4, ok, f"b=1.0 -> {type(below).__name__}, b=1.2 -> {type(above).__name__}")
    assert ok


def test_criterion_5_tail_integral():
    t0 = time.perf_counter()
    errs = {a: abs(tail_integral_numeric(a, 1e4) - tail_factor(a)) for a in (0.5, 2.0)}
    dt = time.perf_counter() - t0
    ok = max(errs.values()) <= 1e-3 and dt < 1.0
    record(5, ok, f"tail integral errors {errs[0.5]:.1e} (0.5), {errs[2.0]:.1e} (2), {dt:.2f}s")
    assert ok


def test_criterion_6_parseval():
    gaps = {name: parseval_report(k).rel_gap for name, k in
            [("coulomb", make_preset("coulomb")), ("dislocation 0.5", make_preset("dislocation", alpha=0.5))]}
    ok = max(gaps.values()) <= 1e-3
    record(6, ok, "parseval rel_gap " + ", ".join(f"{k} {v:.1e}" for k, v in gaps.items()))
    assert ok


def test_criterion_7_particles_vs_continuum():
    kernel = make_preset("dislocation", alpha=0.5)
    t0 = time.perf_counter()
    res = minimize(initial_config(400, seed=42), kernel, Quadratic(), DescentOptions(seed=42))
    dt = time.perf_counter() - t0
    S = second_moments(res.config)
    shape = solve(kernel).shape
    target = np.diag([shape.a1**2 / 4, shape.a2**2 / 4])
    np.testing.assert_allclose(target, np.diag([0.125, 0.375]), atol=1e-9)
    rel = np.abs(np.diag(S) - np.diag(target)) / np.diag(target)
    off = abs(S[0, 1]) / 0.375
    dilated = EllipseShape(shape.phi, 1.05 * shape.a1, 1.05 * shape.a2)
    frac = float(np.mean(dilated.contains(res.config.positions)))
    ok = rel.max() <= 0.05 and off <= 0.05 and frac >= 0.99 and dt < 60.0
    record(7, ok, f"moments diag({S[0, 0]:.4f}, {S[1, 1]:.4f}) off {S[0, 1]:.1e}, "
                  f"max rel err {rel.max():.2%}, inside {frac:.1%}, {dt:.1f}s")
    assert ok


def test_criterion_8_physical_confinement():
    kernel = make_preset("dislocation", alpha=0.5)
    circle = EllipseShape(0.0, 1.0, 1.0)
    # 50 probes: centre, then rings of 7 and 14 and 28 points out to |x| = 0.8
    pts = [(0.0, 0.0)]
    for r, m in ((0.27, 7), (0.53, 14), (0.8, 28)):
        pts += [(r * math.cos(2 * math.pi * k / m), r * math.sin(2 * math.pi * k / m)) for k in range(m)]
    assert len(pts) == 50
    vals = [boundary_potential(kernel, circle, p, quad_nodes=2048) for p in pts]
    spread = max(vals) - min(vals)
    ok = spread <= 1e-3
    record(8, ok, f"boundary potential spread {spread:.1e} over 50 probes")
    assert ok


def _random_positive_series(rng, n_max=3):
    n = int(rng.integers(1, n_max + 1))
    a = rng.normal(size=n)
    b = rng.normal(size=n)
    w = 2 * np.arange(1, n + 1)
    # sum 2n (|a_n| + |b_n|) < 0.9 keeps psi_hat strictly positive
    scale = rng.uniform(0.05, 0.9) / float(np.sum(w * (np.abs(a) + np.abs(b))))
    return AnisotropySeries(tuple(a * scale), tuple(b * scale))


def test_criterion_9_property_suites():
    rng = np.random.default_rng(2024)
    # equivariance under rotation of the anisotropy
    eq_err = 0.0
    tr_err = 0.0
    for _ in range(20):
        series = _random_positive_series(rng)
        psi = float(rng.uniform(-math.pi, math.pi))
        M0 = solve(series).shape.matrix
        s1 = solve(series.rotated(psi)).shape
        R = np.array([[math.cos(psi), -math.sin(psi)], [math.sin(psi), math.cos(psi)]])
        eq_err = max(eq_err, float(np.max(np.abs(s1.matrix - R @ M0 @ R.T))))
        for ser, s in ((series, solve(series).shape), (series.rotated(psi), s1)):
            tr_err = max(tr_err, abs(s.a1**2 + s.a2**2 - 2.0), float(np.max(np.abs(system_residual(ser, s)))))
    for alpha in (0.25, 0.5, 0.9):
        s = solve(make_preset("dislocation", alpha=alpha)).shape
        tr_err = max(tr_err, abs(s.a1**2 + s.a2**2 - 2.0))
    # gradient against central differences on random configurations
    kernel = make_preset("elastic", a=0.4, b=1.0)
    fd_err = 0.0
    for _ in range(10):
        X = rng.uniform(-1.5, 1.5, size=(6, 2))
        G = discrete_gradient(X, kernel, Quadratic())
        h = 1e-6
        fd = np.zeros_like(X)
        for k in range(6):
            for d in range(2):
                Xp, Xm = X.copy(), X.copy()
                Xp[k, d] += h
                Xm[k, d] -= h
                fd[k, d] = (discrete_energy(Xp, kernel, Quadratic()) - discrete_energy(Xm, kernel, Quadratic())) / (2 * h)
        fd_err = max(fd_err, float(np.max(np.abs(G - fd)) / max(1.0, np.max(np.abs(G)))))
    # energy never increases across accepted steps
    res = minimize(initial_config(60, seed=7), kernel, Quadratic(), DescentOptions(max_iters=500))
    E = [row.energy for row in res.log]
    monotone = all(b <= a for a, b in zip(E, E[1:]))
    ok = eq_err <= 1e-8 and tr_err <= 1e-9 and fd_err <= 1e-6 and monotone
    record(9, ok, f"equivariance {eq_err:.1e}, trace identity {tr_err:.1e}, "
                  f"gradient vs FD {fd_err:.1e}, descent monotone={monotone} ({len(E)} steps)")
    assert ok
