import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ellipselaw.anisotropy import AnisotropySeries, make_preset
from ellipselaw.particles import initial_config
from ellipselaw.verify import (
    GaussianBlobPair,
    ParsevalReport,
    QuadOptions,
    convexity_probe,
    parseval_gap,
    parseval_report,
    smoothed_kernel,
)
from oracles import fourier_side_coulomb, gaussian_log_potential

COULOMB = make_preset("coulomb")
D05 = make_preset("dislocation", alpha=0.5)
ELASTIC = make_preset("elastic", a=0.5, b=1.2)


def test_smoothed_kernel_matches_closed_form():
    for c in ([0.0, 0.0], [1.0, 0.0], [0.3, -2.0], [5.0, 5.0]):
        assert smoothed_kernel(COULOMB, c, 0.5) == pytest.approx(gaussian_log_potential(c, 0.5), abs=1e-12)


def test_smoothed_kernel_anisotropic_term_at_origin():
    # a centred isotropic Gaussian averages cos 2 theta to zero
    assert smoothed_kernel(D05, [0, 0], 0.4) == pytest.approx(smoothed_kernel(COULOMB, [0, 0], 0.4), abs=1e-13)


def test_parseval_coulomb_examples():
    lhs, rhs = parseval_gap(COULOMB)
    exact = 2 * gaussian_log_potential([0, 0], 0.5) - 2 * gaussian_log_potential([2, 0], 0.5)
    assert lhs == pytest.approx(exact, abs=1e-12)
    assert rhs == pytest.approx(fourier_side_coulomb((2.0, 0.0), 0.5), abs=1e-10)
    assert rhs == pytest.approx(lhs, rel=1e-10)


@pytest.mark.parametrize("kernel", [COULOMB, D05, ELASTIC, make_preset("dislocation", alpha=1.0)], ids=["coulomb", "d05", "elastic", "d1"])
def test_parseval_presets(kernel):
    rep = parseval_report(kernel)
    assert rep.rel_gap <= 1e-8
    assert rep.lhs > 0


def test_parseval_coincident_blobs():
    rep = parseval_report(D05, GaussianBlobPair((0.3, 0.3), (0.3, 0.3), 0.5))
    assert rep == ParsevalReport(0.0, 0.0, 0.0)


def test_parseval_swap_symmetry():
    a = parseval_gap(ELASTIC, GaussianBlobPair((0.2, 0.7), (-0.4, 0.1), 0.3))
    b = parseval_gap(ELASTIC, GaussianBlobPair((-0.4, 0.1), (0.2, 0.7), 0.3))
    assert a[0] == pytest.approx(b[0], rel=1e-12)
    assert a[1] == pytest.approx(b[1], rel=1e-12)


def test_parseval_is_quadrature_converged():
    blobs = GaussianBlobPair((0.5, 0.2), (-0.7, 0.4), 0.35)
    q = QuadOptions()
    a = parseval_gap(ELASTIC, blobs, q)
    b = parseval_gap(ELASTIC, blobs, q.refined())
    assert abs(a[0] - b[0]) <= 1e-4 * abs(b[0])
    assert abs(a[1] - b[1]) <= 1e-4 * abs(b[1])


@settings(max_examples=20)
@given(
    st.tuples(st.floats(-2, 2), st.floats(-2, 2)),
    st.tuples(st.floats(-2, 2), st.floats(-2, 2)),
    st.floats(0.2, 1.0),
)
def test_energy_of_neutral_measure_is_positive(p, q, sigma):
    if math.hypot(p[0] - q[0], p[1] - q[1]) < 1e-3:
        return
    rep = parseval_report(ELASTIC, GaussianBlobPair(p, q, sigma))
    assert rep.lhs > 0 and rep.rhs > 0
    assert rep.rel_gap <= 1e-6


def test_blob_validation():
    with pytest.raises(ValueError):
        GaussianBlobPair(sigma=0.0)
    np.testing.assert_array_equal(GaussianBlobPair().offset, [2.0, 0.0])


def test_convexity_probe_examples():
    A = initial_config(6, seed=0)
    B = initial_config(6, seed=1)
    for kernel in (COULOMB, D05):
        pr = convexity_probe(kernel, A, B)
        assert pr.claimed
        assert pr.midpoint_gap > 0
        chord = 0.5 * (pr.energies[0] + pr.energies[-1])
        assert chord - pr.energies[2] == pytest.approx(pr.midpoint_gap, abs=1e-12)


def test_convexity_probe_identical_configs():
    A = initial_config(5, seed=4)
    pr = convexity_probe(D05, A, A)
    assert pr.midpoint_gap == pytest.approx(0.0, abs=1e-14)
    assert max(pr.energies) - min(pr.energies) <= 1e-14


def test_convexity_probe_indefinite_profile():
    # psi_hat = 1 - 2 a cos 2 theta goes negative for a > 1/2
    pr = convexity_probe(AnisotropySeries((0.8,), (0.0,)), initial_config(4, seed=0), initial_config(4, seed=1))
    assert not pr.claimed
