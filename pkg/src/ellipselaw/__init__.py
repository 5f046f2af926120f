"""Minimisers of anisotropic logarithmic interaction energies in the plane."""

from .anisotropy import (
    AnisotropySeries,
    KernelSpec,
    PsiClassification,
    classify_psi,
    eval_kappa,
    eval_kappa_angular_derivative,
    eval_psi_hat,
    make_preset,
    series_from_samples,
)
from .ellipse_solver import (
    Ellipse,
    EllipseShape,
    OutsideConvexityError,
    Segment,
    SolverError,
    SolverOptions,
    gamma_objective,
    solve,
    solve_report,
    system_residual,
)
from .particles import (
    DescentOptions,
    EllipticalWell,
    ParticleConfig,
    Power,
    Quadratic,
    discrete_energy,
    discrete_gradient,
    initial_config,
    minimize,
    second_moments,
)
from .potential import (
    ELReport,
    bessel_j1,
    boundary_potential,
    el_scan,
    grad_potential,
    radial_residual,
    segment_potential,
    tail_factor,
)
from .verify import GaussianBlobPair, convexity_probe, parseval_gap

__version__ = "0.1.0"
