"""Boundary value problems for the 2-D conductivity equation div(sigma grad u) = 0
on circular domains, solved through generalized analytic functions.

A solution u is the real part of f satisfying dbar(f) = nu * conj(dz(f)) with
nu = (1 - sigma) / (1 + sigma); the package provides Dirichlet, Neumann, and
conjugate-function solvers on the disk, the annulus, and multiply connected
circular domains, plus bounded extremal approximation from partial boundary
data on the annulus.
"""

from .areaops import (
    AreaField,
    apply_T_adjoint,
    apply_T_alpha,
    area_pairing,
    cauchy_area,
    dbar,
    dz,
    evaluate_circle,
    evaluate_points,
)
from .bep import (
    BEPProblem,
    BEPSolution,
    TraceBasis,
    arc_indices,
    bep_sweep,
    build_trace_basis,
    solve_bep,
)
from .circfft import (
    BoundaryTrace,
    FourierBoundary,
    analytic_completion_coeffs,
    annulus_harmonic_parts,
    cauchy_boundary,
    circle_norm,
    conjugate_trace,
    fourier_coeffs,
    fourier_samples,
    freqs,
    poisson_extend,
    riesz_project,
)
from .dirichlet import (
    AnnulusSolver,
    AnnulusSplit,
    BoundaryFlux,
    ConductivitySolution,
    ConjugatePair,
    DiskSolver,
    ExteriorSolution,
    MasterNu,
    PeriodVector,
    SOmegaElement,
    compute_periods,
    conjugate_solution,
    normal_flux,
    sigma_hilbert,
    solve_S_omega,
    solve_dirichlet_disk,
    solve_dirichlet_exterior,
    solve_dirichlet_multi,
    split_annulus,
)
from .domain import (
    CircularDomain,
    CollarFamily,
    PolarGrid,
    build_domain,
    build_polar_grid,
    collar_circles,
    omega_grid,
)
from .errors import (
    BadAnnulusRadius,
    BadData,
    BadResolution,
    BudgetUnreachable,
    CompatibilityUnreachable,
    CompatibilityViolated,
    ConfigError,
    EpsilonTooLarge,
    GridMismatch,
    HardycondError,
    HoleOutsideDisk,
    IllConditioned,
    KappaViolated,
    MeanNotZero,
    NoConvergence,
    OverlappingHoles,
    PointTooCloseToBoundary,
    SingularSystem,
    SolverFailure,
    ZeroField,
)
from .hardy_nu import (
    BeltramiFunction,
    Factorization,
    GFunction,
    NuField,
    SigmaField,
    alpha_from_nu,
    bn_forward,
    bn_inverse,
    builtin_nu,
    factorize,
    hardy_norm,
    sigma_from_nu,
    solve_G,
)
from .neumann import NeumannData, NeumannSolution, negate_nu, solve_neumann
from .oracle import FDSolution, fd_dirichlet, radial_mode_bvp, singular_quadrature_cauchy

__version__ = "0.1.0"

__all__ = [
    "AnnulusSolver", "AnnulusSplit", "AreaField", "BEPProblem", "BEPSolution",
    "BadAnnulusRadius", "BadData", "BadResolution", "BeltramiFunction",
    "BoundaryFlux", "BoundaryTrace", "BudgetUnreachable", "CircularDomain",
    "CollarFamily", "CompatibilityUnreachable", "CompatibilityViolated",
    "ConductivitySolution", "ConfigError", "ConjugatePair", "DiskSolver",
    "EpsilonTooLarge", "ExteriorSolution", "FDSolution", "Factorization",
    "FourierBoundary", "GFunction", "GridMismatch", "HardycondError", "HoleOutsideDisk",
    "IllConditioned", "KappaViolated", "MasterNu", "MeanNotZero", "NeumannData",
    "NeumannSolution", "NoConvergence", "NuField", "OverlappingHoles",
    "PeriodVector", "PointTooCloseToBoundary", "PolarGrid", "SOmegaElement",
    "SigmaField", "SingularSystem", "SolverFailure", "TraceBasis", "ZeroField",
    "alpha_from_nu", "analytic_completion_coeffs", "annulus_harmonic_parts",
    "apply_T_adjoint", "apply_T_alpha", "arc_indices",
    "area_pairing", "bep_sweep", "bn_forward", "bn_inverse", "build_domain",
    "build_polar_grid", "build_trace_basis", "builtin_nu", "cauchy_area",
    "cauchy_boundary", "circle_norm", "collar_circles", "compute_periods",
    "conjugate_solution", "conjugate_trace", "dbar", "dz", "evaluate_circle",
    "evaluate_points", "factorize", "fd_dirichlet", "fourier_coeffs",
    "fourier_samples", "freqs", "hardy_norm", "negate_nu", "normal_flux", "omega_grid",
    "poisson_extend", "radial_mode_bvp", "riesz_project", "sigma_from_nu",
    "sigma_hilbert", "singular_quadrature_cauchy", "solve_G", "solve_S_omega",
    "solve_bep", "solve_dirichlet_disk", "solve_dirichlet_exterior",
    "solve_dirichlet_multi", "solve_neumann", "split_annulus",
]
