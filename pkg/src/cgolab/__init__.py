"""cgolab: spectral laboratory for 2D magnetic CGO solutions and DN-map checks.

Periodic-grid Fourier machinery (fractional Sobolev and Besov norms,
Littlewood-Paley projections), Wirtinger/Cauchy operators and magnetic gauge
factors, quadratic-phase oscillatory modulations with measured decay rates,
Neumann-series construction of CGO remainders with PDE-residual certificates,
stationary-phase reconstruction of potential differences, and a finite-
difference Dirichlet/DN solver with an Alessandrini-identity cross-check.
"""

__version__ = "0.1.0"

from .cauchy import (
    PotentialSet,
    apply_gauge_modulation,
    cauchy_inverse,
    gauge_phase,
    wirtinger,
)
from .cgo import (
    CgoSolution,
    MaxIterationsExceeded,
    NoContraction,
    apply_contraction,
    assemble_solution,
    build_cgo,
    conjugated_laplacian_inverse,
    pde_residual,
)
from .config import ExperimentConfig, config_from_mapping, parse_config_file
from .dirichlet import (
    AlessandriniResult,
    BoundaryTrace,
    DnPairing,
    EigenvalueCollision,
    SolverFailure,
    alessandrini_check,
    alessandrini_residual,
    dn_matrix,
    dn_pairing,
    solve_dirichlet,
)
from .experiments import ExperimentResult, run_experiment
from .grid import Field, Grid2D, make_grid, set_fft_workers
from .harness import RateFit, fit_rate, make_bump, random_bandlimited, random_bump
from .phase import (
    NyquistViolation,
    PhaseContext,
    apply_phase_modulation,
    bukhgeim_phase,
    modulated_fourier_sup,
    propagate_nonelliptic,
    stationary_functional,
    tau_cap,
)
from .recon import (
    ReconReport,
    reconstruct_difference,
    remainder_norms,
    support_subgrid,
    unwrap_gauge,
)
from .spectral import (
    SobolevIndex,
    apply_multiplier,
    besov_norm,
    littlewood_paley_project,
    sobolev_norm,
)

__all__ = [
    "__version__",
    "Grid2D",
    "Field",
    "make_grid",
    "set_fft_workers",
    "SobolevIndex",
    "apply_multiplier",
    "sobolev_norm",
    "besov_norm",
    "littlewood_paley_project",
    "wirtinger",
    "cauchy_inverse",
    "PotentialSet",
    "gauge_phase",
    "apply_gauge_modulation",
    "PhaseContext",
    "NyquistViolation",
    "tau_cap",
    "bukhgeim_phase",
    "apply_phase_modulation",
    "modulated_fourier_sup",
    "propagate_nonelliptic",
    "stationary_functional",
    "CgoSolution",
    "NoContraction",
    "MaxIterationsExceeded",
    "conjugated_laplacian_inverse",
    "apply_contraction",
    "build_cgo",
    "pde_residual",
    "assemble_solution",
    "ReconReport",
    "reconstruct_difference",
    "remainder_norms",
    "unwrap_gauge",
    "support_subgrid",
    "BoundaryTrace",
    "DnPairing",
    "EigenvalueCollision",
    "SolverFailure",
    "solve_dirichlet",
    "dn_pairing",
    "dn_matrix",
    "alessandrini_check",
    "alessandrini_residual",
    "AlessandriniResult",
    "RateFit",
    "fit_rate",
    "make_bump",
    "random_bump",
    "random_bandlimited",
    "ExperimentConfig",
    "parse_config_file",
    "config_from_mapping",
    "ExperimentResult",
    "run_experiment",
]
