"""Relaxation and diffusion equations with a general convolutional time derivative."""

from .diffusion import (
    Domain1D,
    SpectralField,
    basis_field,
    eigensystem,
    project,
    regularity_check,
    solve_direct,
    solve_direct_many,
    synthesize,
    zero_field,
)
from .errors import (
    AccuracyError,
    ConfigError,
    ConsistencyError,
    DiscrepancyError,
    DomainError,
    GenfracError,
    QuadratureError,
)
from .inverse_source import (
    InverseProblem,
    InverseResult,
    QnBoundsReport,
    SandwichReport,
    bound_constants,
    check_Qn_bounds,
    check_regularity_sandwich,
    compute_Qn,
    forward_map,
    reconstruct,
    stability_bound,
)
from .kernels import (
    KernelSpec,
    ValidityReport,
    eval_g,
    eval_k_hat,
    kernel_from_json,
    validate_admissibility,
)
from .laplace import ContourConfig, bromwich_quad, invert, invert_grid
from .mittag_leffler import MLQuery, evaluate, ml, ml_fundamental, ml_impulse
from .relaxation import (
    BoundsReport,
    RelaxationSolution,
    TheoremReport,
    check_theorem_properties,
    convolve_v,
    fundamental_u,
    impulse_v,
    integral_v,
    phi_laplace_in_tau,
    phi_total_mass,
    psi_total_mass,
    sample_solutions,
    solve_relaxation,
    subordination_phi,
    subordination_psi,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "BoundsReport",
    "ConfigError",
    "ConsistencyError",
    "ContourConfig",
    "DiscrepancyError",
    "Domain1D",
    "DomainError",
    "GenfracError",
    "InverseProblem",
    "InverseResult",
    "KernelSpec",
    "MLQuery",
    "QnBoundsReport",
    "QuadratureError",
    "RelaxationSolution",
    "SandwichReport",
    "SpectralField",
    "TheoremReport",
    "ValidityReport",
    "basis_field",
    "bound_constants",
    "bromwich_quad",
    "check_Qn_bounds",
    "check_regularity_sandwich",
    "check_theorem_properties",
    "compute_Qn",
    "convolve_v",
    "eigensystem",
    "eval_g",
    "eval_k_hat",
    "evaluate",
    "forward_map",
    "fundamental_u",
    "impulse_v",
    "integral_v",
    "invert",
    "invert_grid",
    "kernel_from_json",
    "ml",
    "ml_fundamental",
    "ml_impulse",
    "phi_laplace_in_tau",
    "phi_total_mass",
    "project",
    "psi_total_mass",
    "reconstruct",
    "regularity_check",
    "sample_solutions",
    "solve_direct",
    "solve_direct_many",
    "solve_relaxation",
    "stability_bound",
    "subordination_phi",
    "subordination_psi",
    "synthesize",
    "validate_admissibility",
    "zero_field",
]
