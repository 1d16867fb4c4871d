"""Generalized finite elements for steady advection-diffusion with boundary layers."""

from gfemad.errors import (
    AssemblyError,
    ConfigError,
    DegenerateEnrichmentError,
    DomainError,
    GfemError,
    InvalidArgumentError,
    ModeConflictError,
    OutOfDomainError,
    OverflowGuardError,
    SingularSystemError,
)
from gfemad.problem import ProblemSpec
from gfemad.mesh import Mesh, build_interval_mesh, build_quad_mesh, select_enriched_nodes
from gfemad.quadrature import QuadratureRule, gauss_rule, trapezoid_boundary_rule
from gfemad.basis import (
    DofMap,
    EnrichmentSpec,
    SolutionField,
    element_basis,
    eval_enrichment,
    evaluate_solution,
    shape_values,
)
from gfemad.assembly import GlobalSystem, add_penalty_terms, assemble, element_matrices
from gfemad.solve import BcMode, apply_strong_bc, solve, solve_gfem
from gfemad.continuation import ContinuationPlan, run_continuation
from gfemad.diagnostics import (
    ErrorReport,
    compute_tau,
    element_peclet,
    error_report,
    exact_1d,
)

__version__ = "0.1.0"
