"""Second-order WSGD time stepping for the backward fractional Feynman-Kac equation."""

from .fracweights import WeightTable, binomial_power_series, fsd_weights, grunwald_coeffs, integral_weights
from .mesh_fem import FemSystem, Mesh, NodalField, assemble, build_mesh, interpolate, l2_norm
from .oracle import MLParams, exact_constantU_solution, mittag_leffler
from .stepper import ProblemSpec, SolveResult, self_convergence_error, solve
from .substantial import ExpFactorTable, apply_factor, build_factors

__all__ = [
    "ExpFactorTable",
    "FemSystem",
    "MLParams",
    "Mesh",
    "NodalField",
    "ProblemSpec",
    "SolveResult",
    "WeightTable",
    "apply_factor",
    "assemble",
    "binomial_power_series",
    "build_factors",
    "build_mesh",
    "exact_constantU_solution",
    "fsd_weights",
    "grunwald_coeffs",
    "integral_weights",
    "interpolate",
    "l2_norm",
    "mittag_leffler",
    "self_convergence_error",
    "solve",
]
