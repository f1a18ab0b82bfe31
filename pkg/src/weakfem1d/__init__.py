"""Weak Galerkin finite elements for two-point boundary value problems."""

__version__ = "0.1.0"

from .analysis import ConvergenceReport, ErrorTriple, convergence_study, errors, rate
from .mesh import Mesh1D, bisect, mesh_from_config, quasi_uniformity, uniform_mesh
from .problem import (
    REGISTRY,
    GeneralProblem,
    ManufacturedSolution,
    Problem,
    get_problem,
    manufactured_source,
    to_self_adjoint,
)
from .projections import project_Ph, project_pih, project_Qh
from .quadrature import ElementBasis, ElementPolynomial, gauss_rule, integrate, mass_matrix
from .solver import (
    AssemblyError,
    Solution,
    assemble_global,
    solve,
    solve_global,
    solve_sweep,
    stability_check,
)
from .weak_space import DofMap, GlobalWeakFunction, LocalWeakFunction, jump, weak_derivative

__all__ = [
    "AssemblyError", "ConvergenceReport", "DofMap", "ElementBasis", "ElementPolynomial", "ErrorTriple",
    "GeneralProblem", "GlobalWeakFunction", "LocalWeakFunction", "ManufacturedSolution", "Mesh1D", "Problem",
    "REGISTRY", "Solution", "assemble_global", "bisect", "convergence_study", "errors", "gauss_rule",
    "get_problem", "integrate", "jump", "manufactured_source", "mass_matrix", "mesh_from_config",
    "project_Ph", "project_Qh", "project_pih", "quasi_uniformity", "rate", "solve", "solve_global",
    "solve_sweep", "stability_check", "to_self_adjoint", "uniform_mesh", "weak_derivative",
]
