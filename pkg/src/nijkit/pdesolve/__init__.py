"""Solvers for ``d(A* dU) = Omega``: exact (diagonal ``A``) and by power series."""

from nijkit.pdesolve.cauchy import CauchyData, cauchy_series_solve, solve_jet_system
from nijkit.pdesolve.diagonal import (
    DiagonalProblem,
    add_homogeneous,
    cohomological_operator,
    solve_diagonal,
)
from nijkit.pdesolve.jets import (
    IntegrabilityCertificate,
    JetSystem,
    SolvedForm,
    TotalDerivatives,
    check_compatibility_conditions,
    linear_companion_frame,
    reduce_to_solved_form,
)
from nijkit.pdesolve.pipeline import Canonicalization, solve_canonicalization

__all__ = [
    "CauchyData",
    "Canonicalization",
    "DiagonalProblem",
    "IntegrabilityCertificate",
    "JetSystem",
    "SolvedForm",
    "TotalDerivatives",
    "add_homogeneous",
    "cauchy_series_solve",
    "check_compatibility_conditions",
    "cohomological_operator",
    "linear_companion_frame",
    "reduce_to_solved_form",
    "solve_canonicalization",
    "solve_diagonal",
    "solve_jet_system",
]
