"""
Degenerate elliptic operators on lattices: assembly, solves and derivatives
"""

from .caccioppoli import caccioppoli_check
from .derivatives import (
    DerivativeFields,
    derivative_field,
    dirichlet_clearance,
    gradient_bound_check,
    pole_mask,
)
from .grid import GridField, NodeKind
from .operator import (
    CoefficientField,
    ConstantCoefficients,
    FunctionCoefficients,
    OperatorSpec,
    ScalarProfileCoefficients,
    make_coefficients,
)
from .solver import (
    DiscreteSystem,
    assemble,
    convergence_order,
    green_function,
    images_green,
    reflect,
    solve_boundary_ball,
    solve_dirichlet,
    truncation_sensitivity,
)

__all__ = [
    "CoefficientField",
    "ConstantCoefficients",
    "DerivativeFields",
    "DiscreteSystem",
    "FunctionCoefficients",
    "GridField",
    "NodeKind",
    "OperatorSpec",
    "ScalarProfileCoefficients",
    "assemble",
    "caccioppoli_check",
    "convergence_order",
    "derivative_field",
    "dirichlet_clearance",
    "gradient_bound_check",
    "green_function",
    "images_green",
    "make_coefficients",
    "pole_mask",
    "reflect",
    "solve_boundary_ball",
    "solve_dirichlet",
    "truncation_sensitivity",
]
