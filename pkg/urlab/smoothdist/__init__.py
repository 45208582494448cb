"""
Smooth distance D_beta, approximating planes and flatness integrands
"""

from .field import (
    SmoothDistanceField,
    SmoothDistanceValues,
    c_beta,
    c_beta_closed_form,
    comparability_constant,
    eval_smooth_distance,
    tail_constant,
)
from .plane import DemValues, PlaneFit, best_plane, dem_integrands, flatness_deficit

__all__ = [
    "DemValues",
    "PlaneFit",
    "SmoothDistanceField",
    "SmoothDistanceValues",
    "best_plane",
    "c_beta",
    "c_beta_closed_form",
    "comparability_constant",
    "dem_integrands",
    "eval_smooth_distance",
    "flatness_deficit",
    "tail_constant",
]
