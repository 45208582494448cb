"""
Geometric diagnostics: beta numbers, eikonal check and convex-body distance Hessians
"""

from .beta import BetaFit, bbeta_inf, bwgl_report, fit_bbeta, write_beta_csv
from .convex import ConvexBodySpec, convex_distance_hessian, fd_hessian
from .eikonal import distance_to_nodes, eikonal_distance_check

__all__ = [
    "BetaFit",
    "ConvexBodySpec",
    "bbeta_inf",
    "bwgl_report",
    "convex_distance_hessian",
    "distance_to_nodes",
    "eikonal_distance_check",
    "fd_hessian",
    "fit_bbeta",
    "write_beta_csv",
]
