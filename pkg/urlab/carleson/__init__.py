"""
Carleson-measure functionals, integrands and the DKP check
"""

from .dkp import coefficient_integrand, dkp_check
from .functional import carleson_norm, dyadic_generation, refinement_trend, write_carleson_csv
from .integrands import build_integrand

__all__ = [
    "build_integrand",
    "carleson_norm",
    "coefficient_integrand",
    "dkp_check",
    "dyadic_generation",
    "refinement_trend",
    "write_carleson_csv",
]
