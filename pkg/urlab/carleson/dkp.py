"""
DKP coefficient check: D |grad A| bounded and a Carleson measure
"""

import logging
from collections.abc import Sequence

import numpy as np

from ..constants import DKP_CUTOFF_LADDER, DKP_SCALES, QUADRATURE_WHITNEY_RATIO
from ..dyadic.whitney import build_whitney
from ..elliptic.operator import CoefficientField
from ..geometry.domain import DomainBox
from ..models.reports import DKPReport
from ..smoothdist.field import SmoothDistanceField
from .functional import carleson_norm, refinement_trend

logger = logging.getLogger(__name__)


def coefficient_integrand(coefficients: CoefficientField, field_: SmoothDistanceField, domain: DomainBox):
    """f(X) = D(X) |grad A(X)|, with D = plane_gradient * delta where the sample is too close"""

    def f(X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        D = field_.evaluate(X, 0, on_close="nan").D
        D = np.where(np.isfinite(D), D, field_.plane_gradient * domain.delta(X))
        return D * coefficients.gradient_norm(X)

    return f


def dkp_check(
    coefficients: CoefficientField,
    field_: SmoothDistanceField,
    domain: DomainBox,
    scales: Sequence[float] = DKP_SCALES,
    cutoffs: Sequence[float] = DKP_CUTOFF_LADDER,
    centers: np.ndarray | None = None,
    threads: int = 1,
) -> DKPReport:
    """
    sup delta |grad A| and Carleson tables of D |grad A| over a cutoff ladder.

    One graded cover is built down to the finest cutoff and filtered for
    the coarser ones. A is DKP when the supremum is finite and the
    Carleson sup does not diverge under refinement.
    """
    cutoffs = sorted((float(c) for c in cutoffs), reverse=True)
    finest = build_whitney(domain, cutoffs[-1], QUADRATURE_WHITNEY_RATIO)
    points = finest.centers
    if len(points):
        sup_delta_grad = float(np.max(domain.delta(points) * coefficients.gradient_norm(points)))
    else:
        sup_delta_grad = 0.0

    f = coefficient_integrand(coefficients, field_, domain)
    reports = []
    for cutoff in cutoffs:
        cover = finest.filtered(cutoff)
        report = carleson_norm(
            f,
            scales,
            domain=domain,
            centers=centers,
            cutoff=cutoff,
            whitney=cover,
            tag="dkp_coeff",
            threads=threads,
        )
        reports.append(report)
        logger.debug("DKP cutoff %g: sup %.6g over %d cubes", cutoff, report.sup, len(cover))

    trend = refinement_trend([r.sup for r in reports], cutoffs)
    for report in reports:
        report.trend = trend
    is_dkp = bool(np.isfinite(sup_delta_grad)) and not trend.is_divergent
    logger.info(
        "DKP check for %s: sup delta|grad A| = %.4g, trend %s",
        coefficients.name,
        sup_delta_grad,
        trend.classification,
    )
    return DKPReport(
        sup_delta_grad=sup_delta_grad,
        cutoffs=cutoffs,
        reports=reports,
        trend=trend,
        is_dkp=is_dkp,
    )
