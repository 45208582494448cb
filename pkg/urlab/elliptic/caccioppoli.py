"""
Caccioppoli-type consistency check for ln(u/D) over Whitney cubes
"""

import logging

import numpy as np

from ..constants import CACCIOPPOLI_MIN_SPACINGS
from ..dyadic.whitney import WhitneyCover
from ..models.reports import CaccioppoliReport
from ..smoothdist.field import SmoothDistanceField
from ..smoothdist.plane import dem_integrands
from .derivatives import derivative_field
from .grid import GridField
from .operator import OperatorSpec

logger = logging.getLogger(__name__)

SNAP = 1e-9


def _window(u: GridField, lower: np.ndarray, upper: np.ndarray, closed: bool) -> tuple[slice, ...] | None:
    """Lattice slice of the nodes in [lower, upper) (or [lower, upper] when closed)"""
    start = np.ceil((lower - u.domain.lower) / u.h - SNAP).astype(int)
    if closed:
        stop = np.floor((upper - u.domain.lower) / u.h + SNAP).astype(int) + 1
    else:
        stop = np.ceil((upper - u.domain.lower) / u.h - SNAP).astype(int)
    if np.any(start < 0) or np.any(stop > np.array(u.shape)) or np.any(stop <= start):
        return None
    return tuple(slice(int(a), int(b)) for a, b in zip(start, stop, strict=True))


def caccioppoli_check(
    u: GridField,
    field_: SmoothDistanceField,
    spec: OperatorSpec,
    whitney: WhitneyCover,
) -> CaccioppoliReport:
    """
    Ratio of the Hessian term over W to the gradient terms over W* = 2W.

    LHS = sum_W |grad^2 ln(u/D)|^2 D^(d+4-n) h^n
    RHS = sum_W* (|grad ln(u/D)|^2 + (wdiv/delta)^2 + |grad A|^2) D^(d+2-n) h^n

    Cubes with side below 8h, or whose W* meets a masked node, are skipped.
    The reported constant is the largest ratio.
    """
    d, n, h = spec.d, spec.n, u.h
    derivatives = derivative_field(u, order=2, field_=field_, on_nonpositive="mask")
    valid = derivatives.log_mask
    assert valid is not None and derivatives.D is not None
    D = derivatives.D
    cell = h**n

    lhs_density = np.zeros(u.shape)
    rhs_density = np.zeros(u.shape)
    if np.any(valid):
        hess = derivatives.hess_log_ratio[valid]
        grad = derivatives.grad_log_ratio[valid]
        Dv = D[valid]
        nodes = u.nodes[valid.reshape(-1)]
        dem = dem_integrands(field_, nodes, on_close="nan")
        wdiv_term = np.nan_to_num((dem.wdiv / dem.delta) ** 2)
        assert spec.coefficients is not None
        coefficient_term = spec.coefficients.gradient_norm(nodes) ** 2
        lhs_density[valid] = np.sum(hess**2, axis=(1, 2)) * Dv ** (d + 4 - n)
        rhs_density[valid] = (np.sum(grad**2, axis=1) + wdiv_term + coefficient_term) * Dv ** (
            d + 2 - n
        )

    ratios: list[float] = []
    centers: list[np.ndarray] = []
    sides: list[float] = []
    for cube in whitney:
        if cube.side < CACCIOPPOLI_MIN_SPACINGS * h:
            continue
        inner = _window(u, cube.corner, cube.upper, closed=False)
        outer = _window(u, cube.center - cube.side, cube.center + cube.side, closed=True)
        if inner is None or outer is None or not np.all(valid[outer]):
            continue
        lhs = float(np.sum(lhs_density[inner])) * cell
        rhs = float(np.sum(rhs_density[outer])) * cell
        if rhs <= 0:
            if lhs > 0:
                logger.warning("Whitney cube at %s has a vanishing right-hand side", cube.center.tolist())
            continue
        ratios.append(lhs / rhs)
        centers.append(cube.center)
        sides.append(cube.side)

    if not ratios:
        logger.warning("No Whitney cube qualified for the Caccioppoli check")
        return CaccioppoliReport(constant=0.0, cubes_tested=0, min_side=0.0)
    worst = int(np.argmax(ratios))
    report = CaccioppoliReport(
        constant=float(ratios[worst]),
        cubes_tested=len(ratios),
        min_side=float(min(sides)),
        worst_center=centers[worst].tolist(),
        ratios=[float(r) for r in ratios],
    )
    logger.info("Caccioppoli constant %.4g over %d cubes", report.constant, report.cubes_tested)
    return report
