"""
Constant gradient implies distance: lattice check
"""

import logging

import numpy as np

from ..constants import EIKONAL_TOLERANCE
from ..elliptic.derivatives import derivative_field
from ..elliptic.grid import GridField
from ..exceptions import DomainError, ParameterError
from ..models.reports import EikonalReport

logger = logging.getLogger(__name__)

# Nodes nearer the zero set than this many spacings are skipped
EIKONAL_MASK_SPACINGS = 8.0
CHUNK = 2048


def distance_to_nodes(X: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Exact brute-force distance from each row of X to the target set"""
    out = np.empty(X.shape[0])
    for start in range(0, X.shape[0], CHUNK):
        block = X[start : start + CHUNK]
        sq = np.full(block.shape[0], np.inf)
        for t0 in range(0, targets.shape[0], CHUNK):
            diff = block[:, None, :] - targets[None, t0 : t0 + CHUNK, :]
            sq = np.minimum(sq, np.einsum("ijk,ijk->ij", diff, diff).min(axis=1))
        out[start : start + CHUNK] = np.sqrt(sq)
    return out


def eikonal_distance_check(G: GridField, tolerance: float = EIKONAL_TOLERANCE) -> EikonalReport:
    """
    Test whether |grad G| is constant away from the zero set and, if so,
    whether G = c dist(., {G = 0}).

    The gradient is taken at nodes at least 8h from the zero set with a
    full stencil. Both the relative oscillation of |grad G| and the error
    relative to max G must stay below tolerance.
    """
    if G.rank != "scalar":
        raise ParameterError("Eikonal check needs a scalar field", "rank", G.rank)
    values = G.values
    defined = G.defined
    if np.any(values[defined] < 0):
        raise ParameterError("Eikonal check needs G >= 0")
    scale = float(np.max(values[defined])) if np.any(defined) else 0.0
    zero = defined & (values <= 1e-12 * max(scale, 1.0))
    if not np.any(zero):
        raise DomainError("G has no zero set on the grid")

    distance = np.full(G.shape, np.nan)
    distance.reshape(-1)[defined.reshape(-1)] = distance_to_nodes(
        G.nodes[defined.reshape(-1)], G.nodes[zero.reshape(-1)]
    )

    base = G.with_values(values, valid=defined)
    derivatives = derivative_field(base, order=1, mask_spacings=0.0)
    mask = derivatives.mask & (distance >= EIKONAL_MASK_SPACINGS * G.h)
    count = int(mask.sum())
    if count == 0:
        logger.warning("No nodes far enough from the zero set for the eikonal check")
        return EikonalReport(
            is_const_grad=False, c=0.0, oscillation=float("inf"), max_error=float("inf"), passed=False, nodes_tested=0
        )

    gradient = derivatives.abs_grad[mask]
    c = float(np.median(gradient))
    oscillation = float((gradient.max() - gradient.min()) / c) if c > 0 else float("inf")
    is_const = oscillation < tolerance
    max_error = float(np.max(np.abs(values[mask] - c * distance[mask])))
    top = float(np.max(values[mask]))
    passed = is_const and max_error <= tolerance * top
    logger.info(
        "Eikonal check: c=%.4g oscillation=%.3g max error=%.3g (%s)",
        c,
        oscillation,
        max_error,
        "pass" if passed else "fail",
    )
    return EikonalReport(
        is_const_grad=bool(is_const),
        c=c,
        oscillation=oscillation,
        max_error=max_error,
        passed=bool(passed),
        nodes_tested=count,
    )
