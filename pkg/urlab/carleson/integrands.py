"""
Integrands for the Carleson functional

Each tag fixes one exponent pattern f so that f^2 delta^(d-n) reproduces
the measure under study.
"""

import logging

import numpy as np

from ..constants import DERIVATIVE_MASK_SPACINGS, INTEGRAND_TAGS
from ..elliptic.derivatives import DerivativeFields, derivative_field, dirichlet_clearance
from ..elliptic.grid import GridField
from ..elliptic.operator import OperatorSpec
from ..exceptions import ParameterError
from ..smoothdist.field import SmoothDistanceField
from ..smoothdist.plane import dem_integrands

logger = logging.getLogger(__name__)

SOLUTION_TAGS = {
    "hess_u",
    "grad_abs_grad_u",
    "grad_sq_grad_u",
    "logratio_grad",
    "logratio_hess",
}


def _norm(array: np.ndarray, rank: int) -> np.ndarray:
    return np.sqrt(np.sum(array**2, axis=tuple(range(-rank, 0))))


def _solution_integrand(tag: str, u: GridField, derivatives: DerivativeFields) -> tuple[np.ndarray, np.ndarray]:
    delta = u.delta
    values = u.values
    valid = derivatives.mask & (values > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        if tag == "hess_u":
            f = delta**2 * _norm(derivatives.hess, 2) / values
        elif tag == "grad_abs_grad_u":
            f = delta**2 * _norm(derivatives.grad_abs_grad, 1) / values
            valid &= derivatives.abs_grad > 0
        elif tag == "grad_sq_grad_u":
            f = delta**3 * _norm(derivatives.grad_sq_grad, 1) / values**2
        else:
            assert derivatives.D is not None and derivatives.log_mask is not None
            valid &= derivatives.log_mask
            if tag == "logratio_grad":
                f = derivatives.D * _norm(derivatives.grad_log_ratio, 1)
            else:
                f = derivatives.D**2 * _norm(derivatives.hess_log_ratio, 2)
    return f, valid


def build_integrand(
    tag: str,
    u: GridField | None,
    field_: SmoothDistanceField,
    spec: OperatorSpec,
    template: GridField | None = None,
    derivatives: DerivativeFields | None = None,
    mask_spacings: float = DERIVATIVE_MASK_SPACINGS,
) -> GridField:
    """
    Nonnegative lattice integrand for one tag.

    Solution tags need u; dkp_coeff and the flatness tags only need a
    lattice, taken from u or template. Nodes where u <= 0 or where the
    stencil is incomplete are masked, and so is every node closer than
    mask_spacings * h to the boundary or to a Dirichlet node. The inner
    cutoff is recorded on the result.
    """
    if tag not in INTEGRAND_TAGS:
        raise ParameterError(f"Unknown integrand tag: {tag}", "tag", tag)
    base = u if u is not None else template
    if base is None:
        raise ParameterError("An integrand needs a lattice", "tag", tag)

    if tag == "hess_u" and spec.d < spec.n - 1:
        logger.warning(
            "hess_u with d=%g < n-1=%d: second derivatives of solutions need not satisfy a "
            "Carleson condition in this regime (u = |t| is a counterexample)",
            spec.d,
            spec.n - 1,
        )

    if tag in SOLUTION_TAGS:
        if u is None:
            raise ParameterError(f"Tag {tag} needs a solution field", "tag", tag)
        if derivatives is None:
            needs_distance = tag.startswith("logratio")
            derivatives = derivative_field(
                u,
                order=2,
                field_=field_ if needs_distance else None,
                on_nonpositive="mask",
                mask_spacings=mask_spacings,
            )
        f, valid = _solution_integrand(tag, u, derivatives)
    else:
        if u is not None:
            mask = derivative_field(base, order=1, mask_spacings=mask_spacings).mask
        else:
            mask = (base.delta >= mask_spacings * base.h) & dirichlet_clearance(base, mask_spacings)
        mask = mask & base.defined
        nodes = base.nodes[mask.reshape(-1)]
        f = np.zeros(base.shape)
        valid = mask.copy()
        if tag == "dkp_coeff":
            assert spec.coefficients is not None
            D = field_.evaluate(nodes, 0, on_close="nan").D
            local = D * spec.coefficients.gradient_norm(nodes)
        else:
            dem = dem_integrands(field_, nodes, on_close="nan")
            local = {"dem_g1": dem.g1, "dem_g2": dem.g2, "dem_ind": dem.ind, "weight_div": dem.wdiv}[tag]
        f[mask] = local
        valid[mask] = np.isfinite(local)

    valid &= np.isfinite(f)
    clean = np.where(valid, f, 0.0)
    logger.debug("Integrand %s defined on %d nodes", tag, int(valid.sum()))
    return base.with_values(
        clean, rank="scalar", valid=valid, integrand=tag, cutoff=mask_spacings * base.h
    )
