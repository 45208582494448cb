"""
Centered-difference derivatives of lattice solutions

Only full centered stencils are used. A node is masked out when its
stencil leaves the defined region, when it sits within 2h of the boundary
or of any Dirichlet node, or when it lies within 4h of a recorded pole.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import distance_transform_edt

from ..constants import DERIVATIVE_MASK_SPACINGS, GRADIENT_CHECK_SPACINGS, POLE_MASK_SPACINGS
from ..exceptions import ParameterError, PositivityError
from ..models.reports import GradientBoundReport
from ..smoothdist.field import SmoothDistanceField
from .grid import GridField

logger = logging.getLogger(__name__)

NONPOSITIVE_POLICIES = ("raise", "mask")


def _shifted(padded: np.ndarray, offset: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    return padded[tuple(slice(1 + o, 1 + o + s) for o, s in zip(offset, shape, strict=True))]


def pole_mask(u: GridField, spacings: float = POLE_MASK_SPACINGS) -> np.ndarray:
    """True at nodes farther than spacings * h from the recorded pole"""
    pole = u.metadata.get("pole")
    if pole is None:
        return np.ones(u.shape, dtype=bool)
    dist = np.linalg.norm(u.nodes - np.asarray(pole), axis=1).reshape(u.shape)
    return dist > spacings * u.h


def dirichlet_clearance(u: GridField, spacings: float = DERIVATIVE_MASK_SPACINGS) -> np.ndarray:
    """True at nodes at least spacings * h from every Dirichlet node, box faces included"""
    dirichlet = u.dirichlet
    if not np.any(dirichlet):
        return np.ones(u.shape, dtype=bool)
    clearance = distance_transform_edt(~dirichlet, sampling=u.h)
    return clearance >= spacings * u.h * (1 - 1e-12)


@dataclass(eq=False)
class DerivativeFields:
    """Gradient and Hessian of u with the derived quantities built from them"""

    u: GridField = field(repr=False)
    mask: np.ndarray = field(repr=False)
    grad: np.ndarray = field(repr=False)
    hess: np.ndarray | None = field(default=None, repr=False)
    D: np.ndarray | None = field(default=None, repr=False)
    grad_D: np.ndarray | None = field(default=None, repr=False)
    hess_D: np.ndarray | None = field(default=None, repr=False)
    log_mask: np.ndarray | None = field(default=None, repr=False)

    @property
    def abs_grad(self) -> np.ndarray:
        return np.linalg.norm(self.grad, axis=-1)

    @property
    def sq_grad(self) -> np.ndarray:
        return np.sum(self.grad**2, axis=-1)

    def _require_hessian(self) -> np.ndarray:
        if self.hess is None:
            raise ParameterError("Second derivatives were not computed", "order", 1)
        return self.hess

    @property
    def grad_sq_grad(self) -> np.ndarray:
        """grad(|grad u|^2) = 2 H grad u"""
        return 2.0 * np.einsum("...ij,...j->...i", self._require_hessian(), self.grad)

    @property
    def grad_abs_grad(self) -> np.ndarray:
        """grad |grad u| = H grad u / |grad u|"""
        Hg = np.einsum("...ij,...j->...i", self._require_hessian(), self.grad)
        with np.errstate(divide="ignore", invalid="ignore"):
            return Hg / self.abs_grad[..., None]

    def _require_distance(self) -> tuple[np.ndarray, np.ndarray]:
        if self.D is None or self.grad_D is None:
            raise ParameterError("Log-ratio fields need a smooth distance field")
        return self.D, self.grad_D

    @property
    def grad_log_ratio(self) -> np.ndarray:
        """grad ln(u/D) = grad u / u - grad D / D"""
        D, gD = self._require_distance()
        u = self.u.values
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.grad / u[..., None] - gD / D[..., None]

    @property
    def hess_log_ratio(self) -> np.ndarray:
        """grad^2 ln(u/D)"""
        D, gD = self._require_distance()
        H = self._require_hessian()
        if self.hess_D is None:
            raise ParameterError("Log-ratio Hessian needs second derivatives of D")
        u = self.u.values
        with np.errstate(divide="ignore", invalid="ignore"):
            part_u = H / u[..., None, None] - np.einsum("...i,...j->...ij", self.grad, self.grad) / (
                u**2
            )[..., None, None]
            part_D = self.hess_D / D[..., None, None] - np.einsum("...i,...j->...ij", gD, gD) / (
                D**2
            )[..., None, None]
        return part_u - part_D

    def as_field(self, name: str) -> GridField:
        """Wrap one derived quantity as a GridField with its validity mask"""
        values = getattr(self, name)
        rank = {0: "scalar", 1: "vector", 2: "matrix"}[values.ndim - self.u.n]
        valid = self.log_mask if "log" in name and self.log_mask is not None else self.mask
        clean = np.where(valid.reshape(valid.shape + (1,) * (values.ndim - valid.ndim)), values, 0.0)
        return self.u.with_values(clean, rank=rank, valid=valid, derived=name)


def derivative_field(
    u: GridField,
    order: int = 2,
    field_: SmoothDistanceField | None = None,
    on_nonpositive: str = "raise",
    mask_spacings: float = DERIVATIVE_MASK_SPACINGS,
) -> DerivativeFields:
    """
    Centered first and second differences of a scalar lattice field.

    When field_ is given, D_beta and its derivatives are evaluated on the
    masked nodes so the log-ratio quantities are available. Logarithms need
    u > 0: on_nonpositive="raise" rejects a nonpositive masked node and
    "mask" drops it instead.
    """
    if u.rank != "scalar":
        raise ParameterError("Derivatives are taken of scalar fields", "rank", u.rank)
    if order not in (1, 2):
        raise ParameterError("order must be 1 or 2", "order", order)
    if on_nonpositive not in NONPOSITIVE_POLICIES:
        raise ParameterError("Unknown nonpositive policy", "on_nonpositive", on_nonpositive)

    n, h, shape = u.n, u.h, u.shape
    values = np.where(u.defined, u.values, np.nan)
    padded = np.pad(values, 1, mode="constant", constant_values=np.nan)
    eye = np.eye(n, dtype=int)
    zero = np.zeros(n, dtype=int)

    grad = np.empty(shape + (n,))
    stencil_ok = np.isfinite(values)
    for k in range(n):
        plus = _shifted(padded, eye[k], shape)
        minus = _shifted(padded, -eye[k], shape)
        grad[..., k] = (plus - minus) / (2 * h)
        stencil_ok &= np.isfinite(plus) & np.isfinite(minus)

    hess = None
    if order == 2:
        hess = np.empty(shape + (n, n))
        centre = _shifted(padded, zero, shape)
        for k in range(n):
            hess[..., k, k] = (
                _shifted(padded, eye[k], shape) - 2 * centre + _shifted(padded, -eye[k], shape)
            ) / h**2
            for j in range(k + 1, n):
                corners = [
                    _shifted(padded, eye[k] + eye[j], shape),
                    _shifted(padded, eye[k] - eye[j], shape),
                    _shifted(padded, -eye[k] + eye[j], shape),
                    _shifted(padded, -eye[k] - eye[j], shape),
                ]
                mixed = (corners[0] - corners[1] - corners[2] + corners[3]) / (4 * h**2)
                hess[..., k, j] = hess[..., j, k] = mixed
                for corner in corners:
                    stencil_ok &= np.isfinite(corner)

    mask = stencil_ok & (u.delta >= mask_spacings * h) & pole_mask(u)
    mask &= dirichlet_clearance(u, mask_spacings)
    result = DerivativeFields(u=u, mask=mask, grad=grad, hess=hess)
    logger.debug("Derivative mask keeps %d of %d nodes", int(mask.sum()), u.size)

    if field_ is not None:
        positive = u.values > 0
        if on_nonpositive == "raise" and np.any(mask & ~positive):
            bad = np.argwhere(mask & ~positive)[0]
            raise PositivityError(
                f"Solution is nonpositive at node {u.node(tuple(bad)).tolist()}",
                context={"node": u.node(tuple(bad)).tolist(), "value": float(u.values[tuple(bad)])},
            )
        log_mask = mask & positive
        D = np.full(shape, np.nan)
        gD = np.full(shape + (n,), np.nan)
        HD = np.full(shape + (n, n), np.nan) if order == 2 else None
        if np.any(log_mask):
            evaluated = field_.evaluate(u.nodes[log_mask.reshape(-1)], order, on_close="nan")
            D[log_mask] = evaluated.D
            gD[log_mask] = evaluated.grad_D
            if HD is not None:
                HD[log_mask] = evaluated.hess_D
        log_mask &= np.isfinite(D)
        result.D, result.grad_D, result.hess_D, result.log_mask = D, gD, HD, log_mask
    return result


def gradient_bound_check(u: GridField) -> GradientBoundReport:
    """
    sup of delta |grad u| / u over nodes with delta >= 4h.

    Pole-adjacent nodes and nodes without a full stencil are skipped.
    """
    derivatives = derivative_field(u, order=1, mask_spacings=GRADIENT_CHECK_SPACINGS)
    tested = derivatives.mask
    if np.any(tested & (u.values <= 0)):
        bad = np.argwhere(tested & (u.values <= 0))[0]
        raise PositivityError(
            f"Solution is nonpositive at tested node {u.node(tuple(bad)).tolist()}",
            context={"node": u.node(tuple(bad)).tolist(), "value": float(u.values[tuple(bad)])},
        )
    count = int(tested.sum())
    if count == 0:
        logger.warning("No nodes qualify for the gradient bound check")
        return GradientBoundReport(sup=0.0, argmax=[], nodes_tested=0)

    ratio = np.full(u.shape, -np.inf)
    ratio[tested] = u.delta[tested] * derivatives.abs_grad[tested] / u.values[tested]
    flat = int(np.argmax(ratio))
    index = np.unravel_index(flat, u.shape)
    return GradientBoundReport(
        sup=float(ratio[index]),
        argmax=u.node(tuple(int(i) for i in index)).tolist(),
        nodes_tested=count,
    )
