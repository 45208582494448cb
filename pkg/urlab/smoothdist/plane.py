"""
Approximating planes and flatness integrands

best_plane fits P_X by kernel-weighted least squares; flatness_deficit
and dem_integrands turn smooth-distance evaluations into the computable
quantities used as Carleson integrands.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from ..constants import PLANE_FIT_RADIUS
from ..exceptions import DimensionError, FitError, ParameterError
from ..geometry.boundary import dist_to_boundary
from .field import SmoothDistanceField

logger = logging.getLogger(__name__)


@dataclass
class PlaneFit:
    """Affine d-plane P_X with the normalizing constant c_X"""

    point: np.ndarray
    frame: np.ndarray
    c_x: float
    D_1: float
    D_half: float
    delta: float
    atoms_used: int

    @property
    def normal_projector(self) -> np.ndarray:
        n = self.point.shape[0]
        return np.eye(n) - self.frame.T @ self.frame

    def distance(self, X: np.ndarray) -> np.ndarray:
        rel = np.atleast_2d(X) - self.point
        return np.linalg.norm(rel @ self.normal_projector, axis=1)

    def angle_to(self, frame: np.ndarray) -> float:
        """Largest principal angle between this plane and another d-frame"""
        singular = np.linalg.svd(self.frame @ np.asarray(frame).T, compute_uv=False)
        return float(np.arccos(np.clip(singular.min(), -1.0, 1.0)))


def _orient(frame: np.ndarray) -> np.ndarray:
    """Fix signs so the largest entry of each frame row is positive"""
    picks = np.argmax(np.abs(frame), axis=1)
    signs = np.sign(frame[np.arange(frame.shape[0]), picks])
    return frame * np.where(signs == 0, 1.0, signs)[:, None]


def best_plane(field: SmoothDistanceField, X: np.ndarray) -> PlaneFit:
    """
    Kernel-weighted least-squares d-plane over atoms in B(X, 100 delta).

    c_X = (c_1 / c_{1/2}^2) D_1(X) / D_{1/2}(X).
    """
    sample = field.sample
    if not float(sample.d).is_integer():
        raise DimensionError("Plane fits need integer d", d=sample.d, n=sample.n)
    d = int(sample.d)
    X = np.asarray(X, dtype=float)
    delta = float(dist_to_boundary(sample, X))
    if delta <= 0:
        raise ParameterError("Probe lies on the boundary", context={"probe": X.tolist()})

    idx = sample.tree.query_ball_point(X, PLANE_FIT_RADIUS * delta)
    if len(idx) < d + 1:
        raise FitError(
            f"Only {len(idx)} atoms within {PLANE_FIT_RADIUS} delta of the probe",
            atoms=len(idx),
            required=d + 1,
        )
    atoms = sample.points[idx]
    rho = np.linalg.norm(atoms - X, axis=1)
    omega = sample.weights[idx] * rho ** (-field.exponent)
    mean = (omega[:, None] * atoms).sum(axis=0) / omega.sum()
    _, _, vt = np.linalg.svd(np.sqrt(omega)[:, None] * (atoms - mean), full_matrices=True)
    frame = _orient(vt[:d])

    one = field.with_beta(1.0)
    half = field.with_beta(0.5)
    D_1 = float(one.evaluate(X).D[0])
    D_half = float(half.evaluate(X).D[0])
    c_x = (one.c_beta / half.c_beta**2) * D_1 / D_half

    return PlaneFit(
        point=mean,
        frame=frame,
        c_x=float(c_x),
        D_1=D_1,
        D_half=D_half,
        delta=delta,
        atoms_used=len(idx),
    )


def _multi_index_order(kappa: tuple[int, ...], n: int) -> int:
    if len(kappa) != n or any(k < 0 for k in kappa):
        raise ParameterError("kappa must be a multi-index of length n", "kappa", kappa)
    order = sum(kappa)
    if order > 2:
        raise ParameterError("Only |kappa| <= 2 is supported", "kappa", kappa)
    return order


def _pick(order: int, kappa: tuple[int, ...], value, grad, hess) -> float:
    if order == 0:
        return float(value)
    axes = [i for i, k in enumerate(kappa) for _ in range(k)]
    if order == 1:
        return float(grad[axes[0]])
    return float(hess[axes[0], axes[1]])


def flatness_deficit(
    field: SmoothDistanceField,
    X: np.ndarray,
    kappa: tuple[int, ...],
    fit: PlaneFit | None = None,
) -> float:
    """delta^(beta+|kappa|) |d^kappa R_beta(X) - c_X d^kappa R_{beta,X}(X)|"""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    order = _multi_index_order(tuple(kappa), n)
    fit = fit or best_plane(field, X)
    beta, cb = field.beta, field.c_beta

    values = field.evaluate(X, order)[0]
    actual = _pick(order, kappa, values.R, values.grad_R, values.hess_R)

    N = fit.normal_projector
    normal = N @ (X - fit.point)
    q = float(np.linalg.norm(normal))
    nu = normal / q
    model = cb * q**-beta
    model_grad = -beta * cb * q ** (-beta - 1) * nu
    model_hess = cb * (
        beta * (beta + 1) * q ** (-beta - 2) * np.outer(nu, nu)
        - beta * q ** (-beta - 2) * (N - np.outer(nu, nu))
    )
    approx = _pick(order, kappa, model, model_grad, model_hess)
    return fit.delta ** (beta + order) * abs(actual - fit.c_x * approx)


@dataclass
class DemValues:
    """Flatness integrands at a batch of probes"""

    g2: np.ndarray
    g1: np.ndarray
    ind: np.ndarray
    wdiv: np.ndarray
    threshold: float
    delta: np.ndarray = field(repr=False)

    def __getitem__(self, row: int) -> dict[str, float]:
        return {
            "g2": float(self.g2[row]),
            "g1": float(self.g1[row]),
            "ind": float(self.ind[row]),
            "wdiv": float(self.wdiv[row]),
        }


def dem_integrands(
    field: SmoothDistanceField, X: np.ndarray, on_close: str = "raise"
) -> DemValues:
    """
    g2 = delta |grad |grad D|^2|, g1 = delta |grad |grad D||,
    ind = 1{|grad D| < c}, wdiv = delta^(n-d) |div(D^(d+1-n) grad D)|.

    The threshold is c = c_beta^(-1/beta) / 2.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    sample = field.sample
    values = field.evaluate(X, 2, on_close=on_close)
    g, H, D = values.grad_D, values.hess_D, values.D
    delta = np.asarray(dist_to_boundary(sample, X), dtype=float)

    Hg = np.einsum("pij,pj->pi", H, g)
    norm_g = np.linalg.norm(g, axis=1)
    g2 = delta * 2.0 * np.linalg.norm(Hg, axis=1)
    g1 = delta * np.linalg.norm(Hg, axis=1) / norm_g
    threshold = 0.5 * field.plane_gradient
    ind = (norm_g < threshold).astype(float)

    m = sample.d + 1 - sample.n
    laplacian = np.trace(H, axis1=1, axis2=2)
    divergence = D**m * laplacian
    if m != 0:
        divergence = divergence + m * D ** (m - 1) * norm_g**2
    wdiv = delta ** (sample.n - sample.d) * np.abs(divergence)

    return DemValues(g2=g2, g1=g1, ind=ind, wdiv=wdiv, threshold=threshold, delta=delta)
