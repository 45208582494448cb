"""
Distance Hessians of convex bodies

A body is described near a boundary point by a concave chart s <= phi(y),
y in R^(n-1), with phi(0) = 0 and grad phi(0) = 0. Distances are computed
by projecting onto the chart with damped Newton; the Hessian of the
distance at X = (0, t) is then taken by finite differences and compared
with two closed forms.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from ..constants import HESSIAN_FD_STEP, PROJECTION_MAX_ITERATIONS, PROJECTION_STEP_TOLERANCE
from ..exceptions import ParameterError, ProjectionError
from ..models.reports import DistanceHessianReport

logger = logging.getLogger(__name__)

SIGN_TOLERANCE = 1e-6


@dataclass
class ConvexBodySpec:
    """Concave boundary chart with value, gradient and Hessian evaluators"""

    name: str
    n: int
    phi: Callable[[np.ndarray], float] = field(repr=False)
    grad: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    hess: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    curvatures: list[float] = field(default_factory=list)
    chart_radius: float = np.inf

    def __post_init__(self) -> None:
        if len(self.curvatures) != self.n - 1:
            raise ParameterError("One principal curvature per tangent direction", "curvatures", self.curvatures)
        if any(c < 0 for c in self.curvatures):
            raise ParameterError("Principal curvatures of a convex body are nonnegative", "curvatures", self.curvatures)
        H0 = -self.hess(np.zeros(self.n - 1))
        eigs = np.sort(np.linalg.eigvalsh(H0))
        if not np.allclose(eigs, np.sort(self.curvatures), atol=1e-9):
            raise ParameterError(
                "Chart Hessian at the origin does not match the curvatures",
                context={"eigenvalues": eigs.tolist(), "curvatures": list(self.curvatures)},
            )

    @classmethod
    def sphere(cls, R: float = 1.0, n: int = 2) -> "ConvexBodySpec":
        """Ball of radius R centered at (0, ..., 0, -R)"""
        if R <= 0:
            raise ParameterError("Radius must be positive", "R", R)

        def phi(y: np.ndarray) -> float:
            return float(np.sqrt(R**2 - y @ y) - R)

        def grad(y: np.ndarray) -> np.ndarray:
            return -y / np.sqrt(R**2 - y @ y)

        def hess(y: np.ndarray) -> np.ndarray:
            s = R**2 - y @ y
            return -np.eye(y.size) / np.sqrt(s) - np.outer(y, y) / s**1.5

        return cls("sphere", n, phi, grad, hess, [1.0 / R] * (n - 1), chart_radius=R)

    @classmethod
    def paraboloid(cls, curvatures: list[float] | float) -> "ConvexBodySpec":
        """phi(y) = -1/2 sum lambda_i y_i^2"""
        lam = np.atleast_1d(np.asarray(curvatures, dtype=float))
        return cls(
            "paraboloid",
            lam.size + 1,
            lambda y: float(-0.5 * np.sum(lam * y**2)),
            lambda y: -lam * y,
            lambda y: -np.diag(lam),
            lam.tolist(),
        )

    @classmethod
    def flat(cls, n: int = 2) -> "ConvexBodySpec":
        """Half-space s <= 0"""
        return cls(
            "flat",
            n,
            lambda y: 0.0,
            lambda y: np.zeros(n - 1),
            lambda y: np.zeros((n - 1, n - 1)),
            [0.0] * (n - 1),
        )

    def project(self, X: np.ndarray) -> np.ndarray:
        """Chart parameter y of the nearest boundary point to X"""
        X = np.asarray(X, dtype=float)
        x, s = X[:-1], X[-1]

        def objective(y: np.ndarray) -> float:
            return float((y - x) @ (y - x) + (self.phi(y) - s) ** 2)

        y = x.copy() if np.linalg.norm(x) < self.chart_radius else np.zeros_like(x)
        for _ in range(PROJECTION_MAX_ITERATIONS):
            r = self.phi(y) - s
            g = self.grad(y)
            gradient = 2 * (y - x) + 2 * r * g
            hessian = 2 * np.eye(y.size) + 2 * np.outer(g, g) + 2 * r * self.hess(y)
            try:
                step = -np.linalg.solve(hessian, gradient)
            except np.linalg.LinAlgError:
                step = -gradient
            if gradient @ step >= 0:
                step = -gradient
            current = objective(y)
            alpha = 1.0
            while alpha > 1e-12:
                trial = y + alpha * step
                if np.linalg.norm(trial) < self.chart_radius and objective(trial) <= current:
                    break
                alpha /= 2
            else:
                raise ProjectionError(
                    f"Line search failed projecting {X.tolist()} onto {self.name}",
                    context={"point": X.tolist()},
                )
            y = y + alpha * step
            if np.linalg.norm(alpha * step) < PROJECTION_STEP_TOLERANCE:
                return y
        raise ProjectionError(
            f"Newton projection onto {self.name} did not converge in {PROJECTION_MAX_ITERATIONS} steps",
            context={"point": X.tolist()},
        )

    def distance(self, X: np.ndarray) -> float:
        """Signed distance, positive outside the body"""
        X = np.asarray(X, dtype=float)
        y = self.project(X)
        foot = np.append(y, self.phi(y))
        gap = float(np.linalg.norm(X - foot))
        return gap if X[-1] >= self.phi(X[:-1]) else -gap


def fd_hessian(func: Callable[[np.ndarray], float], X: np.ndarray, step: float) -> np.ndarray:
    """Central second differences, mixed entries from the four-corner stencil"""
    n = X.size
    H = np.empty((n, n))
    f0 = func(X)
    eye = np.eye(n) * step
    for i in range(n):
        H[i, i] = (func(X + eye[i]) - 2 * f0 + func(X - eye[i])) / step**2
        for j in range(i + 1, n):
            H[i, j] = H[j, i] = (
                func(X + eye[i] + eye[j])
                - func(X + eye[i] - eye[j])
                - func(X - eye[i] + eye[j])
                + func(X - eye[i] - eye[j])
            ) / (4 * step**2)
    return H


def convex_distance_hessian(
    body: ConvexBodySpec,
    t: float,
    coefficients: np.ndarray | None = None,
    step: float = HESSIAN_FD_STEP,
) -> DistanceHessianReport:
    """
    Hessian of dist(., E) at X = (0, t) by three routes.

    finite_difference comes from projected distances; closed_form is
    diag(lambda_i / (1 + t lambda_i)^2, 0); direct_form is
    diag(lambda_i / (1 + t lambda_i), 0). The discrepancy is the largest
    entry of |closed_form - finite_difference|. L delta = -sum a_ii d_ii delta
    uses the finite-difference Hessian and the diagonal of the supplied
    constant matrix (identity by default).
    """
    if t <= 0:
        raise ParameterError("t must be positive", "t", t)
    n = body.n
    a = np.eye(n) if coefficients is None else np.asarray(coefficients, dtype=float)
    if a.shape != (n, n):
        raise ParameterError("Coefficient matrix must be n x n", "coefficients", a.shape)

    X = np.zeros(n)
    X[-1] = t
    fd = fd_hessian(body.distance, X, step)
    lam = np.asarray(body.curvatures, dtype=float)
    closed = np.diag(np.append(lam / (1 + t * lam) ** 2, 0.0))
    direct = np.diag(np.append(lam / (1 + t * lam), 0.0))
    discrepancy = float(np.max(np.abs(closed - fd)))

    l_delta = float(-np.sum(np.diag(a) * np.diag(fd)))
    sign = 0 if abs(l_delta) <= SIGN_TOLERANCE else int(np.sign(l_delta))
    if discrepancy > 1e-4:
        logger.warning(
            "Closed-form distance Hessian differs from finite differences by %.4g on %s",
            discrepancy,
            body.name,
        )
    return DistanceHessianReport(
        t=float(t),
        curvatures=lam.tolist(),
        finite_difference=fd.tolist(),
        closed_form=closed.tolist(),
        direct_form=direct.tolist(),
        discrepancy=discrepancy,
        l_delta=l_delta,
        l_delta_sign=sign,
    )
