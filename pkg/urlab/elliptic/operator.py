"""
Coefficient fields and the operator L = -div(D_beta^(d+1-n) A grad)
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Protocol, runtime_checkable

import numpy as np

from ..constants import COEFFICIENT_PROFILES
from ..exceptions import EllipticityError, ParameterError

logger = logging.getLogger(__name__)

# Profiles are evaluated at max(t, T_FLOOR)
T_FLOOR = 1e-300
FD_STEP = 1e-6


@runtime_checkable
class CoefficientField(Protocol):
    """Symmetric matrix field A(X) and the norm of its gradient"""

    name: str

    def matrix(self, X: np.ndarray) -> np.ndarray:
        """Shape (p, n, n)"""
        ...

    def gradient_norm(self, X: np.ndarray) -> np.ndarray:
        """|grad A|(X) = sqrt(sum_k ||d_k A||_op^2), shape (p,)"""
        ...

    def is_identity(self) -> bool: ...

    def is_diagonal(self) -> bool: ...


@dataclass
class ConstantCoefficients:
    """A(X) = A for every X; identity when no matrix is given"""

    n: int
    value: np.ndarray | None = None
    name: str = "constant"

    def __post_init__(self) -> None:
        self.value = np.eye(self.n) if self.value is None else np.asarray(self.value, dtype=float)
        if self.value.shape != (self.n, self.n):
            raise ParameterError("Coefficient matrix must be n x n", "value", self.value.shape)
        if np.allclose(self.value, np.eye(self.n)):
            self.name = "identity"

    def matrix(self, X: np.ndarray) -> np.ndarray:
        p = np.atleast_2d(X).shape[0]
        return np.broadcast_to(self.value, (p, self.n, self.n)).copy()

    def gradient_norm(self, X: np.ndarray) -> np.ndarray:
        return np.zeros(np.atleast_2d(X).shape[0])

    def is_identity(self) -> bool:
        return self.name == "identity"

    def is_diagonal(self) -> bool:
        assert self.value is not None
        return bool(np.allclose(self.value, np.diag(np.diag(self.value))))


def _profile(name: str) -> tuple[Callable[[np.ndarray], np.ndarray], Callable[[np.ndarray], np.ndarray]]:
    """Scalar profile a(t) and its derivative a'(t)"""
    if name == "identity":
        return (lambda t: np.ones_like(t)), (lambda t: np.zeros_like(t))
    if name == "log_oscillating":
        return (
            lambda t: 1.0 + 0.5 * np.sin(np.log(t)),
            lambda t: 0.5 * np.cos(np.log(t)) / t,
        )
    if name == "integrable_decay":
        return (
            lambda t: 1.0 + t / (1.0 + t),
            lambda t: 1.0 / (1.0 + t) ** 2,
        )
    raise ParameterError(
        f"Unknown coefficient profile: {name}",
        "profile",
        name,
        suggestion=f"Choose one of {', '.join(COEFFICIENT_PROFILES)}",
    )


@dataclass
class ScalarProfileCoefficients:
    """A(X) = a(t) I with t = |X[axis] - offset|"""

    n: int
    profile: str
    axis: int = -1
    offset: float = 0.0
    name: str = field(init=False)

    def __post_init__(self) -> None:
        self._a, self._da = _profile(self.profile)
        self.name = self.profile

    def _t(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.maximum(np.abs(X[:, self.axis] - self.offset), T_FLOOR)

    def matrix(self, X: np.ndarray) -> np.ndarray:
        a = self._a(self._t(X))
        return a[:, None, None] * np.eye(self.n)

    def gradient_norm(self, X: np.ndarray) -> np.ndarray:
        # d_t A = a'(t) I, whose operator norm is |a'(t)|
        return np.abs(self._da(self._t(X)))

    def is_identity(self) -> bool:
        return self.profile == "identity"

    def is_diagonal(self) -> bool:
        return True


@dataclass
class FunctionCoefficients:
    """User-supplied matrix field; gradients by centered differences"""

    n: int
    func: Callable[[np.ndarray], np.ndarray]
    name: str = "function"
    step: float = FD_STEP

    def matrix(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        A = np.asarray(self.func(X), dtype=float)
        if A.shape != (X.shape[0], self.n, self.n):
            raise ParameterError("Coefficient function must return shape (p, n, n)", "func", A.shape)
        return A

    def gradient_norm(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        total = np.zeros(X.shape[0])
        for k in range(self.n):
            e = np.zeros(self.n)
            e[k] = self.step
            dA = (self.matrix(X + e) - self.matrix(X - e)) / (2 * self.step)
            total += np.linalg.norm(dA, ord=2, axis=(1, 2)) ** 2
        return np.sqrt(total)

    def is_identity(self) -> bool:
        return False

    def is_diagonal(self) -> bool:
        return False


def make_coefficients(n: int, profile: str | None = None, **options) -> CoefficientField:
    """Coefficient field from a profile tag, or identity"""
    if profile is None or profile == "identity":
        return ConstantCoefficients(n)
    return ScalarProfileCoefficients(n, profile, **options)


@dataclass
class OperatorSpec:
    """The triple (beta, d, n) with a coefficient field"""

    beta: float
    d: float
    n: int
    coefficients: CoefficientField | None = None

    def __post_init__(self) -> None:
        if self.beta <= 0:
            raise ParameterError("beta must be positive", "beta", self.beta)
        if not 0 < self.d < self.n:
            raise ParameterError("Need 0 < d < n", "d", self.d)
        if self.coefficients is None:
            self.coefficients = ConstantCoefficients(self.n)
        if self.d < self.n - 1 and not self.coefficients.is_identity():
            raise ParameterError(
                "For d < n-1 only the identity coefficient field is admitted",
                "coefficients",
                self.coefficients.name,
            )

    @property
    def weight_exponent(self) -> float:
        """m = d + 1 - n"""
        return self.d + 1 - self.n

    @property
    def codimension_one(self) -> bool:
        return math.isclose(self.d, self.n - 1)

    def ellipticity(self, X: np.ndarray) -> tuple[float, float]:
        """
        Measured (lambda, Lambda) over the probes.

        Raises ParameterError for a non-symmetric field and
        EllipticityError when lambda <= 0.
        """
        assert self.coefficients is not None
        A = self.coefficients.matrix(X)
        asym = float(np.max(np.abs(A - np.swapaxes(A, 1, 2)))) if A.size else 0.0
        if asym > 1e-12 * max(1.0, float(np.max(np.abs(A)))):
            raise ParameterError(
                "Coefficient field is not symmetric",
                "coefficients",
                self.coefficients.name,
                context={"asymmetry": asym},
            )
        eigs = np.linalg.eigvalsh(A)
        lam = float(eigs.min())
        Lam = float(np.abs(eigs).max())
        if lam <= 0:
            raise EllipticityError(
                f"Coefficient field is not elliptic: lambda = {lam:.3e}",
                context={"lambda": lam, "Lambda": Lam},
            )
        logger.debug("Ellipticity over %d probes: lambda=%.4g Lambda=%.4g", len(A), lam, Lam)
        return lam, Lam
