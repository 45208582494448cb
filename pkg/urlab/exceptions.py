"""
Exception hierarchy for urlab

Every error raised by the laboratory derives from LabError and carries a
context mapping, an optional suggestion and an error code. Two families
map onto CLI exit codes: validation problems (exit 2) and numerical
failures (exit 3).
"""

import json
from datetime import datetime, timezone

UTC = timezone.utc
from typing import Any

from .constants import EXIT_NUMERICAL, EXIT_VALIDATION


class LabError(Exception):
    """Base exception for all urlab errors"""

    exit_code: int = EXIT_NUMERICAL

    def __init__(
        self,
        message: str,
        context: dict[str, Any] | None = None,
        suggestion: str | None = None,
        error_code: str | None = None,
    ):
        super().__init__(message)
        self.message = message
        self.context = dict(context or {})
        self.suggestion = suggestion
        self.error_code = error_code
        self.timestamp = datetime.now(UTC)

    def to_dict(self) -> dict[str, Any]:
        """Convert exception to dictionary for serialization"""
        return {
            "error": self.message,
            "type": self.__class__.__name__,
            "code": self.error_code,
            "context": self.context,
            "suggestion": self.suggestion,
            "timestamp": self.timestamp.isoformat(),
        }

    def to_json(self) -> str:
        """Convert exception to JSON string"""
        return json.dumps(self.to_dict(), indent=2, default=str)

    def __str__(self) -> str:
        parts = [self.message]
        if self.error_code:
            parts.append(f"Code: {self.error_code}")
        if self.suggestion:
            parts.append(f"Suggestion: {self.suggestion}")
        return " | ".join(parts)


# Validation family


class ValidationError(LabError):
    """Raised when user input or configuration is invalid"""

    exit_code = EXIT_VALIDATION


class ConfigError(ValidationError):
    """Raised for malformed or inconsistent experiment configuration"""

    def __init__(self, message: str, config_key: str | None = None, **kwargs: Any):
        if config_key:
            kwargs.setdefault("context", {})["config_key"] = config_key
        super().__init__(message, **kwargs)


class ParameterError(ValidationError):
    """Raised when a numeric parameter is outside its admissible range"""

    def __init__(
        self,
        message: str,
        parameter: str | None = None,
        value: Any = None,
        **kwargs: Any,
    ):
        context = kwargs.setdefault("context", {})
        if parameter:
            context["parameter"] = parameter
            context["value"] = value
        super().__init__(message, **kwargs)


class DimensionError(ValidationError):
    """Raised when d, n or array shapes are inconsistent"""

    def __init__(
        self, message: str, d: float | None = None, n: int | None = None, **kwargs: Any
    ):
        context = kwargs.setdefault("context", {})
        if d is not None:
            context["d"] = d
        if n is not None:
            context["n"] = n
        super().__init__(message, **kwargs)


# Numerical family


class NumericalError(LabError):
    """Base class for failures of a numerical procedure"""

    exit_code = EXIT_NUMERICAL


class ResolutionError(NumericalError):
    """Raised when a request is finer than the sample or grid can resolve"""


class SearchFailureError(NumericalError):
    """Raised when a grid search finds no admissible point"""

    def __init__(self, message: str, resolution: float | None = None, **kwargs: Any):
        if resolution is not None:
            kwargs.setdefault("context", {})["resolution"] = resolution
        super().__init__(message, **kwargs)


class ConnectivityError(NumericalError):
    """Raised when a Harnack chain cannot be constructed"""


class FitError(NumericalError):
    """Raised when too few atoms support a plane fit"""

    def __init__(
        self, message: str, atoms: int | None = None, required: int | None = None, **kwargs: Any
    ):
        context = kwargs.setdefault("context", {})
        if atoms is not None:
            context["atoms"] = atoms
            context["required"] = required
        super().__init__(message, **kwargs)


class EllipticityError(NumericalError):
    """Raised when the coefficient field fails to be elliptic on the grid"""


class ConvergenceError(NumericalError):
    """Raised when an iterative solve hits its iteration cap"""

    def __init__(
        self,
        message: str,
        residual_history: list[float] | None = None,
        **kwargs: Any,
    ):
        self.residual_history = list(residual_history or [])
        context = kwargs.setdefault("context", {})
        if self.residual_history:
            context["iterations"] = len(self.residual_history)
            context["final_residual"] = self.residual_history[-1]
        super().__init__(message, **kwargs)


class PlacementError(NumericalError):
    """Raised when a pole is not an admissible interior node"""


class TrivialityError(NumericalError):
    """Raised when boundary data vanish identically"""


class PositivityError(NumericalError):
    """Raised when a solution is nonpositive where positivity is required"""


class DomainError(NumericalError):
    """Raised when a field has no zero set or a domain is empty"""


class ProjectionError(NumericalError):
    """Raised when the Newton projection onto a chart does not converge"""


class StageError(LabError):
    """Raised by the experiment driver, naming the failing stage"""

    def __init__(self, stage: str, cause: LabError):
        super().__init__(
            f"Stage '{stage}' failed: {cause.message}",
            context={"stage": stage, **cause.context},
            suggestion=cause.suggestion,
            error_code=cause.error_code,
        )
        self.stage = stage
        self.cause = cause
        self.exit_code = cause.exit_code
