"""
urlab Data Models

Typed configuration and report models with validation and serialization.
"""

from .base import SerializableModel, ValidatedModel
from .experiment import EXPERIMENT_MODES, ExperimentConfig
from .reports import (
    AhlforsReport,
    BallValue,
    BetaReport,
    CaccioppoliReport,
    CarlesonReport,
    DistanceHessianReport,
    DKPReport,
    EikonalReport,
    GradientBoundReport,
    SolveReport,
    TrendSummary,
    UniformityReport,
)
from .serialization import ModelEncoder, to_builtin

__all__ = [
    # Base classes
    "SerializableModel",
    "ValidatedModel",
    # Configuration
    "EXPERIMENT_MODES",
    "ExperimentConfig",
    # Reports
    "AhlforsReport",
    "BallValue",
    "BetaReport",
    "CaccioppoliReport",
    "CarlesonReport",
    "DKPReport",
    "DistanceHessianReport",
    "EikonalReport",
    "GradientBoundReport",
    "SolveReport",
    "TrendSummary",
    "UniformityReport",
    # Serialization utilities
    "ModelEncoder",
    "to_builtin",
]
