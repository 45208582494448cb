"""
Tests for the urlab exception hierarchy
"""

import json

import pytest

from urlab.constants import EXIT_NUMERICAL, EXIT_VALIDATION
from urlab.exceptions import (
    ConfigError,
    ConvergenceError,
    DimensionError,
    FitError,
    LabError,
    NumericalError,
    ParameterError,
    PlacementError,
    SearchFailureError,
    StageError,
    ValidationError,
)


@pytest.mark.unit
class TestLabError:
    """Base error fields and rendering"""

    def test_fields(self):
        error = LabError("solve failed", context={"h": 0.1}, suggestion="refine", error_code="E1")
        assert error.message == "solve failed"
        assert error.context == {"h": 0.1}
        assert error.suggestion == "refine"
        assert error.error_code == "E1"

    def test_str(self):
        assert str(LabError("plain")) == "plain"
        error = LabError("solve failed", suggestion="refine", error_code="E1")
        assert str(error) == "solve failed | Code: E1 | Suggestion: refine"

    def test_to_json(self):
        data = json.loads(ConfigError("bad key", config_key="grid.h").to_json())
        assert data["type"] == "ConfigError"
        assert data["context"] == {"config_key": "grid.h"}
        assert "timestamp" in data


@pytest.mark.unit
class TestExitCodes:
    @pytest.mark.parametrize("cls", [ValidationError, ConfigError, ParameterError, DimensionError])
    def test_validation_family(self, cls):
        assert cls("x").exit_code == EXIT_VALIDATION

    @pytest.mark.parametrize("cls", [NumericalError, PlacementError, FitError, SearchFailureError])
    def test_numerical_family(self, cls):
        assert cls("x").exit_code == EXIT_NUMERICAL

    def test_stage_error_takes_cause_code(self):
        cause = ConfigError("no tags", config_key="functional.tags", suggestion="add a tag")
        error = StageError("functional", cause)

        assert error.exit_code == EXIT_VALIDATION
        assert error.stage == "functional"
        assert error.cause is cause
        assert error.context == {"stage": "functional", "config_key": "functional.tags"}
        assert error.suggestion == "add a tag"
        assert error.message == "Stage 'functional' failed: no tags"


@pytest.mark.unit
class TestContextFields:
    def test_parameter(self):
        assert ParameterError("bad", "h", 2.0).context == {"parameter": "h", "value": 2.0}
        assert ParameterError("bad").context == {}

    def test_dimension(self):
        assert DimensionError("bad", d=1.5, n=2).context == {"d": 1.5, "n": 2}

    def test_fit(self):
        assert FitError("few atoms", atoms=1, required=2).context == {"atoms": 1, "required": 2}

    def test_search_resolution(self):
        assert SearchFailureError("none", resolution=0.01).context == {"resolution": 0.01}

    def test_convergence_history(self):
        error = ConvergenceError("cap reached", residual_history=[1.0, 0.5, 0.25])
        assert error.residual_history == [1.0, 0.5, 0.25]
        assert error.context == {"iterations": 3, "final_residual": 0.25}
