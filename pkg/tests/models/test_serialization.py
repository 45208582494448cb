"""
Tests for serialization utilities
"""

import json
from datetime import datetime, timezone

UTC = timezone.utc
from enum import Enum
from pathlib import Path

import numpy as np
import pytest

from urlab.models import ModelEncoder, SolveReport, to_builtin


class Kind(Enum):
    FLAT = "flat"


@pytest.mark.unit
class TestModelEncoder:
    """Test cases for ModelEncoder"""

    def test_numpy_values(self):
        payload = {"a": np.arange(3), "b": np.float64(0.5), "c": np.int32(7), "d": np.bool_(True)}
        assert json.loads(json.dumps(payload, cls=ModelEncoder)) == {"a": [0, 1, 2], "b": 0.5, "c": 7, "d": True}

    def test_paths_datetimes_enums(self):
        stamp = datetime(2024, 1, 2, 3, 4, 5, tzinfo=UTC)
        encoded = json.loads(json.dumps({"p": Path("runs/x"), "t": stamp, "k": Kind.FLAT}, cls=ModelEncoder))
        assert encoded == {"p": "runs/x", "t": stamp.isoformat(), "k": "flat"}

    def test_models_use_to_dict(self):
        report = SolveReport(residual=1e-9, weighted_residual=2e-9, iterations=4, solver="cg-jacobi", tolerance=1e-8)
        encoded = json.loads(json.dumps({"solve": report}, cls=ModelEncoder))
        assert encoded["solve"]["iterations"] == 4

    def test_unknown_objects_rejected(self):
        with pytest.raises(TypeError):
            json.dumps({"x": object()}, cls=ModelEncoder)


@pytest.mark.unit
class TestHelpers:
    def test_to_builtin_nested(self):
        value = to_builtin({"x": [np.float32(1.5), {"y": np.array([[1, 2]])}], "t": (1, 2)})
        assert value == {"x": [1.5, {"y": [[1, 2]]}], "t": [1, 2]}

    def test_report_json_round_trip(self):
        report = SolveReport(residual=1e-9, weighted_residual=2e-9, iterations=4, solver="cg-jacobi", tolerance=1e-8)
        restored = SolveReport.from_json(report.to_json(indent=2))
        assert restored == report
