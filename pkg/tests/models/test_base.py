"""
Tests for base model classes
"""

import json
from dataclasses import dataclass, field

import numpy as np
import pytest

from urlab.exceptions import ValidationError
from urlab.models.base import SerializableModel, ValidatedModel


@dataclass
class Marker(SerializableModel):
    x: float
    label: str
    coords: list[float] = field(default_factory=list)


@pytest.mark.unit
class TestSerializableModel:
    """Test cases for SerializableModel"""

    def test_non_dataclass_cannot_convert(self):
        """to_dict needs dataclass fields"""

        class Loose(SerializableModel):
            pass

        with pytest.raises(TypeError):
            Loose().to_dict()

    def test_numpy_values_become_builtins(self):
        model = Marker(x=np.float64(0.5), label="pole", coords=np.array([0.0, 1.0]))  # type: ignore[arg-type]
        data = model.to_dict()

        assert data == {"x": 0.5, "label": "pole", "coords": [0.0, 1.0]}
        assert type(data["x"]) is float

    def test_json_round_trip(self):
        model = Marker(x=0.25, label="a", coords=[1.0])
        assert json.loads(model.to_json()) == model.to_dict()
        assert Marker.from_json(model.to_json()) == model

    def test_from_dict_ignores_unknown_keys(self):
        """Manifest sections may carry keys the model does not know"""
        model = Marker.from_dict({"x": 1.0, "label": "b", "written_by": "0.2.0"})
        assert model == Marker(x=1.0, label="b")


@pytest.mark.unit
class TestValidatedModel:
    """Test cases for ValidatedModel"""

    @dataclass
    class Radius(ValidatedModel):
        r: float

        def validate(self) -> None:
            if self.r <= 0:
                raise ValidationError("Radius must be positive")

    def test_validate_is_abstract(self):
        with pytest.raises(TypeError):
            ValidatedModel()  # type: ignore[abstract]

    def test_validation_runs_on_construction(self):
        assert self.Radius(0.25).r == 0.25
        with pytest.raises(ValidationError):
            self.Radius(0.0)

    def test_validation_on_from_dict(self):
        with pytest.raises(ValidationError):
            self.Radius.from_dict({"r": -1.0})
