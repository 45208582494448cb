"""
Base classes for urlab data models

Reports and configurations are dataclasses. Their dictionary form is
built field by field with numpy values converted to builtins, so every
model can go into a manifest unchanged.
"""

import dataclasses
import json
from abc import ABC, abstractmethod
from typing import Any, TypeVar

T = TypeVar("T", bound="SerializableModel")


class SerializableModel(ABC):
    """Dataclass model with a JSON-ready dictionary form"""

    def to_dict(self) -> dict[str, Any]:
        """
        Field-wise dictionary with builtin values

        Raises:
            TypeError: If the model is not a dataclass instance
        """
        from .serialization import to_builtin

        return to_builtin({f.name: getattr(self, f.name) for f in dataclasses.fields(self)})  # type: ignore[arg-type]

    @classmethod
    def from_dict(cls: type[T], data: dict[str, Any]) -> T:
        """
        Create instance from dictionary

        Keys that are not fields of the model are ignored, so a manifest
        section written by a newer version still loads.
        """
        if dataclasses.is_dataclass(cls):
            names = {f.name for f in dataclasses.fields(cls) if f.init}
            data = {k: v for k, v in data.items() if k in names}
        return cls(**data)

    def to_json(self, indent: int | None = None) -> str:
        from .serialization import ModelEncoder

        return json.dumps(self.to_dict(), cls=ModelEncoder, indent=indent)

    @classmethod
    def from_json(cls: type[T], json_str: str) -> T:
        return cls.from_dict(json.loads(json_str))


class ValidatedModel(SerializableModel):
    """Model that checks its own constraints after construction"""

    def __post_init__(self) -> None:
        self.validate()

    @abstractmethod
    def validate(self) -> None:
        """
        Raises:
            ValidationError: If model data violates constraints
        """
