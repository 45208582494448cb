"""
Serialization utilities for data models

Provides a JSON encoder that understands numpy scalars and arrays,
paths, datetimes and dataclasses.
"""

import dataclasses
import json
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np


class ModelEncoder(json.JSONEncoder):
    """Custom JSON encoder for data models"""

    def default(self, obj: Any) -> Any:
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        elif isinstance(obj, np.integer):
            return int(obj)
        elif isinstance(obj, np.floating):
            return float(obj)
        elif isinstance(obj, np.bool_):
            return bool(obj)
        elif isinstance(obj, datetime):
            return obj.isoformat()
        elif isinstance(obj, Path):
            return str(obj)
        elif isinstance(obj, Enum):
            return obj.value
        elif hasattr(obj, "to_dict"):
            return obj.to_dict()
        elif dataclasses.is_dataclass(obj) and not isinstance(obj, type):
            return dataclasses.asdict(obj)
        return super().default(obj)


def to_builtin(value: Any) -> Any:
    """
    Recursively convert numpy values to builtin Python types.

    Args:
        value: Arbitrary nested structure

    Returns:
        Structure made of dicts, lists, floats, ints, bools, strings and None
    """
    return json.loads(json.dumps(value, cls=ModelEncoder))
