"""JSON records of computed values and deterministic serialization helpers."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

__all__ = ["Record", "to_jsonable", "dumps"]


def to_jsonable(obj: Any) -> Any:
    """Plain Python version of ``obj``: arrays become lists, non-finite floats strings."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def dumps(obj: Any) -> str:
    """Stable JSON text; insertion order of keys is kept."""
    return json.dumps(to_jsonable(obj), indent=2) + "\n"


@dataclass
class Record:
    """One computed quantity together with how it was obtained."""

    formula: str
    inputs: dict
    value: Any
    method: str
    tolerance: float | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "formula": self.formula,
            "inputs": to_jsonable(self.inputs),
            "value": to_jsonable(self.value),
            "method": self.method,
            "tolerance": self.tolerance,
        }
        out.update(to_jsonable(self.extra))
        return out
