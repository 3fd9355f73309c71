"""Flat result records produced by every check."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np


def digest(obj: Any) -> str:
    """Short stable digest of an input description."""
    text = json.dumps(_plain(obj), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def _plain(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, complex):
        return [round(obj.real, 15), round(obj.imag, 15)]
    if isinstance(obj, float):
        return round(obj, 15)
    if isinstance(obj, (np.floating, np.integer)):
        return _plain(obj.item())
    if isinstance(obj, np.complexfloating):
        return _plain(complex(obj))
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


@dataclass
class CheckReport:
    """Outcome of one verification: a residual compared against a tolerance."""

    name: str
    anchor: str
    residual: float
    tolerance: float
    passed: bool
    inputs: dict[str, Any] = field(default_factory=dict)
    values: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_residual(cls, name: str, anchor: str, residual: float, tolerance: float, **kw) -> "CheckReport":
        residual = float(residual)
        return cls(name, anchor, residual, float(tolerance), bool(residual <= tolerance), **kw)

    def __bool__(self) -> bool:
        return self.passed

    def record(self) -> dict[str, Any]:
        """Flat, JSON-serialisable row."""
        return {
            "name": self.name,
            "anchor": self.anchor,
            "inputs_digest": digest(self.inputs),
            "residual": float(self.residual),
            "tolerance": float(self.tolerance),
            "passed": bool(self.passed),
        }
