"""Structured results returned by the verification helpers."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any


@dataclass
class Report:
    identity: str
    passed: bool
    cases: int = 0
    max_residual: float = 0.0
    witness: dict[str, Any] | None = None
    details: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        return asdict(self)

    def __bool__(self) -> bool:
        return self.passed


def residual_of(value) -> float:
    """Largest absolute coefficient of a number or multivector."""
    max_abs = getattr(value, "max_abs", None)
    if callable(max_abs):
        return float(max_abs())
    return float(abs(value))
