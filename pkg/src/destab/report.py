from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass
class Report:
    """Named residuals compared against one threshold, plus boolean checks."""

    name: str
    residuals: dict[str, float] = field(default_factory=dict)
    checks: dict[str, bool] = field(default_factory=dict)
    threshold: float = 0.0
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v <= self.threshold for v in self.residuals.values()) and all(
            self.checks.values()
        )

    @property
    def worst(self) -> float:
        return max(self.residuals.values(), default=0.0)

    def failures(self) -> list[str]:
        bad = [k for k, v in self.residuals.items() if not v <= self.threshold]
        return bad + [k for k, ok in self.checks.items() if not ok]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "threshold": self.threshold,
            "residuals": {k: float(v) for k, v in self.residuals.items()},
            "checks": {k: bool(v) for k, v in self.checks.items()},
            "details": _plain(self.details),
        }

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{self.name}: {status} (worst residual {self.worst:.2e}, threshold {self.threshold:.1e})"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, int, str)) or obj is None:
        return obj
    try:
        return float(obj)
    except (TypeError, ValueError):
        return str(obj)
