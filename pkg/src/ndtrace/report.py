"""Verification report records shared by the identity checkers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_FLOOR = 1e-300


@dataclass
class VerificationReport:
    """Paired left/right values of one identity with error metadata."""

    identity: str
    z: object               # complex, or tuple of complex for multi-point checks
    lhs: complex
    rhs: complex
    abs_err: float = 0.0
    rel_err: float = 0.0
    truncation_estimate: float = 0.0
    runtime: float = 0.0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.lhs = complex(self.lhs)
        self.rhs = complex(self.rhs)
        self.abs_err = float(abs(self.lhs - self.rhs))
        self.rel_err = self.abs_err / max(abs(self.lhs), abs(self.rhs), _FLOOR)
        for name in ("abs_err", "rel_err", "truncation_estimate"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"report field {name} is not finite")
        if not (np.isfinite(self.lhs) and np.isfinite(self.rhs)):
            raise ValueError("report sides must be finite")
