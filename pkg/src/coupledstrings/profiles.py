"""Built-in initial profiles on the stretched coordinate."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidParamsError

KINDS = ("sech2", "gaussian", "zero")


@dataclass(frozen=True)
class Profile:
    """amplitude * shape((xi - shift)/scale); shape is sech^2, a unit gaussian, or zero."""

    kind: str
    amplitude: float = 1.0
    scale: float = 1.0
    shift: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParamsError(f"unknown profile kind {self.kind!r}, expected one of {KINDS}")
        if self.scale <= 0 or not np.isfinite(self.scale):
            raise InvalidParamsError(f"profile scale must be positive, got {self.scale!r}")
        if not np.isfinite(self.amplitude) or not np.isfinite(self.shift):
            raise InvalidParamsError("profile amplitude and shift must be finite")

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        if self.kind == "zero" or self.amplitude == 0.0:
            return np.zeros_like(xi)
        arg = (xi - self.shift) / self.scale
        if self.kind == "sech2":
            return self.amplitude / np.cosh(arg) ** 2
        return self.amplitude * np.exp(-0.5 * arg**2)

    def support_radius(self, rel_tol: float = 1e-8) -> float:
        """Radius beyond which |profile| < rel_tol * max|profile| (0 for zero profiles)."""
        if self.kind == "zero" or self.amplitude == 0.0:
            return 0.0
        if self.kind == "sech2":
            r = self.scale * math.acosh(rel_tol**-0.5)
        else:
            r = self.scale * math.sqrt(-2.0 * math.log(rel_tol))
        return r + abs(self.shift)
