"""Error types shared across the package.

Every failure raised by the library derives from SimulationError so callers
(and the CLI) can catch one base class and still branch on the specific kind.
Errors raised inside time loops carry the failing time in `.time`.
"""

from __future__ import annotations


class SimulationError(Exception):
    """Base class for all library errors."""

    def __init__(self, message: str, time: float | None = None):
        self.message = message
        self.time = time
        super().__init__(message)

    def __str__(self) -> str:
        if self.time is None:
            return self.message
        return f"{self.message} (at t={self.time:.9g})"

    @property
    def kind(self) -> str:
        return _KINDS.get(type(self), "error")


class InvalidParamsError(SimulationError):
    pass


class OutOfDomainError(SimulationError):
    pass


class FluxSyntaxError(SimulationError):
    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (column {position})"
        super().__init__(message)


class UnknownSymbolError(FluxSyntaxError):
    pass


class NonzeroAtOriginError(SimulationError):
    pass


class NonDecayingProfileError(SimulationError):
    pass


class BlowUpError(SimulationError):
    pass


class StepTooLargeError(SimulationError):
    pass


class GridTooSmallError(SimulationError):
    pass


class WrapAroundError(SimulationError):
    pass


class CoverageError(SimulationError):
    pass


class GridMismatchError(SimulationError):
    pass


class InsufficientSnapshotsError(SimulationError):
    pass


class UndersampledTrajectoryError(SimulationError):
    pass


class ConfigError(SimulationError):
    pass


_KINDS = {
    InvalidParamsError: "invalid-params",
    OutOfDomainError: "out-of-domain",
    FluxSyntaxError: "syntax-error",
    UnknownSymbolError: "unknown-symbol",
    NonzeroAtOriginError: "nonzero-at-origin",
    NonDecayingProfileError: "non-decaying-profile",
    BlowUpError: "blow-up",
    StepTooLargeError: "step-too-large",
    GridTooSmallError: "grid-too-small",
    WrapAroundError: "wrap-around",
    CoverageError: "coverage-error",
    GridMismatchError: "grid-mismatch",
    InsufficientSnapshotsError: "insufficient-snapshots",
    UndersampledTrajectoryError: "undersampled-trajectory",
    ConfigError: "config-error",
}
