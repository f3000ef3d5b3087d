"""Exception hierarchy shared by the rass modules."""
from __future__ import annotations

from pathlib import Path


class RassError(Exception):
    """Base class for every error raised by rass."""


class ParameterError(RassError, ValueError):
    """A numeric parameter is outside its admissible range."""


class ShapeError(RassError, ValueError):
    """Array or sequence dimensions do not agree."""


class SamplingError(RassError, ValueError):
    """A scenario draw cannot be satisfied by the error pool."""


class ConfigError(RassError, ValueError):
    """User-facing configuration or input-file error."""

    def __init__(self, message: str, path: Path | None = None):
        if path is not None:
            message = f"{path}: {message}"
        super().__init__(message)
        self.path = path


class SolverError(RassError, RuntimeError):
    """The optimizer could not produce a usable solution."""


class SimulationError(SolverError):
    """A rolling window failed; the message names the window."""

    def __init__(self, message: str, window: int):
        super().__init__(f"window t={window}: {message}")
        self.window = window


class ReportError(RassError, OSError):
    """Writing an output file failed."""

    def __init__(self, message: str, path: Path):
        super().__init__(f"failed to write {path}: {message}")
        self.path = path
