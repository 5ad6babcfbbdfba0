# errors.py
# Exception types shared by every module; the CLI maps them to exit codes.

from typing import Any, Dict, Optional


class ToolkitError(Exception):
    """Base class for all toolkit failures."""


class ConfigurationError(ToolkitError, ValueError):
    """Invalid parameters, schema violations, mismatched grids."""


class IntegrationError(ToolkitError, RuntimeError):
    """Propagation failed a runtime check (norm drift)."""

    def __init__(self, message: str, diagnostic: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostic = dict(diagnostic or {})


class UnsupportedScheduleError(ToolkitError, NotImplementedError):
    """Closed form only exists for step schedules."""


class UndefinedFractionError(ToolkitError, ArithmeticError):
    """Quadrant fractions of an empty bath."""


class ExportError(ToolkitError, OSError):
    """IO failure while writing or reading an artifact."""


def error_record(exc: BaseException, command: str = "") -> Dict[str, Any]:
    """Machine-readable failure record written by the CLI."""
    rec: Dict[str, Any] = {
        "error": type(exc).__name__,
        "message": str(exc),
        "command": command,
    }
    diag = getattr(exc, "diagnostic", None)
    if diag:
        rec["diagnostic"] = diag
    return rec
