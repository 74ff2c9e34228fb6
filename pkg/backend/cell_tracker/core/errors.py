"""Custom exception classes and error reporting utilities for the tracker.

Provides:
- Custom exception classes (CellTrackerError hierarchy)
- CLI exit codes and machine-readable error codes
- Structured error objects printed by the command-line front end
"""

from typing import Any


class ExitCode:
    """Process exit codes of the ``cell-tracker`` command."""

    OK = 0
    RUNTIME_FAILURE = 1
    CONFIG_ERROR = 2


class ErrorCode:
    """
    Machine-readable error codes.

    Attached to structured error output so wrappers (batch schedulers,
    notebooks driving the CLI) can branch on the failure kind.
    """

    CONFIGURATION_ERROR = "CONFIGURATION_ERROR"
    PARSE_ERROR = "PARSE_ERROR"
    INVARIANT_VIOLATION = "INVARIANT_VIOLATION"
    ASSOCIATION_ERROR = "ASSOCIATION_ERROR"
    IO_ERROR = "IO_ERROR"
    INTERNAL_ERROR = "INTERNAL_ERROR"


def build_structured_error(
    code: str,
    message: str,
    details: dict[str, Any] | None = None,
) -> dict[str, Any]:
    """
    Build a structured error object following a consistent format.

    Args:
        code: Error code from ErrorCode class
        message: Human-readable error message
        details: Optional additional details (e.g., line number, offending key)

    Returns:
        Structured error dict: {"error": {"code": "...", "message": "...", ...}}

    Examples:
        >>> build_structured_error(ErrorCode.PARSE_ERROR, "bad row", {"line": 4})
        {'error': {'code': 'PARSE_ERROR', 'message': 'bad row', 'details': {'line': 4}}}
    """
    error_obj: dict[str, Any] = {
        "code": code,
        "message": message,
    }

    if details:
        error_obj["details"] = details

    return {"error": error_obj}


class CellTrackerError(Exception):
    """Base exception class for all tracker errors."""

    code: str = ErrorCode.INTERNAL_ERROR

    def __init__(self, message: str, **kwargs: Any) -> None:
        """
        Initialize exception with message and optional context.

        Args:
            message: Error message
            **kwargs: Additional context information
        """
        super().__init__(message)
        self.message = message
        self.context = kwargs

    def __str__(self) -> str:
        """Return string representation of error."""
        return self.message

    def to_structured(self) -> dict[str, Any]:
        """Render this error with ``build_structured_error``."""
        return build_structured_error(self.code, self.message, self.context or None)


class ConfigurationError(CellTrackerError):
    """Raised when a configuration file, flag or parameter set is invalid."""

    code = ErrorCode.CONFIGURATION_ERROR


class GridError(CellTrackerError):
    """Raised when a cell index or grid geometry is invalid."""

    code = ErrorCode.CONFIGURATION_ERROR


class MeasurementDomainError(CellTrackerError):
    """Raised when a density is evaluated outside its support (z <= eta)."""

    pass


class AssociationError(CellTrackerError):
    """Raised for non-finite association weights or inconsistent marginals."""

    code = ErrorCode.ASSOCIATION_ERROR


class AssociationSizeError(AssociationError):
    """Raised when an exact enumeration exceeds its size guard."""

    pass


class InvariantViolationError(CellTrackerError):
    """Raised when a filter invariant (existence range, normalization, mass) breaks."""

    code = ErrorCode.INVARIANT_VIOLATION


class ScenarioError(CellTrackerError):
    """Raised when ground truth is queried outside its defined steps."""

    pass


class ParseError(CellTrackerError):
    """Raised when an input CSV cannot be parsed; carries the 1-based line number."""

    code = ErrorCode.PARSE_ERROR

    def __init__(self, message: str, line: int | None = None, **kwargs: Any) -> None:
        super().__init__(message, line=line, **kwargs)
        self.line = line


class HarnessError(CellTrackerError):
    """Raised when an experiment cannot write its outputs."""

    code = ErrorCode.IO_ERROR
