"""
Core utilities shared by every package.

- Structured logging (structlog, JSON or console output)
- Exception hierarchy with machine-readable codes and CLI exit codes
- CSV readers and writers for frames, ground truth, estimates and reports

Example:
    >>> from cell_tracker.core import get_logger, CellTrackerError
    >>> logger = get_logger(__name__)
    >>> logger.info("Experiment started", n_runs=10)
"""

from cell_tracker.core.errors import CellTrackerError, ErrorCode, ExitCode
from cell_tracker.core.logging import get_logger, setup_logging

__all__ = ["CellTrackerError", "ErrorCode", "ExitCode", "get_logger", "setup_logging"]
