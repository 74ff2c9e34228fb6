"""Integration tests for structured logging configuration."""

import json
import logging

import numpy as np
import pytest

from cell_tracker.core.logging import (
    LogLevel,
    get_logger,
    safe_fallback_handler,
    setup_logging,
)


class TestLoggingIntegration:
    """Integration tests for structured logging functionality."""

    def test_setup_logging_json_format(self, capsys: pytest.CaptureFixture[str]) -> None:
        """
        Test that JSON logs carry the event, its context and the app name.

        Scenario:
            Configure JSON logging and log one event with numpy context

        Expected:
            One parseable JSON line on stderr; stdout untouched
        """
        setup_logging(log_level=LogLevel.INFO, log_format="json")
        logger = get_logger("test_json")

        logger.info("Replicate finished", replicate=3, gospa=np.float64(1.5))

        captured = capsys.readouterr()
        assert captured.out == ""
        record = json.loads(captured.err.strip().splitlines()[-1])
        assert record["event"] == "Replicate finished"
        assert record["replicate"] == 3
        assert record["app"] == "pmb-cell-tracker"
        assert record["level"] == "info"

    def test_setup_logging_standard_format(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test that standard logs go to stderr with their context fields."""
        setup_logging(log_level=LogLevel.INFO, log_format="standard")
        logger = get_logger("test_standard")

        logger.info("Experiment started", n_runs=5)

        captured = capsys.readouterr()
        assert "Experiment started" in captured.err
        assert "n_runs" in captured.err
        assert captured.out == ""

    def test_get_logger_returns_logger(self) -> None:
        setup_logging(log_level=LogLevel.INFO)

        logger = get_logger("test_module")

        assert hasattr(logger, "info")
        assert hasattr(logger, "debug")

    def test_logger_respects_log_level(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test that events below the configured level are dropped."""
        setup_logging(log_level=LogLevel.WARNING, log_format="standard")
        logger = get_logger("test_level")

        logger.info("hidden event")
        logger.warning("visible event")

        err = capsys.readouterr().err
        assert "hidden event" not in err
        assert "visible event" in err
        assert logging.getLogger().getEffectiveLevel() == logging.WARNING

    def test_logger_handles_exceptions(self, capsys: pytest.CaptureFixture[str]) -> None:
        setup_logging(log_level=LogLevel.ERROR, log_format="json")
        logger = get_logger("test_exception")

        try:
            raise ValueError("bad threshold")
        except ValueError:
            logger.exception("Unexpected failure")

        err = capsys.readouterr().err
        assert "Unexpected failure" in err
        assert "bad threshold" in err

    def test_fallback_handler_renders_arrays(self) -> None:
        assert safe_fallback_handler(np.array([1, 2])) == "array([1, 2])"
