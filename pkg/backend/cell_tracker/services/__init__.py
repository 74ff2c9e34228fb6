"""Services: filter construction and the Monte-Carlo experiment harness."""

from cell_tracker.services.filter_factory import create_filter
from cell_tracker.services.harness import ExperimentReport, ExperimentSpec, run

__all__ = ["ExperimentReport", "ExperimentSpec", "create_filter", "run"]
