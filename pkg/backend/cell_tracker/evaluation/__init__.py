"""Performance evaluation."""

from cell_tracker.evaluation.gospa import GospaResult, gospa, time_averaged_gospa

__all__ = ["GospaResult", "gospa", "time_averaged_gospa"]
