"""
Filters: cell measurement model, association solvers and the PMB filter family.

    PmbCmFilter: thresholded cell measurements
    PmbPointFilter: point measurements with (PMB-AM) or without (PMB) amplitude
"""

from cell_tracker.filters.pmb import Estimate, PmbFilter
from cell_tracker.filters.pmb_cm import PmbCmFilter
from cell_tracker.filters.pmb_point import PmbPointFilter

__all__ = ["Estimate", "PmbCmFilter", "PmbFilter", "PmbPointFilter"]
