"""Offline analysis of replanning benchmark results.

Reads the benchmark's results CSV and trace JSONL files; produces median
replanning-time tables, campaign box-plot/success figures, and utility-map
heatmaps. No runtime coupling to the planner package.
"""

from .heatmap import load_trace, plot_trace_heatmaps
from .plots import plot_campaign
from .tables import (
    EXPECTED_COLUMNS,
    AnalysisError,
    MedianTable,
    load_results,
    median_table,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisError",
    "EXPECTED_COLUMNS",
    "MedianTable",
    "load_results",
    "load_trace",
    "median_table",
    "plot_campaign",
    "plot_trace_heatmaps",
]
