"""Figure rendering for experiment CSV outputs.

Consumes only the CSV files the simulator emits (results tables, per-run
epoch logs); produces static images. Strictly read-only on its inputs.
"""

from .plotting import (AGGREGATIONS, KINDS, PlotSpec, Series, build_figure,
                       compute_series, render)

__all__ = ["AGGREGATIONS", "KINDS", "PlotSpec", "Series", "build_figure",
           "compute_series", "render"]
