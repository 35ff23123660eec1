"""Series extraction and figure rendering for experiment CSVs.

Three figure kinds cover the simulator's outputs:

- ``convergence``: per-run epoch logs (one CSV per seed); x = epoch
  index, y = best-so-far sum rate.
- ``sweep-m``: a results table; x = surface element count.
- ``sweep-n``: a results table; x = receive antenna count.

Series are grouped per scheme and aggregated over seeds (mean or
median) with a min-max band across seeds. All computation is pure and
deterministic: the same input files always produce the same plotted
series, and inputs are only ever read.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

KIND_CONVERGENCE = "convergence"
KIND_SWEEP_M = "sweep-m"
KIND_SWEEP_N = "sweep-n"
KINDS = (KIND_CONVERGENCE, KIND_SWEEP_M, KIND_SWEEP_N)

AGG_MEAN = "mean"
AGG_MEDIAN = "median"
AGGREGATIONS = (AGG_MEAN, AGG_MEDIAN)

# CSV contracts of the simulator's emitters (column names as written).
RESULTS_HEADER = ("run_id", "scheme", "seed", "n_antennas", "m_elements",
                  "n_groups", "best_sum_rate", "rate_ue1", "rate_ue2",
                  "initial_sum_rate", "max_residual", "epochs_run", "status",
                  "wall_time_seconds")
EPOCHS_HEADER = ("epoch", "mean_loss", "best_sum_rate", "rate_term",
                 "threshold_term", "norm_term", "surface_term", "power_term")

_RATE_LABEL = "sum rate (bits/s/Hz)"
_AXIS_LABELS = {
    KIND_CONVERGENCE: ("epoch index", f"best {_RATE_LABEL}"),
    KIND_SWEEP_M: ("surface element count", None),
    KIND_SWEEP_N: ("receive antenna count", None),
}

_RUN_ID_SHAPE = re.compile(r"(?P<scheme>.+)_N\d+_M\d+_s\d+")


class PlotInputError(ValueError):
    """Unusable plot input: unknown kind/aggregation or bad CSV shape."""


@dataclass(frozen=True)
class PlotSpec:
    """One figure request: input CSVs, figure kind, output image path."""

    inputs: tuple
    kind: str
    out_path: Path
    aggregation: str = AGG_MEAN

    def __post_init__(self):
        inputs = self.inputs
        if isinstance(inputs, (str, Path)):
            inputs = (inputs,)
        object.__setattr__(self, "inputs", tuple(Path(p) for p in inputs))
        object.__setattr__(self, "out_path", Path(self.out_path))
        if not self.inputs:
            raise PlotInputError("at least one input CSV is required")
        if self.kind not in KINDS:
            raise PlotInputError(f"unknown plot kind {self.kind!r}; expected "
                                 f"one of {', '.join(KINDS)}")
        if self.aggregation not in AGGREGATIONS:
            raise PlotInputError(f"unknown aggregation {self.aggregation!r}; "
                                 f"expected one of {', '.join(AGGREGATIONS)}")


@dataclass(frozen=True)
class Series:
    """One plotted line: x positions, aggregated centers, min-max band."""

    label: str
    x: tuple
    center: tuple
    low: tuple
    high: tuple


def read_rows(path, required, expected_header, allow_empty=False):
    """Rows of one CSV as dicts, after validating the required columns."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise PlotInputError(f"{path} is empty; expected header: "
                                 f"{','.join(expected_header)}") from None
        missing = [c for c in required if c not in header]
        if missing:
            raise PlotInputError(
                f"{path} is missing column(s) {', '.join(missing)}; "
                f"expected header: {','.join(expected_header)}")
        rows = [dict(zip(header, row)) for row in reader if row]
    if not rows and not allow_empty:
        raise PlotInputError(f"{path} has a header but no data rows")
    return rows


def _aggregate(values, aggregation):
    arr = np.asarray(values, dtype=float)
    center = float(np.mean(arr) if aggregation == AGG_MEAN else np.median(arr))
    return center, float(np.min(arr)), float(np.max(arr))


def _series_label(stem):
    """Scheme name for grouping; run-id shaped stems share their scheme."""
    match = _RUN_ID_SHAPE.fullmatch(stem)
    return match.group("scheme") if match else stem


def convergence_series(paths, aggregation):
    """Per-scheme best-so-far traces aggregated per epoch across files.

    Epoch logs with a header but no rows (schemes that do not train,
    e.g. one-shot baselines) contribute nothing and are skipped.
    """
    groups = {}
    for path in paths:
        rows = read_rows(path, required=("epoch", "best_sum_rate"),
                         expected_header=EPOCHS_HEADER, allow_empty=True)
        if not rows:
            continue
        trace = [(int(row["epoch"]), float(row["best_sum_rate"]))
                 for row in rows]
        groups.setdefault(_series_label(Path(path).stem), []).append(trace)
    if not groups:
        raise PlotInputError("no data rows in any input epoch log")

    out = []
    for label, traces in groups.items():
        by_epoch = {}
        for trace in traces:
            for epoch, value in trace:
                by_epoch.setdefault(epoch, []).append(value)
        xs = sorted(by_epoch)
        agg = [_aggregate(by_epoch[e], aggregation) for e in xs]
        out.append(Series(label=label, x=tuple(xs),
                          center=tuple(a[0] for a in agg),
                          low=tuple(a[1] for a in agg),
                          high=tuple(a[2] for a in agg)))
    return out


def sweep_series(paths, axis_column, aggregation):
    """Per-scheme best-sum-rate series over a swept dimension column."""
    groups = {}
    for path in paths:
        rows = read_rows(path,
                         required=("scheme", axis_column, "best_sum_rate"),
                         expected_header=RESULTS_HEADER)
        for row in rows:
            key = (row["scheme"], int(row[axis_column]))
            groups.setdefault(key, []).append(float(row["best_sum_rate"]))

    out = []
    for scheme in sorted({scheme for scheme, _ in groups}):
        xs = sorted(x for s, x in groups if s == scheme)
        agg = [_aggregate(groups[scheme, x], aggregation) for x in xs]
        out.append(Series(label=scheme, x=tuple(xs),
                          center=tuple(a[0] for a in agg),
                          low=tuple(a[1] for a in agg),
                          high=tuple(a[2] for a in agg)))
    return out


def compute_series(spec):
    """The plotted series for a spec, independent of any rendering."""
    if spec.kind == KIND_CONVERGENCE:
        return convergence_series(spec.inputs, spec.aggregation)
    axis = "m_elements" if spec.kind == KIND_SWEEP_M else "n_antennas"
    return sweep_series(spec.inputs, axis, spec.aggregation)


def build_figure(spec):
    """Matplotlib figure for a spec; the caller owns (and closes) it."""
    series = compute_series(spec)
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    marker = None if spec.kind == KIND_CONVERGENCE else "o"
    for s in series:
        ax.plot(s.x, s.center, marker=marker, label=s.label)
        if any(lo != hi for lo, hi in zip(s.low, s.high)):
            ax.fill_between(s.x, s.low, s.high, alpha=0.2)
    xlabel, ylabel = _AXIS_LABELS[spec.kind]
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel or f"{spec.aggregation} best {_RATE_LABEL}")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    return fig


def render(spec):
    """Write the figure image for a spec; returns the output path."""
    fig = build_figure(spec)
    try:
        spec.out_path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(spec.out_path)
    finally:
        plt.close(fig)
    return spec.out_path
