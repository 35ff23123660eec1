"""Figure fidelity against the simulator's real sweep outputs.

Criterion: every figure kind renders from the acceptance-sweep CSVs
without error, and each rendered sweep series equals aggregates
recomputed here by hand, to float precision. Skips (with a pointer)
when the sweeps have not been run yet.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
import pytest

import matplotlib.pyplot as plt

from bdris_rsma_plots import PlotSpec, build_figure, compute_series, render

ROOT = Path(__file__).resolve().parents[2]
ELEMENT_DIR = ROOT / "results" / "acceptance" / "element_sweep"
ANTENNA_DIR = ROOT / "results" / "acceptance" / "antenna_sweep"
FIGURES_DIR = ROOT / "results" / "acceptance" / "figures"


def hand_aggregates(results_csv, axis_column):
    """scheme -> (xs, mean best rates), straight from the CSV text."""
    groups = {}
    with results_csv.open(newline="") as fh:
        for row in csv.DictReader(fh):
            key = (row["scheme"], int(row[axis_column]))
            groups.setdefault(key, []).append(float(row["best_sum_rate"]))
    out = {}
    for scheme in sorted({s for s, _ in groups}):
        xs = sorted(x for s, x in groups if s == scheme)
        out[scheme] = (xs, [float(np.mean(groups[scheme, x])) for x in xs])
    return out


def assert_lines_match_hand_aggregates(spec, axis_column):
    expected = hand_aggregates(spec.inputs[0], axis_column)
    fig = build_figure(spec)
    try:
        lines = {ln.get_label(): ln for ln in fig.axes[0].get_lines()}
        assert sorted(lines) == sorted(expected)
        for scheme, (xs, centers) in expected.items():
            xy = lines[scheme].get_xydata()
            assert list(xy[:, 0]) == [float(x) for x in xs]
            assert list(xy[:, 1]) == centers, (
                f"{scheme} series differs from hand-computed means")
    finally:
        plt.close(fig)
    return {scheme: len(xs) for scheme, (xs, _) in expected.items()}


def test_all_figure_kinds_render_from_sweep_outputs(record_secondary,
                                                    mark_secondary_ran):
    element_results = ELEMENT_DIR / "results.csv"
    antenna_results = ANTENNA_DIR / "results.csv"
    if not (element_results.is_file() and antenna_results.is_file()):
        record_secondary(
            "plot-fidelity", None,
            "sweep outputs not found; run the simulator acceptance suite "
            "(tests/test_acceptance.py) first")
        pytest.skip(f"missing {element_results} or {antenna_results}")

    element_epochs = sorted(ELEMENT_DIR.glob("epochs/*_M8_s*.csv"))
    antenna_epochs = sorted(ANTENNA_DIR.glob("epochs/*_N2_M16_s*.csv"))
    assert element_epochs and antenna_epochs, "sweeps emitted no epoch logs"

    specs = {
        "convergence_element_m8.png": PlotSpec(
            inputs=tuple(element_epochs), kind="convergence",
            out_path=FIGURES_DIR / "convergence_element_m8.png"),
        "convergence_antenna_n2.png": PlotSpec(
            inputs=tuple(antenna_epochs), kind="convergence",
            out_path=FIGURES_DIR / "convergence_antenna_n2.png"),
        "element_sweep.png": PlotSpec(
            inputs=(element_results,), kind="sweep-m",
            out_path=FIGURES_DIR / "element_sweep.png"),
        "antenna_sweep.png": PlotSpec(
            inputs=(antenna_results,), kind="sweep-n",
            out_path=FIGURES_DIR / "antenna_sweep.png"),
    }

    rendered = []
    for name, spec in specs.items():
        out = render(spec)
        assert out.is_file() and out.stat().st_size > 0, name
        rendered.append(name)

    # convergence: one line per trained scheme (the one-shot baseline's
    # rowless epoch logs are skipped), one point per epoch
    for spec in (specs["convergence_element_m8.png"],
                 specs["convergence_antenna_n2.png"]):
        series = compute_series(spec)
        assert {s.label for s in series} == {"bd-ris", "diagonal-ris"}
        assert all(len(s.x) == 300 for s in series)

    m_points = assert_lines_match_hand_aggregates(
        specs["element_sweep.png"], "m_elements")
    n_points = assert_lines_match_hand_aggregates(
        specs["antenna_sweep.png"], "n_antennas")
    assert all(v == 3 for v in m_points.values()), m_points
    assert all(v == 3 for v in n_points.values()), n_points

    ok = len(rendered) == 4
    detail = ("4 figure kinds rendered; sweep lines equal hand-computed "
              "means exactly")
    assert record_secondary("plot-fidelity", ok, detail), detail
