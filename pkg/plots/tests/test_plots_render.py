"""Series fidelity and rendering behavior on synthesized CSV inputs."""

from __future__ import annotations

import hashlib

import numpy as np
import pytest

from bdris_rsma_plots import (AGGREGATIONS, KINDS, PlotSpec, build_figure,
                              compute_series, render)
from bdris_rsma_plots.plotting import (EPOCHS_HEADER, RESULTS_HEADER,
                                       PlotInputError)

import matplotlib.pyplot as plt


def write_results_csv(path, rows):
    """rows: (scheme, seed, n_antennas, m_elements, best_sum_rate)."""
    lines = [",".join(RESULTS_HEADER)]
    for scheme, seed, n, m, rate in rows:
        lines.append(f"{scheme}_N{n}_M{m}_s{seed},{scheme},{seed},{n},{m},2,"
                     f"{rate!r},1.0,1.0,0.5,1e-10,300,ok,12.5")
    path.write_text("\n".join(lines) + "\n")
    return path


def write_epochs_csv(path, best_series):
    lines = [",".join(EPOCHS_HEADER)]
    for epoch, best in enumerate(best_series):
        lines.append(f"{epoch},-1.0,{float(best)!r},1.0,0.1,0.0,0.0,0.0")
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def sweep_csv(tmp_path):
    rows = []
    rng = np.random.default_rng(7)
    for scheme in ("bd-ris", "diagonal-ris"):
        for m in (4, 8, 16):
            for seed in range(4):
                rows.append((scheme, seed, 4, m,
                             float(rng.uniform(1.0, 8.0))))
    return write_results_csv(tmp_path / "results.csv", rows), rows


class TestSeriesFidelity:
    @pytest.mark.parametrize("aggregation", AGGREGATIONS)
    def test_sweep_centers_equal_hand_computed_aggregates(self, sweep_csv,
                                                          tmp_path,
                                                          aggregation):
        path, rows = sweep_csv
        spec = PlotSpec(inputs=(path,), kind="sweep-m",
                        out_path=tmp_path / "out.png",
                        aggregation=aggregation)
        series = {s.label: s for s in compute_series(spec)}
        assert set(series) == {"bd-ris", "diagonal-ris"}
        agg = np.mean if aggregation == "mean" else np.median
        for scheme, s in series.items():
            assert s.x == (4, 8, 16)
            for x, center, low, high in zip(s.x, s.center, s.low, s.high):
                vals = [r[4] for r in rows if r[0] == scheme and r[3] == x]
                assert center == float(agg(vals))
                assert low == min(vals)
                assert high == max(vals)

    def test_line_data_equals_computed_series(self, sweep_csv, tmp_path):
        path, _ = sweep_csv
        spec = PlotSpec(inputs=(path,), kind="sweep-m",
                        out_path=tmp_path / "out.png")
        series = compute_series(spec)
        fig = build_figure(spec)
        try:
            lines = fig.axes[0].get_lines()
            assert len(lines) == len(series) == 2
            by_label = {ln.get_label(): ln for ln in lines}
            for s in series:
                xy = by_label[s.label].get_xydata()
                assert np.array_equal(xy[:, 0], np.array(s.x, dtype=float))
                assert np.array_equal(xy[:, 1], np.array(s.center))
                assert len(s.x) == 3
            # one min-max band per scheme (seeds differ, so bands exist)
            assert len(fig.axes[0].collections) == 2
        finally:
            plt.close(fig)

    def test_convergence_single_seed_keeps_every_epoch(self, tmp_path):
        best = np.maximum.accumulate(
            np.random.default_rng(3).uniform(1.0, 6.0, size=25))
        path = write_epochs_csv(tmp_path / "bd-ris_N4_M8_s0.csv", best)
        spec = PlotSpec(inputs=(path,), kind="convergence",
                        out_path=tmp_path / "c.png")
        (series,) = compute_series(spec)
        assert series.label == "bd-ris"
        assert series.x == tuple(range(25))
        assert np.array_equal(series.center, best)
        assert series.low == series.high == tuple(best)
        fig = build_figure(spec)
        try:
            (line,) = fig.axes[0].get_lines()
            assert line.get_xydata().shape == (25, 2)
            # equal low/high draws no band
            assert len(fig.axes[0].collections) == 0
        finally:
            plt.close(fig)

    def test_convergence_groups_by_scheme_and_tolerates_ragged_runs(
            self, tmp_path):
        rng = np.random.default_rng(11)
        traces = {}
        for scheme, seed, n_epochs in (("bd-ris", 0, 10), ("bd-ris", 1, 7),
                                       ("diagonal-ris", 0, 10)):
            best = np.maximum.accumulate(rng.uniform(0.5, 5.0, n_epochs))
            traces[scheme, seed] = best
            write_epochs_csv(tmp_path / f"{scheme}_N4_M8_s{seed}.csv", best)
        spec = PlotSpec(inputs=tuple(sorted(tmp_path.glob("*.csv"))),
                        kind="convergence", out_path=tmp_path / "c.png",
                        aggregation="median")
        series = {s.label: s for s in compute_series(spec)}
        assert set(series) == {"bd-ris", "diagonal-ris"}
        bd = series["bd-ris"]
        assert bd.x == tuple(range(10))
        for i, epoch in enumerate(bd.x):
            vals = [traces["bd-ris", s][epoch]
                    for s in (0, 1) if epoch < len(traces["bd-ris", s])]
            assert bd.center[i] == float(np.median(vals))
            assert bd.low[i] == min(vals) and bd.high[i] == max(vals)

    def test_stem_without_run_shape_becomes_its_own_label(self, tmp_path):
        path = write_epochs_csv(tmp_path / "mystery.csv", [1.0, 2.0])
        spec = PlotSpec(inputs=(path,), kind="convergence",
                        out_path=tmp_path / "c.png")
        (series,) = compute_series(spec)
        assert series.label == "mystery"


class TestRenderBehavior:
    def test_render_writes_image_and_leaves_inputs_untouched(self, sweep_csv,
                                                             tmp_path):
        path, _ = sweep_csv
        before = hashlib.sha256(path.read_bytes()).hexdigest()
        out = render(PlotSpec(inputs=(path,), kind="sweep-m",
                              out_path=tmp_path / "figs" / "m.png"))
        assert out.is_file() and out.stat().st_size > 0
        assert hashlib.sha256(path.read_bytes()).hexdigest() == before

    def test_identical_inputs_give_identical_line_data(self, sweep_csv,
                                                       tmp_path):
        path, _ = sweep_csv
        spec = PlotSpec(inputs=(path,), kind="sweep-n",
                        out_path=tmp_path / "n.png")
        figs = [build_figure(spec), build_figure(spec)]
        try:
            for first, second in zip(*(f.axes[0].get_lines() for f in figs)):
                assert np.array_equal(first.get_xydata(),
                                      second.get_xydata())
        finally:
            for f in figs:
                plt.close(f)

    def test_axis_labels_name_the_quantities(self, sweep_csv, tmp_path):
        path, _ = sweep_csv
        fig = build_figure(PlotSpec(inputs=(path,), kind="sweep-m",
                                    out_path=tmp_path / "m.png"))
        try:
            ax = fig.axes[0]
            assert ax.get_xlabel() == "surface element count"
            assert "sum rate (bits/s/Hz)" in ax.get_ylabel()
        finally:
            plt.close(fig)


class TestInputValidation:
    def test_unknown_kind_and_aggregation_are_rejected(self, tmp_path):
        with pytest.raises(PlotInputError, match="kind"):
            PlotSpec(inputs=("a.csv",), kind="scatter",
                     out_path=tmp_path / "x.png")
        with pytest.raises(PlotInputError, match="aggregation"):
            PlotSpec(inputs=("a.csv",), kind="sweep-m",
                     out_path=tmp_path / "x.png", aggregation="max")
        with pytest.raises(PlotInputError, match="at least one"):
            PlotSpec(inputs=(), kind="sweep-m", out_path=tmp_path / "x.png")

    def test_missing_column_error_lists_expected_header(self, tmp_path):
        path = tmp_path / "results.csv"
        path.write_text("scheme,seed\nbd-ris,0\n")
        spec = PlotSpec(inputs=(path,), kind="sweep-m",
                        out_path=tmp_path / "x.png")
        with pytest.raises(PlotInputError) as err:
            compute_series(spec)
        assert "m_elements" in str(err.value)
        assert ",".join(RESULTS_HEADER) in str(err.value)

    def test_headerless_and_rowless_files_are_rejected(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        spec = PlotSpec(inputs=(empty,), kind="sweep-m",
                        out_path=tmp_path / "x.png")
        with pytest.raises(PlotInputError, match="empty"):
            compute_series(spec)
        bare = tmp_path / "bare.csv"
        bare.write_text(",".join(RESULTS_HEADER) + "\n")
        with pytest.raises(PlotInputError, match="no data rows"):
            compute_series(PlotSpec(inputs=(bare,), kind="sweep-m",
                                    out_path=tmp_path / "x.png"))

    def test_rowless_epoch_logs_are_skipped_not_fatal(self, tmp_path):
        trained = write_epochs_csv(tmp_path / "bd-ris_N4_M8_s0.csv",
                                   [1.0, 2.0, 3.0])
        untrained = tmp_path / "random-phases_N4_M8_s0.csv"
        untrained.write_text(",".join(EPOCHS_HEADER) + "\n")
        spec = PlotSpec(inputs=(trained, untrained), kind="convergence",
                        out_path=tmp_path / "c.png")
        (series,) = compute_series(spec)
        assert series.label == "bd-ris" and len(series.x) == 3
        with pytest.raises(PlotInputError, match="no data rows in any"):
            compute_series(PlotSpec(inputs=(untrained,), kind="convergence",
                                    out_path=tmp_path / "c.png"))

    def test_exported_contract_names(self):
        assert KINDS == ("convergence", "sweep-m", "sweep-n")
        assert AGGREGATIONS == ("mean", "median")
