"""Reference schemes: diagonal-surface meta-training, random feasible
surfaces with matched filters, and the tiny exhaustive phase-grid oracle."""

import numpy as np
import pytest

from bdris_rsma.baselines import (
    BaselineScheme,
    diagonal_variant,
    grid_oracle_tiny,
    matched_filter_solution,
    random_phases_baseline,
    run_diagonal_baseline,
)
from bdris_rsma.channel import ChannelSet
from bdris_rsma.metaopt import MetaConfig, RunConfig, run_meta_training
from bdris_rsma.sysmodel import (
    Architecture,
    SystemConfig,
    score_solution,
)


def make_system(n=2, m=2, arch=Architecture.SINGLE_CONNECTED, groups=None,
                noise=1e-3, **kw):
    groups = groups if groups is not None else ((1,) * m)
    return SystemConfig(n_antennas=n, m_elements=m, architecture=arch,
                        group_sizes=groups, noise_power_w=noise, **kw)


def make_channels(rng, n, m):
    z = lambda *s: rng.standard_normal(s) + 1j * rng.standard_normal(s)
    return ChannelSet(ue1_bs=z(n), ue2_bs=z(n), ris_bs=z(n, m),
                      ue1_ris=z(m), ue2_ris=z(m))


def tiny_meta(**kw):
    defaults = dict(inner_iterations=2, outer_iterations=2, epochs=3,
                    hidden_units=16)
    defaults.update(kw)
    return MetaConfig(**defaults)


class TestDiagonalBaseline:
    def test_variant_restricts_architecture_only(self):
        sys = make_system(n=3, m=4, arch=Architecture.GROUP_CONNECTED,
                          groups=(2, 2), noise=5e-4)
        diag = diagonal_variant(sys)
        assert diag.architecture is Architecture.SINGLE_CONNECTED
        assert diag.group_sizes == (1, 1, 1, 1)
        assert diag.n_antennas == 3 and diag.m_elements == 4
        assert diag.noise_power_w == 5e-4
        assert diag.max_power_ue1_w == sys.max_power_ue1_w

    def test_matches_direct_single_connected_run(self):
        rng = np.random.default_rng(30)
        ch = make_channels(rng, 2, 4)
        grouped = make_system(n=2, m=4, arch=Architecture.GROUP_CONNECTED,
                              groups=(2, 2))
        single = make_system(n=2, m=4)
        meta = tiny_meta()
        a = run_diagonal_baseline(ch, RunConfig(system=grouped, meta=meta),
                                  np.random.default_rng(3))
        b = run_meta_training(ch, RunConfig(system=single, meta=meta),
                              np.random.default_rng(3))
        assert a.best_sum_rate == b.best_sum_rate
        assert a.projected_sum_rate == b.projected_sum_rate
        assert a.per_epoch_loss == b.per_epoch_loss
        np.testing.assert_array_equal(a.best_solution.scattering,
                                      b.best_solution.scattering)

    def test_single_element_group_run_equals_diagonal(self):
        # with one 1x1 block the interconnected architecture collapses
        # to the per-element one
        rng = np.random.default_rng(31)
        ch = make_channels(rng, 2, 1)
        grouped = make_system(n=2, m=1, arch=Architecture.GROUP_CONNECTED,
                              groups=(1,))
        meta = tiny_meta(epochs=4)
        a = run_meta_training(ch, RunConfig(system=grouped, meta=meta),
                              np.random.default_rng(4))
        b = run_diagonal_baseline(ch, RunConfig(system=grouped, meta=meta),
                                  np.random.default_rng(4))
        assert a.best_sum_rate == pytest.approx(b.best_sum_rate, rel=1e-12)
        assert a.projected_sum_rate == pytest.approx(b.projected_sum_rate,
                                                     rel=1e-12)
        for x, y in zip(a.per_epoch_loss, b.per_epoch_loss):
            assert x == pytest.approx(y, rel=1e-12)

    def test_result_is_a_training_result(self):
        rng = np.random.default_rng(32)
        ch = make_channels(rng, 2, 2)
        sys = make_system(n=2, m=2, arch=Architecture.GROUP_CONNECTED,
                          groups=(2,))
        result = run_diagonal_baseline(ch, RunConfig(system=sys, meta=tiny_meta()),
                                       np.random.default_rng(5))
        assert result.status == "ok"
        phi = result.best_solution.scattering
        np.testing.assert_allclose(phi, np.diag(np.diag(phi)), atol=0)
        assert np.allclose(np.abs(np.diag(phi)), 1.0, atol=1e-12)


class TestMatchedFilter:
    def test_beamformers_align_with_effective_channels(self):
        rng = np.random.default_rng(33)
        sys = make_system(n=3, m=2)
        ch = make_channels(rng, 3, 2)
        phi = np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, 2)))
        sol = matched_filter_solution(ch, sys, phi)
        g1 = ch.ue1_bs + ch.ris_bs @ (phi @ ch.ue1_ris)
        g2 = ch.ue2_bs + ch.ris_bs @ (phi @ ch.ue2_ris)
        np.testing.assert_allclose(sol.w11, g1 / np.linalg.norm(g1), atol=1e-15)
        np.testing.assert_allclose(sol.w12, sol.w11, atol=0)
        np.testing.assert_allclose(sol.w2, g2 / np.linalg.norm(g2), atol=1e-15)
        np.testing.assert_allclose(
            sol.powers, [sys.max_power_ue1_w / 2, sys.max_power_ue1_w / 2,
                         sys.max_power_ue2_w], atol=0)

    def test_matched_filter_maximizes_own_stream_gain(self):
        rng = np.random.default_rng(34)
        sys = make_system(n=4, m=2)
        ch = make_channels(rng, 4, 2)
        phi = np.eye(2, dtype=complex)
        sol = matched_filter_solution(ch, sys, phi)
        g1 = ch.ue1_bs + ch.ris_bs @ (phi @ ch.ue1_ris)
        best = np.abs(np.vdot(sol.w11, g1)) ** 2
        for _ in range(50):
            w = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            w /= np.linalg.norm(w)
            assert np.abs(np.vdot(w, g1)) ** 2 <= best + 1e-12


class TestRandomPhases:
    def test_single_trial_counts_one_evaluation(self):
        rng = np.random.default_rng(35)
        sys = make_system(n=2, m=2, arch=Architecture.GROUP_CONNECTED,
                          groups=(2,))
        ch = make_channels(rng, 2, 2)
        res = random_phases_baseline(ch, RunConfig(system=sys, meta=tiny_meta()),
                                     np.random.default_rng(6), trials=1)
        assert res.evaluations == 1
        assert res.scheme is BaselineScheme.RANDOM_PHASES

    def test_rejects_nonpositive_trials(self):
        rng = np.random.default_rng(36)
        sys = make_system(n=2, m=2)
        ch = make_channels(rng, 2, 2)
        with pytest.raises(ValueError, match="at least 1"):
            random_phases_baseline(ch, RunConfig(system=sys, meta=tiny_meta()),
                                   np.random.default_rng(7), trials=0)

    def test_more_trials_never_hurt(self):
        rng = np.random.default_rng(37)
        sys = make_system(n=2, m=4, arch=Architecture.GROUP_CONNECTED,
                          groups=(2, 2))
        ch = make_channels(rng, 2, 4)
        cfg = RunConfig(system=sys, meta=tiny_meta())
        one = random_phases_baseline(ch, cfg, np.random.default_rng(8), trials=1)
        many = random_phases_baseline(ch, cfg, np.random.default_rng(8), trials=25)
        assert many.sum_rate >= one.sum_rate

    def test_solutions_are_feasible_and_rescore_exactly(self):
        rng = np.random.default_rng(38)
        for groups, arch in (((2, 2), Architecture.GROUP_CONNECTED),
                             ((1, 1, 1), Architecture.SINGLE_CONNECTED),
                             ((4,), Architecture.FULLY_CONNECTED)):
            m = sum(groups)
            sys = make_system(n=2, m=m, arch=arch, groups=groups)
            ch = make_channels(rng, 2, m)
            res = random_phases_baseline(ch, RunConfig(system=sys, meta=tiny_meta()),
                                         rng, trials=5)
            r1, r2, total, report = score_solution(res.solution, ch, sys)
            assert total == pytest.approx(res.sum_rate, rel=1e-12)
            assert report.max_feasibility_violation() <= 1e-8
            phi = np.asarray(res.solution.scattering)
            np.testing.assert_allclose(phi, phi.T, atol=1e-12)

    def test_deterministic_under_seed(self):
        rng = np.random.default_rng(39)
        sys = make_system(n=2, m=2, arch=Architecture.GROUP_CONNECTED,
                          groups=(2,))
        ch = make_channels(rng, 2, 2)
        cfg = RunConfig(system=sys, meta=tiny_meta())
        a = random_phases_baseline(ch, cfg, np.random.default_rng(9), trials=8)
        b = random_phases_baseline(ch, cfg, np.random.default_rng(9), trials=8)
        assert a.sum_rate == b.sum_rate
        np.testing.assert_array_equal(a.solution.scattering, b.solution.scattering)


class TestGridOracle:
    def test_single_element_grid_matches_manual_enumeration(self):
        rng = np.random.default_rng(40)
        sys = make_system(n=2, m=1)
        ch = make_channels(rng, 2, 1)
        res = grid_oracle_tiny(ch, RunConfig(system=sys, meta=tiny_meta()),
                               levels=4)
        assert res.evaluations == 4
        best = -np.inf
        for k in range(4):
            phi = np.diag([np.exp(1j * 2 * np.pi * k / 4)])
            sol = matched_filter_solution(ch, sys, phi)
            _, _, total, _ = score_solution(sol, ch, sys)
            best = max(best, total)
        assert res.sum_rate == pytest.approx(best, rel=1e-15)

    def test_two_element_grid_size(self):
        rng = np.random.default_rng(41)
        sys = make_system(n=2, m=2)
        ch = make_channels(rng, 2, 2)
        res = grid_oracle_tiny(ch, RunConfig(system=sys, meta=tiny_meta()),
                               levels=16)
        assert res.evaluations == 256
        assert res.scheme is BaselineScheme.GRID_ORACLE

    def test_refining_the_grid_never_hurts(self):
        rng = np.random.default_rng(42)
        sys = make_system(n=2, m=2)
        ch = make_channels(rng, 2, 2)
        cfg = RunConfig(system=sys, meta=tiny_meta())
        coarse = grid_oracle_tiny(ch, cfg, levels=4)
        fine = grid_oracle_tiny(ch, cfg, levels=16)   # 16 refines the 4-grid
        assert fine.sum_rate >= coarse.sum_rate

    def test_oracle_dominates_every_grid_point(self):
        rng = np.random.default_rng(43)
        sys = make_system(n=2, m=2)
        ch = make_channels(rng, 2, 2)
        cfg = RunConfig(system=sys, meta=tiny_meta())
        oracle = grid_oracle_tiny(ch, cfg, levels=16)
        grid = 2 * np.pi * np.arange(16) / 16
        for _ in range(50):
            phases = rng.choice(grid, size=2)
            sol = matched_filter_solution(ch, sys, np.diag(np.exp(1j * phases)))
            _, _, total, _ = score_solution(sol, ch, sys)
            assert total <= oracle.sum_rate + 1e-12

    def test_solution_phases_lie_on_grid(self):
        rng = np.random.default_rng(44)
        sys = make_system(n=2, m=2)
        ch = make_channels(rng, 2, 2)
        res = grid_oracle_tiny(ch, RunConfig(system=sys, meta=tiny_meta()),
                               levels=8)
        angles = np.angle(np.diag(np.asarray(res.solution.scattering)))
        steps = np.mod(angles, 2 * np.pi) / (2 * np.pi / 8)
        assert np.allclose(steps, np.round(steps), atol=1e-9)
        r1, r2, total, report = score_solution(res.solution, ch, sys)
        assert total == pytest.approx(res.sum_rate, rel=1e-15)
        assert report.max_feasibility_violation() <= 1e-10

    def test_rejects_interconnected_surfaces(self):
        rng = np.random.default_rng(45)
        sys = make_system(n=2, m=2, arch=Architecture.GROUP_CONNECTED,
                          groups=(2,))
        ch = make_channels(rng, 2, 2)
        with pytest.raises(ValueError, match="only covers diagonal"):
            grid_oracle_tiny(ch, RunConfig(system=sys, meta=tiny_meta()),
                             levels=4)

    def test_rejects_oversized_searches(self):
        rng = np.random.default_rng(46)
        ch3 = make_channels(rng, 2, 3)
        sys3 = make_system(n=2, m=3)
        with pytest.raises(ValueError, match="M <= 2 and 16 levels"):
            grid_oracle_tiny(ch3, RunConfig(system=sys3, meta=tiny_meta()),
                             levels=4)
        sys2 = make_system(n=2, m=2)
        ch2 = make_channels(rng, 2, 2)
        with pytest.raises(ValueError, match="M <= 2 and 16 levels"):
            grid_oracle_tiny(ch2, RunConfig(system=sys2, meta=tiny_meta()),
                             levels=17)
        with pytest.raises(ValueError, match="at least 1"):
            grid_oracle_tiny(ch2, RunConfig(system=sys2, meta=tiny_meta()),
                             levels=0)
