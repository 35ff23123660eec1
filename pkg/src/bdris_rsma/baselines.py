"""Reference schemes the meta-learned optimizer is judged against.

Three baselines with increasing strength of guarantee: the same
meta-learning pipeline restricted to a diagonal surface (isolates the
value of element interconnections), the best of a batch of random
feasible solutions (sanity floor), and exhaustive enumeration of
quantized diagonal phase patterns at tiny scale (an independent
near-optimum for optimizer-quality checks).
"""

import itertools
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .metaopt import run_meta_training
from .sysmodel import (Architecture, Solution, random_symmetric_unitary,
                       score_solution)


class BaselineScheme(str, Enum):
    DIAGONAL = "diagonal-meta"
    RANDOM_PHASES = "random-phases"
    GRID_ORACLE = "grid-oracle"


@dataclass
class BaselineResult:
    """Outcome of one baseline evaluation.

    sum_rate re-scores solution exactly; evaluations counts candidate
    solutions examined.
    """

    scheme: BaselineScheme
    sum_rate: float
    solution: Solution
    evaluations: int


def diagonal_variant(system):
    """The same scenario with the surface restricted to a diagonal
    (per-element phase) architecture."""
    return replace(system, architecture=Architecture.SINGLE_CONNECTED,
                   group_sizes=(1,) * system.m_elements)


def run_diagonal_baseline(ch, config, rng, trace=None):
    """Meta-training with the surface restricted to a diagonal architecture.

    Everything else (networks, hyperparameters, loss) is shared with the
    interconnected runs, so differences isolate the surface architecture.
    """
    diag_config = replace(config, system=diagonal_variant(config.system))
    return run_meta_training(ch, diag_config, rng, trace=trace)


def matched_filter_solution(ch, system, phi):
    """Full-budget solution with beamformers matched to the effective
    channels through the given realized scattering matrix."""
    g1 = ch.ue1_bs + ch.ris_bs @ (phi @ ch.ue1_ris)
    g2 = ch.ue2_bs + ch.ris_bs @ (phi @ ch.ue2_ris)
    w1 = g1 / np.linalg.norm(g1)
    w2 = g2 / np.linalg.norm(g2)
    powers = np.array([system.max_power_ue1_w / 2.0,
                       system.max_power_ue1_w / 2.0,
                       system.max_power_ue2_w])
    return Solution(w11=w1, w12=w1.copy(), w2=w2, powers=powers, scattering=phi)


def _random_feasible_scattering(system, rng):
    blocks = [random_symmetric_unitary(rng, int(s)) for s in system.group_sizes]
    phi = np.zeros((system.m_elements, system.m_elements), dtype=complex)
    lo = 0
    for block in blocks:
        hi = lo + block.shape[0]
        phi[lo:hi, lo:hi] = block
        lo = hi
    return phi


def random_phases_baseline(ch, config, rng, trials):
    """Best of `trials` random feasible solutions.

    Each trial draws symmetric-unitary blocks for the configured
    architecture and pairs them with matched-filter beamformers and
    full-budget powers.
    """
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    system = config.system
    best_rate, best_sol = -np.inf, None
    for _ in range(trials):
        phi = _random_feasible_scattering(system, rng)
        sol = matched_filter_solution(ch, system, phi)
        _, _, total, _ = score_solution(sol, ch, system)
        if total > best_rate:
            best_rate, best_sol = total, sol
    return BaselineResult(scheme=BaselineScheme.RANDOM_PHASES,
                          sum_rate=best_rate, solution=best_sol,
                          evaluations=trials)


def grid_oracle_tiny(ch, config, levels):
    """Exhaustive search over quantized per-element phases.

    Restricted to diagonal surfaces of at most two elements with at most
    16 levels so the search stays exact and fast; beamformers are
    matched filters and powers full budget, so the search space is the
    phase grid alone.
    """
    system = config.system
    if system.architecture is not Architecture.SINGLE_CONNECTED:
        raise ValueError("the exhaustive oracle only covers diagonal surfaces")
    if system.m_elements > 2 or levels > 16:
        raise ValueError(f"oracle limited to M <= 2 and 16 levels, got "
                         f"M={system.m_elements}, levels={levels}")
    if levels < 1:
        raise ValueError(f"levels must be at least 1, got {levels}")
    if levels ** system.m_elements > 1_000_000:
        raise ValueError("oracle too large")
    grid = 2.0 * np.pi * np.arange(levels) / levels
    best_rate, best_sol = -np.inf, None
    count = 0
    for phases in itertools.product(grid, repeat=system.m_elements):
        phi = np.diag(np.exp(1j * np.asarray(phases)))
        sol = matched_filter_solution(ch, system, phi)
        _, _, total, _ = score_solution(sol, ch, system)
        count += 1
        if total > best_rate:
            best_rate, best_sol = total, sol
    return BaselineResult(scheme=BaselineScheme.GRID_ORACLE,
                          sum_rate=best_rate, solution=best_sol,
                          evaluations=count)
