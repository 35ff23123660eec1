"""Uplink rate model for two rate-splitting users behind a reconfigurable surface.

User 1 splits its message into two streams (s11 decoded first, s12
decoded last); user 2 sends a single stream decoded in between. The base
station applies one receive beamformer per stream and cancels every
stream already decoded, so the decoding order s11 -> s2 -> s12 fixes
which interference terms survive in each rate.

The surface is described by its scattering matrix. Three wiring
architectures are supported: every element on its own (diagonal matrix),
all elements interconnected (full symmetric unitary matrix), and groups
of elements interconnected (block-diagonal symmetric unitary). During
optimization the matrix is parameterized by phase angles; symmetry is
exact by construction because tied entries share one angle.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
import scipy.linalg

from . import autodiff as ad
from .autodiff import Var


class Architecture(str, Enum):
    SINGLE_CONNECTED = "single-connected"
    GROUP_CONNECTED = "group-connected"
    FULLY_CONNECTED = "fully-connected"


class MagnitudeMode(str, Enum):
    """Entry magnitude of a phase-parameterized block.

    SCALED keeps each entry at 1/sqrt(block size), so a block can satisfy
    the unitarity constraint exactly. UNIT keeps entries at modulus one,
    which for blocks larger than 1x1 makes exact unitarity unreachable
    (every column then has squared norm equal to the block size); it is
    retained for the literal-update mode.
    """

    SCALED = "scaled-modulus"
    UNIT = "unit-modulus"


@dataclass(frozen=True)
class SystemConfig:
    """Dimensions, constraints and budgets of one scenario."""

    n_antennas: int
    m_elements: int
    architecture: Architecture
    group_sizes: tuple
    magnitude_mode: MagnitudeMode = MagnitudeMode.SCALED
    max_power_ue1_w: float = 10.0 ** ((23.0 - 30.0) / 10.0)
    max_power_ue2_w: float = 10.0 ** ((23.0 - 30.0) / 10.0)
    rate_threshold_ue1: float = 1.0
    rate_threshold_ue2: float = 1.0
    noise_power_w: float = 1e-11

    def __post_init__(self):
        if self.n_antennas < 1 or self.m_elements < 1:
            raise ValueError(f"dimensions must be at least 1, got "
                             f"N={self.n_antennas}, M={self.m_elements}")
        if any(s < 1 for s in self.group_sizes):
            raise ValueError(f"group sizes must be positive, got {self.group_sizes}")
        if sum(self.group_sizes) != self.m_elements:
            raise ValueError(f"group sizes {tuple(self.group_sizes)} sum to "
                             f"{sum(self.group_sizes)}, expected {self.m_elements}")
        if self.architecture is Architecture.SINGLE_CONNECTED and \
                any(s != 1 for s in self.group_sizes):
            raise ValueError("single-connected surfaces use groups of size 1")
        if self.architecture is Architecture.FULLY_CONNECTED and \
                len(self.group_sizes) != 1:
            raise ValueError("fully-connected surfaces form a single group")


def block_scale(size, magnitude_mode):
    if magnitude_mode is MagnitudeMode.SCALED:
        return 1.0 / np.sqrt(size)
    return 1.0


@dataclass
class ScatteringMatrix:
    """Phase-parameterized block-diagonal scattering matrix.

    phases holds one array (or Var) per interconnected group. With
    symmetric storage (the default) each group keeps its row-major
    upper-triangle angles, one shared angle per tied entry pair. With
    full_matrix_phases (literal-update mode) each group keeps a full
    square angle matrix and symmetry is no longer structural. A
    single-connected surface stores one flat vector of per-element
    angles instead.
    """

    architecture: Architecture
    group_sizes: tuple
    phases: list
    magnitude_mode: MagnitudeMode = MagnitudeMode.SCALED
    full_matrix_phases: bool = False

    @property
    def m_elements(self):
        return int(sum(self.group_sizes))

    @classmethod
    def random_init(cls, architecture, group_sizes, magnitude_mode, rng,
                    full_matrix_phases=False):
        """Angles uniform in [0, 2*pi); shapes follow the storage mode."""
        group_sizes = tuple(int(s) for s in group_sizes)
        if architecture is Architecture.SINGLE_CONNECTED:
            phases = [rng.uniform(0.0, 2.0 * np.pi, size=len(group_sizes))]
        elif full_matrix_phases:
            phases = [rng.uniform(0.0, 2.0 * np.pi, size=(s, s)) for s in group_sizes]
        else:
            phases = [rng.uniform(0.0, 2.0 * np.pi, size=s * (s + 1) // 2)
                      for s in group_sizes]
        return cls(architecture=architecture, group_sizes=group_sizes,
                   phases=phases, magnitude_mode=magnitude_mode,
                   full_matrix_phases=full_matrix_phases)

    def realize_blocks(self):
        """Per-group complex blocks as tape nodes (single node list for
        a single-connected surface: the diagonal as a vector)."""
        if self.architecture is Architecture.SINGLE_CONNECTED:
            return [ad.exp_j(ad.as_var(self.phases[0]))]
        blocks = []
        for size, theta in zip(self.group_sizes, self.phases):
            theta = ad.as_var(theta)
            if not self.full_matrix_phases:
                theta = ad.scatter_symmetric(theta, size)
            block = ad.exp_j(theta)
            scale = block_scale(size, self.magnitude_mode)
            if scale != 1.0:
                block = ad.mul(block, scale)
            blocks.append(block)
        return blocks

    def realize(self):
        """Full m x m scattering matrix as one tape node."""
        blocks = self.realize_blocks()
        if self.architecture is Architecture.SINGLE_CONNECTED:
            return ad.diag_embed(blocks[0])
        if len(blocks) == 1:
            return blocks[0]
        return ad.block_diag_embed(blocks)

    def detached(self):
        return replace(self, phases=[np.array(p.data if isinstance(p, Var) else p,
                                              copy=True) for p in self.phases])


@dataclass
class Solution:
    """One candidate operating point: beamformers, powers, surface state.

    Fields hold tape nodes while being optimized and plain arrays
    otherwise. powers is ordered [p11, p12, p2]; scattering is either a
    ScatteringMatrix or an already-realized (M, M) matrix.
    """

    w11: object
    w12: object
    w2: object
    powers: object
    scattering: object

    def detached(self):
        def val(x):
            return np.array(x.data if isinstance(x, Var) else x, copy=True)
        sc = self.scattering
        sc = sc.detached() if isinstance(sc, ScatteringMatrix) else val(sc)
        return Solution(w11=val(self.w11), w12=val(self.w12), w2=val(self.w2),
                        powers=val(self.powers), scattering=sc)


def realized_scattering(scattering):
    """ScatteringMatrix, array or Var -> (M, M) tape node."""
    if isinstance(scattering, ScatteringMatrix):
        return scattering.realize()
    return ad.as_var(scattering)


def effective_channel(direct, ris_bs, scattering, ue_ris):
    """Receive-side channel of one user: direct + surface cascade."""
    phi = realized_scattering(scattering)
    reflected = ad.matmul(ad.as_var(ris_bs), ad.matmul(phi, ad.as_var(ue_ris)))
    return ad.add(ad.as_var(direct), reflected)


def _effective_pair(sol, ch):
    phi = realized_scattering(sol.scattering)
    g1 = ad.add(ad.as_var(ch.ue1_bs), ad.matmul(ad.as_var(ch.ris_bs),
                                                ad.matmul(phi, ad.as_var(ch.ue1_ris))))
    g2 = ad.add(ad.as_var(ch.ue2_bs), ad.matmul(ad.as_var(ch.ris_bs),
                                                ad.matmul(phi, ad.as_var(ch.ue2_ris))))
    return g1, g2


def rates_from_gains(gains, powers, noise_power_w):
    """Per-stream rates from precomputed beamformer output powers.

    gains is the 5-tuple of squared filter outputs
    (|w11^H g1|^2, |w11^H g2|^2, |w12^H g1|^2, |w2^H g1|^2, |w2^H g2|^2),
    each a tape node or constant. Decoding order: s11 against everything,
    s2 after s11 is cancelled, s12 last against noise only.
    """
    a11_1, a11_2, a12_1, a2_1, a2_2 = gains
    p = ad.as_var(powers)
    p11, p12, p2 = ad.getitem(p, 0), ad.getitem(p, 1), ad.getitem(p, 2)
    den11 = ad.add_n([ad.mul(p12, a11_1), ad.mul(p2, a11_2)], bias=noise_power_w)
    r11 = ad.log2_1p(ad.div(ad.mul(p11, a11_1), den11))
    den2 = ad.add_n([ad.mul(p12, a2_1)], bias=noise_power_w)
    r2 = ad.log2_1p(ad.div(ad.mul(p2, a2_2), den2))
    r12 = ad.log2_1p(ad.mul(p12, ad.mul(a12_1, 1.0 / noise_power_w)))
    return r11, r12, r2


def stream_rates_given_channels(w11, w12, w2, powers, g1, g2, noise_power_w):
    """Per-stream rates with the two effective channels held fixed."""
    w11, w12, w2 = ad.as_var(w11), ad.as_var(w12), ad.as_var(w2)
    g1, g2 = ad.as_var(g1), ad.as_var(g2)
    gains = (ad.abs2(ad.vdot(w11, g1)), ad.abs2(ad.vdot(w11, g2)),
             ad.abs2(ad.vdot(w12, g1)), ad.abs2(ad.vdot(w2, g1)),
             ad.abs2(ad.vdot(w2, g2)))
    return rates_from_gains(gains, powers, noise_power_w)


def stream_rates(sol, ch, noise_power_w):
    """Per-stream spectral efficiencies (r11, r12, r2) as tape nodes."""
    g1, g2 = _effective_pair(sol, ch)
    return stream_rates_given_channels(sol.w11, sol.w12, sol.w2, sol.powers,
                                       g1, g2, noise_power_w)


def rate_s11(sol, ch, noise_power_w):
    return stream_rates(sol, ch, noise_power_w)[0]


def rate_s12(sol, ch, noise_power_w):
    return stream_rates(sol, ch, noise_power_w)[1]


def rate_s2(sol, ch, noise_power_w):
    return stream_rates(sol, ch, noise_power_w)[2]


def sum_rate(sol, ch, noise_power_w):
    """(user-1 rate, user-2 rate, sum) as tape nodes."""
    r11, r12, r2 = stream_rates(sol, ch, noise_power_w)
    r1 = ad.add(r11, r12)
    return r1, r2, ad.add(r1, r2)


def mac_sum_capacity_bound(sol, ch, noise_power_w):
    """Sum capacity of the effective two-user multiple-access channel.

    log2 det(I + (p11+p12)/noise g1 g1^H + p2/noise g2 g2^H), a plain
    float. No receive combining with unit-norm filters can push the
    decoded sum rate above it, so it bounds sum_rate at every feasible
    solution.
    """
    g1, g2 = (np.asarray(g.data) for g in _effective_pair(sol, ch))
    p = np.asarray(sol.powers.data if isinstance(sol.powers, Var) else sol.powers,
                   dtype=float)
    n = g1.shape[0]
    gram = (np.eye(n)
            + (p[0] + p[1]) / noise_power_w * np.outer(g1, np.conj(g1))
            + p[2] / noise_power_w * np.outer(g2, np.conj(g2)))
    sign, logdet = np.linalg.slogdet(gram)
    if sign.real <= 0:
        raise ValueError("capacity Gram matrix is not positive definite")
    return float(logdet / np.log(2.0))


@dataclass
class ConstraintResiduals:
    """Signed constraint residuals; positive means violated.

    Norm, unitarity and symmetry deviations are non-negative distances;
    rate slacks and power excesses go negative when there is margin.
    """

    rate_slack_ue1: object
    rate_slack_ue2: object
    norm_dev_w11: object
    norm_dev_w12: object
    norm_dev_w2: object
    unitarity_dev: object
    symmetry_dev: object
    power_excess_ue1: object
    power_excess_ue2: object

    def as_floats(self):
        def val(x):
            return float(x.data) if isinstance(x, Var) else float(x)
        return ConstraintResiduals(**{k: val(v) for k, v in self.__dict__.items()})

    def max_feasibility_violation(self):
        """Largest hard-constraint residual (rate thresholds excluded)."""
        r = self.as_floats()
        return max(r.norm_dev_w11, r.norm_dev_w12, r.norm_dev_w2,
                   r.unitarity_dev, r.symmetry_dev,
                   r.power_excess_ue1, r.power_excess_ue2, 0.0)


def _scattering_block_nodes(scattering, group_sizes):
    """Blocks of the scattering matrix for constraint evaluation.

    Returns (diag_vector, None) for a single-connected parameterization,
    else (None, list of square blocks).
    """
    if isinstance(scattering, ScatteringMatrix):
        if scattering.architecture is Architecture.SINGLE_CONNECTED:
            return scattering.realize_blocks()[0], None
        return None, scattering.realize_blocks()
    full = ad.as_var(scattering)
    bounds = np.cumsum([0] + [int(s) for s in group_sizes])
    blocks = [ad.getitem(full, (slice(lo, hi), slice(lo, hi)))
              for lo, hi in zip(bounds[:-1], bounds[1:])]
    return None, blocks


def constraint_residuals(sol, ch, system, rates=None):
    """All constraint residuals of a candidate solution as tape nodes.

    rates may pass precomputed (r1, r2) nodes to reuse an existing rate
    subgraph instead of rebuilding one.
    """
    r1, r2 = rates if rates is not None else sum_rate(sol, ch, system.noise_power_w)[:2]
    rate_slack_ue1 = ad.sub(system.rate_threshold_ue1, r1)
    rate_slack_ue2 = ad.sub(system.rate_threshold_ue2, r2)

    norms = [ad.absval(ad.sub(ad.fro_norm(ad.as_var(w)), 1.0))
             for w in (sol.w11, sol.w12, sol.w2)]

    diag, blocks = _scattering_block_nodes(sol.scattering, system.group_sizes)
    if diag is not None:
        # 1x1 blocks: unitarity collapses to | |phi|^2 - 1 | per element
        unitarity = ad.sumall(ad.absval(ad.sub(ad.abs2(diag), 1.0)))
        symmetry = ad.as_var(0.0)
    else:
        unit_terms, sym_terms = [], []
        for b in blocks:
            size = np.shape(b.data)[0]
            gram = ad.matmul(ad.hermitian(b), b)
            unit_terms.append(ad.fro_norm(ad.sub(gram, np.eye(size))))
            sym_terms.append(ad.fro_norm(ad.sub(b, ad.transpose(b))))
        unitarity = unit_terms[0] if len(unit_terms) == 1 else ad.add_n(unit_terms)
        symmetry = sym_terms[0] if len(sym_terms) == 1 else ad.add_n(sym_terms)

    p = ad.as_var(sol.powers)
    power_excess_ue1 = ad.add_n([ad.getitem(p, 0), ad.getitem(p, 1)],
                                bias=-system.max_power_ue1_w)
    power_excess_ue2 = ad.sub(ad.getitem(p, 2), system.max_power_ue2_w)

    return ConstraintResiduals(
        rate_slack_ue1=rate_slack_ue1, rate_slack_ue2=rate_slack_ue2,
        norm_dev_w11=norms[0], norm_dev_w12=norms[1], norm_dev_w2=norms[2],
        unitarity_dev=unitarity, symmetry_dev=symmetry,
        power_excess_ue1=power_excess_ue1, power_excess_ue2=power_excess_ue2)


# -- exact-feasibility tools ---------------------------------------------------


def symmetric_unitary_from_exponent(s):
    """exp(j S) for real symmetric S, via orthogonal diagonalization.

    The eigendecomposition keeps the result symmetric and unitary up to
    rounding, unlike a truncated power series.
    """
    s = np.asarray(s, dtype=float)
    lam, q = np.linalg.eigh(s)
    return (q * np.exp(1j * lam)) @ q.T


def random_symmetric_unitary(rng, n):
    """Draw a symmetric unitary matrix as exp(j S) with S real symmetric."""
    g = rng.standard_normal((n, n))
    return symmetric_unitary_from_exponent(0.5 * (g + g.T))


def takagi(matrix, rounding=12):
    """Takagi factorization a = u diag(s) u^T of a complex symmetric matrix.

    Built from the SVD; singular values are rounded when grouping
    multiplicities because equal singular values must be handled inside
    one block. Returns (singular values, u).
    """
    matrix = np.asarray(matrix, dtype=np.complex128)
    v, singular_values, w_adjoint = np.linalg.svd(matrix)
    w = w_adjoint.conjugate().transpose()

    groups = {}
    for index, value in enumerate(singular_values):
        groups.setdefault(np.round(value, decimals=rounding), []).append(index)

    diagonal_blocks = []
    for indices in groups.values():
        z = v[:, indices].transpose() @ w[:, indices]
        diagonal_blocks.append(scipy.linalg.sqrtm(z))
    q = scipy.linalg.block_diag(*diagonal_blocks)
    return singular_values, v @ q.conjugate()


def takagi_project(matrix, tol=1e-12):
    """Nearest symmetric unitary matrix: factor a = u diag(s) u^T, keep u u^T.

    Rank-deficient input has no well-defined projection direction.
    """
    matrix = np.asarray(matrix, dtype=np.complex128)
    if matrix.shape == (1, 1):
        mag = abs(matrix[0, 0])
        if mag < tol:
            raise ValueError(f"degenerate projection: singular value {mag:.3e} below {tol:.1e}")
        return matrix / mag
    s, u = takagi(matrix)
    if np.min(s) < tol:
        raise ValueError(f"degenerate projection: singular value {np.min(s):.3e} "
                         f"below {tol:.1e}")
    return u @ u.T


def project_solution(sol, system):
    """Map a candidate onto the feasible set.

    Beamformers are normalized, powers clipped and scaled back into their
    budgets, and every scattering block replaced by its nearest symmetric
    unitary matrix. Returns a plain-array Solution with the realized
    scattering matrix.
    """
    sol = sol.detached()

    def unit(w):
        w = np.asarray(w, dtype=np.complex128)
        nrm = np.linalg.norm(w)
        if nrm < 1e-300:
            raise ValueError("degenerate projection: zero beamformer")
        return w / nrm

    p = np.clip(np.asarray(sol.powers, dtype=float), 0.0, None)
    budget1 = p[0] + p[1]
    if budget1 > system.max_power_ue1_w and budget1 > 0:
        p[:2] *= system.max_power_ue1_w / budget1
    p[2] = min(p[2], system.max_power_ue2_w)

    sc = sol.scattering
    full = realized_scattering(sc).data if isinstance(sc, ScatteringMatrix) \
        else np.asarray(sc, dtype=np.complex128)
    bounds = np.cumsum([0] + [int(s) for s in system.group_sizes])
    projected = np.zeros_like(full)
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        block = full[lo:hi, lo:hi]
        projected[lo:hi, lo:hi] = takagi_project(0.5 * (block + block.T))

    return Solution(w11=unit(sol.w11), w12=unit(sol.w12), w2=unit(sol.w2),
                    powers=p, scattering=projected)


def score_solution(sol, ch, system):
    """(user-1 rate, user-2 rate, sum rate, residuals) as plain floats."""
    r1, r2, total = sum_rate(sol, ch, system.noise_power_w)
    res = constraint_residuals(sol, ch, system).as_floats()
    return float(r1.data), float(r2.data), float(total.data), res
