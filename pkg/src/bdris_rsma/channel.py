"""Geometry, path loss and small-scale fading for the two-user RIS uplink.

Both user terminals talk to a multi-antenna base station, directly and
through a reconfigurable surface. Direct links are Rayleigh with a steep
distance exponent; surface links see a milder exponent and Rician fading
whose deterministic component comes from uniform-linear-array steering
vectors in the horizontal plane.

All positions are in meters, powers in watts, path loss linear.

Statistical contract (Monte-Carlo, >= 10**4 independent draws): the
empirical per-entry power E[|entry|^2] of any generated channel matches its
path loss within MC_PATHLOSS_REL_TOL, and the energy fraction of the
deterministic Rician branch matches k/(1+k) within MC_BRANCH_ENERGY_TOL.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Monte-Carlo tolerances the fading statistics are guaranteed to meet at
# 10**4 or more draws (relative for path loss, absolute for the unit-bounded
# branch-energy fraction).
MC_MIN_DRAWS = 10_000
MC_PATHLOSS_REL_TOL = 0.05
MC_BRANCH_ENERGY_TOL = 0.02


@dataclass(frozen=True)
class NodeGeometry:
    """Cartesian positions (x, y, z) of the four terminals."""

    bs: tuple = (0.0, 0.0, 10.0)
    ris: tuple = (100.0, 2.0, 10.0)
    ue1: tuple = (80.0, 0.0, 0.0)
    ue2: tuple = (110.0, 0.0, 0.0)


@dataclass(frozen=True)
class FadingParams:
    """Large- and small-scale fading constants."""

    reference_loss_db: float = -30.0     # loss at the reference distance
    reference_distance_m: float = 1.0
    exponent_direct: float = 3.5         # user -> base station
    exponent_ris: float = 2.2            # any link touching the surface
    rician_k_db: float = 5.0
    noise_power_dbm: float = -80.0

    @property
    def noise_power_w(self):
        return dbm_to_watt(self.noise_power_dbm)


def db_to_linear(db):
    return 10.0 ** (db / 10.0)


def dbm_to_watt(dbm):
    return 10.0 ** ((dbm - 30.0) / 10.0)


def distance(a, b):
    return float(np.linalg.norm(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)))


def azimuth(src, dst):
    """Horizontal-plane angle of the direction src -> dst, in radians."""
    d = np.asarray(dst, dtype=float) - np.asarray(src, dtype=float)
    return float(np.arctan2(d[1], d[0]))


def path_loss(dist, params, exponent):
    """Linear power attenuation at the given distance."""
    if dist <= 0:
        raise ValueError(f"distance must be positive, got {dist}")
    ref = db_to_linear(params.reference_loss_db)
    return ref * (dist / params.reference_distance_m) ** (-exponent)


def steering_vector(n, angle):
    """Half-wavelength ULA response: entries exp(j pi m sin(angle))."""
    m = np.arange(n)
    return np.exp(1j * np.pi * m * np.sin(angle))


def rician_weights(k_db):
    """(scattered, deterministic) amplitude weights for a Rician factor in dB.

    k_db = -inf degenerates to pure Rayleigh scattering.
    """
    if np.isneginf(k_db):
        return 1.0, 0.0
    k = db_to_linear(k_db)
    return float(np.sqrt(1.0 / (1.0 + k))), float(np.sqrt(k / (1.0 + k)))


def rician_sample(rng, los, pl, k_db):
    """Draw one Rician fading realization.

    los is the deterministic unit-modulus component (any shape); pl is the
    linear path loss applied to the whole draw. The scattered part has
    i.i.d. standard circularly symmetric complex Gaussian entries, so the
    expected per-entry power of the result equals pl for any k.
    """
    los = np.asarray(los, dtype=np.complex128)
    w_sc, w_det = rician_weights(k_db)
    scatter = (rng.standard_normal(los.shape) + 1j * rng.standard_normal(los.shape)) / np.sqrt(2.0)
    return np.sqrt(pl) * (w_sc * scatter + w_det * los)


def rayleigh_sample(rng, shape, pl):
    return rician_sample(rng, np.zeros(shape), pl, -np.inf)


@dataclass
class ChannelSet:
    """One realization of the five links plus its dimensions."""

    ue1_bs: np.ndarray    # (N,)   user 1 -> base station, direct
    ue2_bs: np.ndarray    # (N,)   user 2 -> base station, direct
    ris_bs: np.ndarray    # (N, M) surface -> base station
    ue1_ris: np.ndarray   # (M,)   user 1 -> surface
    ue2_ris: np.ndarray   # (M,)   user 2 -> surface

    @property
    def n_antennas(self):
        return self.ris_bs.shape[0]

    @property
    def m_elements(self):
        return self.ris_bs.shape[1]


def generate_channel_set(geometry, params, n_antennas, m_elements, rng):
    """Draw all five links for one scenario.

    The draw order is fixed (direct links first, then surface links), so a
    seeded generator reproduces the set bit for bit.
    """
    if n_antennas < 1 or m_elements < 1:
        raise ValueError(f"dimensions must be at least 1, got N={n_antennas}, M={m_elements}")
    g = geometry
    pl_1b = path_loss(distance(g.ue1, g.bs), params, params.exponent_direct)
    pl_2b = path_loss(distance(g.ue2, g.bs), params, params.exponent_direct)
    pl_rb = path_loss(distance(g.ris, g.bs), params, params.exponent_ris)
    pl_1r = path_loss(distance(g.ue1, g.ris), params, params.exponent_ris)
    pl_2r = path_loss(distance(g.ue2, g.ris), params, params.exponent_ris)

    ue1_bs = rayleigh_sample(rng, (n_antennas,), pl_1b)
    ue2_bs = rayleigh_sample(rng, (n_antennas,), pl_2b)

    # Deterministic components: ULA responses at both ends of each
    # surface link; the surface-to-station link is their outer product.
    a_bs = steering_vector(n_antennas, azimuth(g.bs, g.ris))
    a_ris_bs = steering_vector(m_elements, azimuth(g.ris, g.bs))
    a_ris_ue1 = steering_vector(m_elements, azimuth(g.ris, g.ue1))
    a_ris_ue2 = steering_vector(m_elements, azimuth(g.ris, g.ue2))

    k = params.rician_k_db
    ris_bs = rician_sample(rng, np.outer(a_bs, a_ris_bs), pl_rb, k)
    ue1_ris = rician_sample(rng, a_ris_ue1, pl_1r, k)
    ue2_ris = rician_sample(rng, a_ris_ue2, pl_2r, k)
    return ChannelSet(ue1_bs=ue1_bs, ue2_bs=ue2_bs, ris_bs=ris_bs,
                      ue1_ris=ue1_ris, ue2_ris=ue2_ris)
