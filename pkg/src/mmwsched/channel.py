"""Link budget pieces: sectored 3D beam gain, log-distance pathloss, slot blockage."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Beam, BeamCodebook, departure_angles

# Attenuation is capped 12 dB below the boresight gain, so the floor is -12 dB.
FLOOR_GAIN_DB = -12.0


@dataclass(frozen=True)
class ChannelParams:
    """Radio-channel constants of a run.

    tx_power_dbm is the AP transmit power, pl_ref_db the pathloss at ref_dist_m,
    pl_exponent the log-distance slope, shadow_sigma_db the lognormal shadowing
    std, block_prob the per-slot probability a human blocks a path, and
    block_loss_db the extra attenuation while blocked.
    """

    tx_power_dbm: float = 10.0
    pl_ref_db: float = 68.0
    ref_dist_m: float = 1.0
    pl_exponent: float = 2.0
    shadow_sigma_db: float = 1.5
    block_prob: float = 0.5
    block_loss_db: float = 30.0

    def __post_init__(self) -> None:
        if self.ref_dist_m <= 0:
            raise ValueError("ref_dist_m must be positive")
        if self.pl_exponent <= 0:
            raise ValueError("pl_exponent must be positive")
        if self.shadow_sigma_db < 0:
            raise ValueError("shadow_sigma_db must be non-negative")
        if not 0 <= self.block_prob <= 1:
            raise ValueError("block_prob must lie in [0, 1]")
        if self.block_loss_db < 0:
            raise ValueError("block_loss_db must be non-negative")


@dataclass(frozen=True)
class ChannelRealization:
    """Random channel state of one run.

    shadow_db is an (M, K) matrix drawn once per run; blocked is an
    (n_slots, M, K) boolean array drawn independently per slot.
    """

    shadow_db: np.ndarray
    blocked: np.ndarray

    def __post_init__(self) -> None:
        shadow = np.asarray(self.shadow_db, dtype=float)
        blocked = np.asarray(self.blocked, dtype=bool)
        if shadow.ndim != 2:
            raise ValueError("shadow_db must be (M, K)")
        if blocked.ndim != 3 or blocked.shape[1:] != shadow.shape:
            raise ValueError("blocked must be (n_slots, M, K)")
        shadow.setflags(write=False)
        blocked.setflags(write=False)
        object.__setattr__(self, "shadow_db", shadow)
        object.__setattr__(self, "blocked", blocked)

    @property
    def n_slots(self) -> int:
        return int(self.blocked.shape[0])


def boresight_gain_db(el_beamwidth_deg: float) -> float:
    """Peak gain of a sectored beam: 20*log10(1.6162 / sin(width/2))."""
    if not 0 < el_beamwidth_deg < 360:
        raise ValueError("el_beamwidth_deg must lie in (0, 360)")
    return 20.0 * math.log10(1.6162 / math.sin(math.radians(el_beamwidth_deg / 2.0)))


def wrap_angle_deg(delta: float) -> float:
    """Shortest signed angular distance, in [-180, 180)."""
    return (delta + 180.0) % 360.0 - 180.0


def beam_gain(
    beam: Beam,
    azimuth_deg: float,
    elevation_deg: float,
    az_beamwidth_deg: float,
    el_beamwidth_deg: float,
) -> float:
    """Sectored 3D transmit gain in dB toward the given departure angles.

    Horizontal and vertical rolloffs are quadratic, 3 dB down at half the
    beamwidth, each capped at 12 dB + boresight gain; the combined attenuation
    is capped the same way, pinning the far sidelobe floor at exactly -12 dB.
    """
    if az_beamwidth_deg <= 0:
        raise ValueError("az_beamwidth_deg must be positive")
    g_o = boresight_gain_db(el_beamwidth_deg)
    cap = 12.0 + g_o
    d_az = wrap_angle_deg(azimuth_deg - beam.azimuth_center_deg)
    d_el = elevation_deg - beam.elevation_center_deg
    att_h = min(12.0 * (d_az / az_beamwidth_deg) ** 2, cap)
    att_v = min(12.0 * (d_el / el_beamwidth_deg) ** 2, cap)
    att = att_h + att_v
    if att >= cap:
        return FLOOR_GAIN_DB
    return g_o - att


def beam_gain_grid(
    codebook: BeamCodebook, azimuth_deg: np.ndarray, elevation_deg: np.ndarray
) -> np.ndarray:
    """Vectorized beam_gain: (...,) angle arrays -> (..., B) gains in dB."""
    g_o = boresight_gain_db(codebook.el_beamwidth_deg)
    cap = 12.0 + g_o
    centers_az = np.array([b.azimuth_center_deg for b in codebook.beams])
    centers_el = np.array([b.elevation_center_deg for b in codebook.beams])
    d_az = (np.asarray(azimuth_deg)[..., None] - centers_az + 180.0) % 360.0 - 180.0
    d_el = np.asarray(elevation_deg)[..., None] - centers_el
    att_h = np.minimum(12.0 * (d_az / codebook.az_beamwidth_deg) ** 2, cap)
    att_v = np.minimum(12.0 * (d_el / codebook.el_beamwidth_deg) ** 2, cap)
    att = att_h + att_v
    return np.where(att >= cap, FLOOR_GAIN_DB, g_o - att)


def pathloss_db(d_m: float, params: ChannelParams, shadow_db: float = 0.0) -> float:
    """Log-distance pathloss: reference loss + 10*n*log10(d/d0) + shadowing."""
    if d_m <= 0:
        raise ValueError("distance must be positive")
    return (
        params.pl_ref_db
        + 10.0 * params.pl_exponent * math.log10(d_m / params.ref_dist_m)
        + shadow_db
    )


def received_power_dbm(
    ap,
    ue,
    beam: Beam,
    codebook: BeamCodebook,
    params: ChannelParams,
    shadow_db: float = 0.0,
    blocked: bool = False,
) -> float:
    """Received power at a quasi-omni UE: P_t + beam gain - pathloss - blockage."""
    az, el, dist = departure_angles(ap, ue)
    gain = beam_gain(beam, az, el, codebook.az_beamwidth_deg, codebook.el_beamwidth_deg)
    power = params.tx_power_dbm + gain - pathloss_db(dist, params, shadow_db)
    if blocked:
        power -= params.block_loss_db
    return power


def realize(
    params: ChannelParams, n_aps: int, n_ues: int, n_slots: int, rng_seed
) -> ChannelRealization:
    """Draw the random channel state for a run, deterministically from a seed.

    Shadowing is quasi-static (one normal draw per AP-UE pair); blockage is
    Bernoulli(block_prob) independently per pair and slot. Shadowing and
    blockage use separate child streams so the slot count never perturbs the
    shadowing draws. n_slots may be 0 for a vacuous run.
    """
    if n_aps < 1 or n_ues < 1 or n_slots < 0:
        raise ValueError("need n_aps, n_ues >= 1 and n_slots >= 0")
    ss = rng_seed if isinstance(rng_seed, np.random.SeedSequence) else np.random.SeedSequence(rng_seed)
    shadow_ss, block_ss = ss.spawn(2)
    shadow = np.random.default_rng(shadow_ss).normal(
        0.0, params.shadow_sigma_db, size=(n_aps, n_ues)
    )
    blocked = np.random.default_rng(block_ss).random((n_slots, n_aps, n_ues)) < params.block_prob
    return ChannelRealization(shadow, blocked)
