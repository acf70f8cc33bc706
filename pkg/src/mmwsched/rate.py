"""Link budgets to rates: SINR, modified-Shannon rate, and pattern evaluation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .channel import ChannelParams, ChannelRealization, beam_gain_grid
from .geometry import (
    VERTICAL_ELEVATION_DEG,
    BeamCodebook,
    Placement,
    Room,
)


@dataclass(frozen=True)
class RadioParams:
    """Rate-model constants: bandwidth, efficiencies, and noise power."""

    bandwidth_hz: float = 2.16e9
    bw_efficiency: float = 0.6
    snr_efficiency: float = 1.0
    noise_power_dbm: float = -73.66

    def __post_init__(self) -> None:
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth_hz must be positive")
        for name in ("bw_efficiency", "snr_efficiency"):
            if not 0 < getattr(self, name) <= 1:
                raise ValueError(f"{name} must lie in (0, 1]")
        if not math.isfinite(self.noise_power_dbm):
            raise ValueError("noise_power_dbm must be finite")


@dataclass(frozen=True)
class Pattern:
    """Joint per-slot assignment: one (user, beam) per active AP, None if idle.

    links has one entry per configured AP. Active user indices must be pairwise
    distinct (one UE per AP per slot).
    """

    links: tuple[Optional[tuple[int, int]], ...]

    def __post_init__(self) -> None:
        links = tuple(tuple(l) if l is not None else None for l in self.links)
        users = [l[0] for l in links if l is not None]
        if len(set(users)) != len(users):
            raise ValueError("pattern assigns the same user to more than one AP")
        object.__setattr__(self, "links", links)

    def active(self) -> list[tuple[int, int, int]]:
        """List of (ap, user, beam) for the transmitting APs, in AP order."""
        return [(m, l[0], l[1]) for m, l in enumerate(self.links) if l is not None]

    @property
    def n_active(self) -> int:
        return sum(1 for l in self.links if l is not None)


@dataclass(frozen=True)
class PatternRates:
    """Per-AP rates of one evaluated pattern, with and without interference."""

    per_link_rate_bps: np.ndarray
    per_link_iso_rate_bps: np.ndarray

    @property
    def sum_rate_bps(self) -> float:
        return float(self.per_link_rate_bps.sum())

    @property
    def sum_iso_rate_bps(self) -> float:
        return float(self.per_link_iso_rate_bps.sum())


def dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


def link_rate_bps(sinr_linear: float, radio: RadioParams) -> float:
    """Modified Shannon rate: eta_bw * BW * log2(1 + eta_snr * SINR)."""
    if sinr_linear < 0:
        raise ValueError("SINR must be non-negative")
    return radio.bw_efficiency * radio.bandwidth_hz * math.log2(
        1.0 + radio.snr_efficiency * sinr_linear
    )


def sinr_linear(signal_dbm: float, interferer_dbms: Sequence[float], noise_dbm: float) -> float:
    """Linear SINR from dBm powers; an empty interferer list gives plain SNR."""
    denom = dbm_to_mw(noise_dbm) + sum(dbm_to_mw(i) for i in interferer_dbms)
    return dbm_to_mw(signal_dbm) / denom


class ScenarioState:
    """Immutable per-run bundle of geometry, channel draw, and radio constants.

    Precomputes the received-power tensor base_power_dbm[m, k, b] (shadowed,
    unblocked) for every AP, UE, and beam, and serves per-slot linear-power
    views with that slot's blockage applied. All scheduler and rate math reads
    powers from here.
    """

    def __init__(
        self,
        room: Room,
        placement: Placement,
        codebook: BeamCodebook,
        active_aps: Sequence[int],
        channel: ChannelParams,
        radio: RadioParams,
        realization: ChannelRealization,
    ) -> None:
        m_total = placement.n_aps
        active = tuple(int(m) for m in active_aps)
        if len(active) < 1:
            raise ValueError("need at least one active AP")
        if sorted(set(active)) != list(active):
            raise ValueError("active_aps must be sorted and unique")
        if active[0] < 0 or active[-1] >= m_total:
            raise ValueError("active AP index out of range")
        if realization.shadow_db.shape != (m_total, placement.n_ues):
            raise ValueError("realization shape does not match placement")
        self.room = room
        self.placement = placement
        self.codebook = codebook
        self.active = active
        self.channel = channel
        self.radio = radio
        self.realization = realization

        az, el, dist = self._angles()
        gains = beam_gain_grid(codebook, az, el)
        pl = (
            channel.pl_ref_db
            + 10.0 * channel.pl_exponent * np.log10(dist / channel.ref_dist_m)
            + realization.shadow_db
        )
        self.base_power_dbm = channel.tx_power_dbm + gains - pl[:, :, None]
        self._base_power_mw = 10.0 ** (self.base_power_dbm / 10.0)
        self._block_factor = 10.0 ** (-channel.block_loss_db / 10.0)
        self.noise_mw = dbm_to_mw(radio.noise_power_dbm)
        self.rate_coeff = radio.bw_efficiency * radio.bandwidth_hz
        self._expected_power_dbm: np.ndarray | None = None
        self._slot_cache: tuple[int, np.ndarray] | None = None

    @property
    def n_aps(self) -> int:
        return self.placement.n_aps

    @property
    def n_ues(self) -> int:
        return self.placement.n_ues

    @property
    def n_beams(self) -> int:
        return self.codebook.n_beams

    @property
    def n_active(self) -> int:
        return len(self.active)

    @property
    def n_slots(self) -> int:
        return self.realization.n_slots

    def _angles(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        aps = self.placement.ap_positions
        ues = self.placement.ue_positions
        d = ues[None, :, :] - aps[:, None, :]
        horiz = np.hypot(d[:, :, 0], d[:, :, 1])
        dist = np.sqrt((d**2).sum(axis=2))
        if np.any(dist == 0):
            raise ValueError("an AP and a UE coincide")
        az = np.degrees(np.arctan2(d[:, :, 1], d[:, :, 0])) % 360.0
        el = np.degrees(np.arctan2(-d[:, :, 2], horiz))
        vertical = horiz == 0.0
        if np.any(vertical):
            az = np.where(vertical, 0.0, az)
            el = np.where(
                vertical, np.where(d[:, :, 2] < 0, VERTICAL_ELEVATION_DEG, -VERTICAL_ELEVATION_DEG), el
            )
        return az, el, dist

    def expected_power_dbm(self) -> np.ndarray:
        """Shadow-free, unblocked power tensor used for conventional association."""
        if self._expected_power_dbm is None:
            # base_power_dbm subtracts the shadowing term; add it back out.
            self._expected_power_dbm = (
                self.base_power_dbm + self.realization.shadow_db[:, :, None]
            )
            self._expected_power_dbm.setflags(write=False)
        return self._expected_power_dbm

    def slot_powers_mw(self, slot: int) -> np.ndarray:
        """Linear received powers (mW) for one slot, blockage applied."""
        if not 0 <= slot < self.n_slots:
            raise ValueError(f"slot {slot} outside 0..{self.n_slots - 1}")
        if self._slot_cache is not None and self._slot_cache[0] == slot:
            return self._slot_cache[1]
        blocked = self.realization.blocked[slot]
        powers = self._base_power_mw * np.where(blocked, self._block_factor, 1.0)[:, :, None]
        powers.setflags(write=False)
        self._slot_cache = (slot, powers)
        return powers


def evaluate_pattern(pattern: Pattern, slot: int, state: ScenarioState) -> PatternRates:
    """Rates of every link in a pattern, with and without mutual interference.

    The interference at link m's UE is the summed received power from every
    other concurrently active AP using its own selected beam; each interfering
    path carries its own shadowing and blockage state.
    """
    if len(pattern.links) != state.n_aps:
        raise ValueError("pattern length does not match the number of configured APs")
    links = pattern.active()
    m_total = state.n_aps
    rates = np.zeros(m_total)
    iso = np.zeros(m_total)
    if not links:
        return PatternRates(rates, iso)
    for m, _, _ in links:
        if m not in state.active:
            raise ValueError(f"pattern schedules inactive AP {m}")
    P = state.slot_powers_mw(slot)
    m_idx = np.array([m for m, _, _ in links])
    k_idx = np.array([k for _, k, _ in links])
    b_idx = np.array([b for _, _, b in links])
    A = P[m_idx, :, b_idx]  # (L, K): row i is AP m_i's power map on beam b_i
    S = A[np.arange(len(links)), k_idx]
    total_at_ue = A[:, k_idx].sum(axis=0)
    I = total_at_ue - S
    eta = state.radio.snr_efficiency
    with_interf = state.rate_coeff * np.log2(1.0 + eta * S / (state.noise_mw + I))
    isolated = state.rate_coeff * np.log2(1.0 + eta * S / state.noise_mw)
    rates[m_idx] = with_interf
    iso[m_idx] = isolated
    return PatternRates(rates, iso)


def pf_objective(pattern: Pattern, slot: int, state: ScenarioState, avg_rate_bps: np.ndarray) -> float:
    """Proportional-fair metric of a pattern: sum of rate_k / avg_rate_k.

    Uses with-interference rates. This scalar accumulation in AP order is the
    canonical objective value; schedulers and tests compare through it.
    """
    avg = np.asarray(avg_rate_bps, dtype=float)
    if np.any(avg <= 0):
        raise ValueError("average rates must be positive")
    prates = evaluate_pattern(pattern, slot, state)
    total = 0.0
    for m, k, _ in pattern.active():
        total += float(prates.per_link_rate_bps[m]) / float(avg[k])
    return total
