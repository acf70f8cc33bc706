"""Run-level evaluation: total rate, spatial reuse, Jain fairness, complexity."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .rate import Pattern, PatternRates
from .sched import ComplexityLedger, es_switchings_per_slot


@dataclass(frozen=True)
class ComplexitySummary:
    """Measured beam switchings next to the closed-form predictions."""

    measured_switchings: int
    conventional_formula: int  # B * M, once per run
    es_formula_per_slot: int  # K!/(K-M)! * B^M
    es_formula_total: int
    is_iterations: int
    alpha_mean: Optional[float]  # mean IS iterations per slot


@dataclass(frozen=True)
class MetricsReport:
    """The paper-facing metrics of one run."""

    total_rate_gbps: Optional[float]
    spatial_reuse: Optional[float]
    fairness_index: Optional[float]
    complexity_switchings: int
    alpha_mean: Optional[float]
    per_user_rate_bps: np.ndarray


def spatial_reuse(slot_rates: Sequence[PatternRates], n_active: int) -> Optional[float]:
    """Spatial reuse factor: concurrent sum rate over average isolated rate.

    Computed on run totals: sum of with-interference rates divided by the
    per-link average of isolated rates. Equals n_active exactly when no link
    ever sees interference. None when the isolated total is zero.
    """
    if n_active < 1:
        raise ValueError("need at least one active AP")
    num = sum(r.sum_rate_bps for r in slot_rates)
    iso = sum(r.sum_iso_rate_bps for r in slot_rates)
    if iso <= 0:
        return None
    return num / (iso / n_active)


def fairness_index(per_user_rate: Sequence[float]) -> Optional[float]:
    """Jain index (sum r)^2 / (K sum r^2); 1 is equal, 1/K is one-user-takes-all.

    None for an all-zero vector (undefined).
    """
    r = np.asarray(per_user_rate, dtype=float)
    if r.size < 1:
        raise ValueError("need at least one user")
    if np.any(r < 0):
        raise ValueError("rates must be non-negative")
    sq = float((r**2).sum())
    if sq == 0:
        return None
    return float(r.sum()) ** 2 / (r.size * sq)


def accumulate_user_rates(
    patterns: Sequence[Pattern], slot_rates: Sequence[PatternRates], n_ues: int
) -> np.ndarray:
    """Cumulative served rate per user over all slots and APs."""
    if len(patterns) != len(slot_rates):
        raise ValueError("patterns and rates must pair up slot by slot")
    totals = np.zeros(n_ues)
    for pattern, prates in zip(patterns, slot_rates):
        for m, k, _ in pattern.active():
            totals[k] += prates.per_link_rate_bps[m]
    return totals


def complexity_summary(
    ledger: ComplexityLedger, n_ues: int, n_active: int, n_beams: int, n_slots: int
) -> ComplexitySummary:
    """Measured switchings with the closed-form cross-checks."""
    es_slot = es_switchings_per_slot(n_ues, n_active, n_beams)
    alpha = ledger.is_iterations / n_slots if ledger.is_iterations > 0 and n_slots > 0 else None
    return ComplexitySummary(
        measured_switchings=ledger.beam_switch_count,
        conventional_formula=n_beams * n_active,
        es_formula_per_slot=es_slot,
        es_formula_total=es_slot * n_slots,
        is_iterations=ledger.is_iterations,
        alpha_mean=alpha,
    )


def build_report(
    patterns: Sequence[Pattern],
    slot_rates: Sequence[PatternRates],
    n_ues: int,
    n_active: int,
    ledger: ComplexityLedger,
    n_beams: int,
) -> MetricsReport:
    """Aggregate one run's per-slot artifacts into a MetricsReport."""
    n_slots = len(slot_rates)
    per_user = accumulate_user_rates(patterns, slot_rates, n_ues)
    if n_slots == 0:
        return MetricsReport(
            total_rate_gbps=None,
            spatial_reuse=None,
            fairness_index=None,
            complexity_switchings=ledger.beam_switch_count,
            alpha_mean=None,
            per_user_rate_bps=per_user,
        )
    mean_rate = sum(r.sum_rate_bps for r in slot_rates) / n_slots
    summary = complexity_summary(ledger, n_ues, n_active, n_beams, n_slots)
    return MetricsReport(
        total_rate_gbps=mean_rate / 1e9,
        spatial_reuse=spatial_reuse(slot_rates, n_active),
        fairness_index=fairness_index(per_user),
        complexity_switchings=ledger.beam_switch_count,
        alpha_mean=summary.alpha_mean,
        per_user_rate_bps=per_user,
    )
