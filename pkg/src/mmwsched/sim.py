"""End-to-end experiment orchestration: single runs, AP-count and density sweeps."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .channel import ChannelParams, realize
from .geometry import Placement, Room, default_ap_grid, drop_ues, uniform_codebook
from .metrics import ComplexitySummary, MetricsReport, build_report, complexity_summary
from .rate import Pattern, RadioParams, ScenarioState, pf_objective
from .sched import PfState, SchedulerKind, es_switchings_per_slot, make_scheduler, run_slot

# Child-stream labels under the master seed, so e.g. changing the slot count
# never perturbs the UE drop.
STREAM_DROP = 0
STREAM_CHANNEL = 1

# The four APs the density experiments activate: the paper's "APs 2, 3, 4 and 5"
# read against the row-major default grid (0-based indices 1..4).
CENTRAL_CLUSTER_APS = (1, 2, 3, 4)


class ScenarioError(ValueError):
    """The scenario cannot be run as configured (e.g. fewer UEs than APs)."""


class EsBudgetError(ScenarioError):
    """Exhaustive search would exceed the configured enumeration budget."""

    def __init__(self, predicted: int, budget: int) -> None:
        super().__init__(
            f"exhaustive search needs {predicted} beam switchings per slot, "
            f"over the budget of {budget}"
        )
        self.predicted = predicted
        self.budget = budget


@dataclass(frozen=True)
class SchedulerSpec:
    kind: SchedulerKind = SchedulerKind.IS_JPFS
    delta_th: float = 0.1
    epsilon_bps: float = 1e3


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully describes one reproducible run; every field has a Table-I-style default."""

    room: Room = Room(20.0, 10.0, 4.0, 1.0)
    ap_positions: Optional[tuple[tuple[float, float, float], ...]] = None  # None: default grid
    active_aps: Optional[tuple[int, ...]] = None  # None: all configured APs
    az_beamwidth_deg: float = 30.0
    downtilt_deg: float = 45.0
    ue_density_per_m2: Optional[float] = 0.2
    ue_positions: Optional[tuple[tuple[float, float, float], ...]] = None
    channel: ChannelParams = field(default_factory=ChannelParams)
    radio: RadioParams = field(default_factory=RadioParams)
    scheduler: SchedulerSpec = field(default_factory=SchedulerSpec)
    n_slots: int = 500
    seed: int = 0
    es_budget: int = 100_000_000

    def __post_init__(self) -> None:
        if (self.ue_density_per_m2 is None) == (self.ue_positions is None):
            raise ValueError("specify exactly one of ue_density_per_m2 or ue_positions")
        if self.n_slots < 0:
            raise ValueError("n_slots must be non-negative")
        if self.es_budget < 1:
            raise ValueError("es_budget must be positive")

    def resolved_ap_positions(self) -> np.ndarray:
        if self.ap_positions is not None:
            return np.asarray(self.ap_positions, dtype=float)
        return default_ap_grid(self.room)

    def resolved_active(self) -> tuple[int, ...]:
        n = self.resolved_ap_positions().shape[0]
        if self.active_aps is None:
            return tuple(range(n))
        return tuple(self.active_aps)

    def resolved_n_ues(self) -> int:
        if self.ue_positions is not None:
            return len(self.ue_positions)
        return int(round(self.ue_density_per_m2 * self.room.floor_area_m2))


@dataclass(frozen=True)
class SlotTrace:
    slot: int
    links: tuple
    sum_rate_bps: float
    objective: float
    alpha: Optional[int]


@dataclass(frozen=True)
class RunResult:
    """One run's resolved config, metrics, complexity detail, optional trace."""

    config: ScenarioConfig
    metrics: MetricsReport
    complexity: ComplexitySummary
    n_ues: int
    n_active: int
    n_beams: int
    trace: Optional[tuple[SlotTrace, ...]] = None


def build_state(config: ScenarioConfig) -> ScenarioState:
    """Materialize a ScenarioState, raising ScenarioError before any slot runs."""
    room = config.room
    aps = config.resolved_ap_positions()
    active = config.resolved_active()
    codebook = uniform_codebook(config.az_beamwidth_deg, config.downtilt_deg)
    if config.ue_positions is not None:
        ues = np.asarray(config.ue_positions, dtype=float)
    else:
        ues = drop_ues(
            room,
            config.ue_density_per_m2,
            np.random.SeedSequence((config.seed, STREAM_DROP)),
        )
    try:
        placement = Placement(aps, ues)
        placement.validate_in(room)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc
    if placement.n_ues < len(active):
        raise ScenarioError(
            f"only {placement.n_ues} UEs for {len(active)} active APs"
        )
    if config.scheduler.kind == SchedulerKind.ES_JPFS:
        predicted = es_switchings_per_slot(
            placement.n_ues, len(active), codebook.n_beams
        )
        if predicted > config.es_budget:
            raise EsBudgetError(predicted, config.es_budget)
    realization = realize(
        config.channel,
        placement.n_aps,
        placement.n_ues,
        config.n_slots,
        np.random.SeedSequence((config.seed, STREAM_CHANNEL)),
    )
    try:
        return ScenarioState(
            room, placement, codebook, active, config.channel, config.radio, realization
        )
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc


def run(config: ScenarioConfig, collect_trace: bool = False) -> RunResult:
    """Execute one seeded run end to end and aggregate its metrics."""
    state = build_state(config)
    scheduler = make_scheduler(config.scheduler.kind, state, config.scheduler.delta_th)
    pf = PfState.initial(state.n_ues, config.scheduler.epsilon_bps)
    patterns: list[Pattern] = []
    slot_rates = []
    trace: list[SlotTrace] = []
    for slot in range(config.n_slots):
        pf_before = pf
        pattern, prates, pf = run_slot(scheduler, state, pf, slot)
        patterns.append(pattern)
        slot_rates.append(prates)
        if collect_trace:
            alpha = scheduler.ledger.per_slot[-1]["alpha"]
            trace.append(
                SlotTrace(
                    slot=slot,
                    links=pattern.links,
                    sum_rate_bps=prates.sum_rate_bps,
                    objective=pf_objective(pattern, slot, state, pf_before.avg_rate_bps),
                    alpha=alpha,
                )
            )
    report = build_report(
        patterns, slot_rates, state.n_ues, state.n_active, scheduler.ledger, state.n_beams
    )
    summary = complexity_summary(
        scheduler.ledger, state.n_ues, state.n_active, state.n_beams, config.n_slots
    )
    return RunResult(
        config=config,
        metrics=report,
        complexity=summary,
        n_ues=state.n_ues,
        n_active=state.n_active,
        n_beams=state.n_beams,
        trace=tuple(trace) if collect_trace else None,
    )


@dataclass(frozen=True)
class SweepCell:
    """One (x, scheduler) sweep cell: a result, or an explicit infeasibility."""

    x: float
    scheduler: SchedulerKind
    config: ScenarioConfig
    result: Optional[RunResult]
    infeasible_cost: Optional[int] = None


def _es_infeasible(config: ScenarioConfig) -> Optional[int]:
    if config.scheduler.kind != SchedulerKind.ES_JPFS:
        return None
    predicted = es_switchings_per_slot(
        config.resolved_n_ues(),
        len(config.resolved_active()),
        uniform_codebook(config.az_beamwidth_deg, config.downtilt_deg).n_beams,
    )
    return predicted if predicted > config.es_budget else None


def sweep_ap_count(
    base: ScenarioConfig,
    ap_counts: Sequence[int],
    schedulers: Sequence[SchedulerKind],
    density_per_m2: float = 1.0,
    collect_trace: bool = False,
) -> list[SweepCell]:
    """One run per (AP count, scheduler) at the given density (default 1 /m^2).

    The first `count` configured APs are activated. ES cells whose predicted
    enumeration exceeds the budget are reported infeasible, never attempted.
    """
    n_available = base.resolved_ap_positions().shape[0]
    cells: list[SweepCell] = []
    for count in ap_counts:
        if not 1 <= count <= n_available:
            raise ScenarioError(
                f"ap count {count} not in 1..{n_available} available positions"
            )
        for kind in schedulers:
            cfg = replace(
                base,
                active_aps=tuple(range(count)),
                ue_density_per_m2=density_per_m2,
                ue_positions=None,
                scheduler=replace(base.scheduler, kind=kind),
            )
            cost = _es_infeasible(cfg)
            if cost is not None:
                cells.append(SweepCell(count, kind, cfg, None, cost))
            else:
                cells.append(SweepCell(count, kind, cfg, run(cfg, collect_trace)))
    return cells


def sweep_density(
    base: ScenarioConfig,
    densities: Sequence[float],
    schedulers: Sequence[SchedulerKind],
    collect_trace: bool = False,
) -> list[SweepCell]:
    """One run per (density, scheduler).

    Unless the base config pins an active set, the default grid activates its
    four central-cluster APs.
    """
    if base.active_aps is not None:
        active = base.active_aps
    elif base.ap_positions is None:
        active = CENTRAL_CLUSTER_APS
    else:
        active = tuple(range(len(base.ap_positions)))
    cells: list[SweepCell] = []
    for density in densities:
        if density <= 0:
            raise ScenarioError("densities must be positive")
        for kind in schedulers:
            cfg = replace(
                base,
                active_aps=active,
                ue_density_per_m2=density,
                ue_positions=None,
                scheduler=replace(base.scheduler, kind=kind),
            )
            cost = _es_infeasible(cfg)
            if cost is not None:
                cells.append(SweepCell(density, kind, cfg, None, cost))
            else:
                cells.append(SweepCell(density, kind, cfg, run(cfg, collect_trace)))
    return cells


@dataclass(frozen=True)
class ComparisonResult:
    """Cross-seed metric means per scheduler plus pairwise ratios."""

    seeds: tuple[int, ...]
    means: dict[SchedulerKind, dict[str, Optional[float]]]
    ratios: dict[str, dict[str, Optional[float]]]
    infeasible: dict[SchedulerKind, int]
    runs: dict[tuple[SchedulerKind, int], RunResult]


_RATIO_METRICS = ("total_rate_gbps", "spatial_reuse", "fairness_index")


def compare(
    base: ScenarioConfig,
    schedulers: Sequence[SchedulerKind],
    seeds: Sequence[int],
) -> ComparisonResult:
    """Run every scheduler over the same seeds and tabulate means and ratios."""
    if not seeds:
        raise ScenarioError("need at least one seed")
    runs: dict[tuple[SchedulerKind, int], RunResult] = {}
    infeasible: dict[SchedulerKind, int] = {}
    for kind in schedulers:
        cfg0 = replace(base, scheduler=replace(base.scheduler, kind=kind))
        cost = _es_infeasible(cfg0)
        if cost is not None:
            infeasible[kind] = cost
            continue
        for seed in seeds:
            cfg = replace(cfg0, seed=seed)
            runs[(kind, seed)] = run(cfg)
    means: dict[SchedulerKind, dict[str, Optional[float]]] = {}
    for kind in schedulers:
        if kind in infeasible:
            continue
        per = [runs[(kind, s)] for s in seeds]
        means[kind] = {
            "total_rate_gbps": _mean([r.metrics.total_rate_gbps for r in per]),
            "spatial_reuse": _mean([r.metrics.spatial_reuse for r in per]),
            "fairness_index": _mean([r.metrics.fairness_index for r in per]),
            "alpha_mean": _mean([r.metrics.alpha_mean for r in per]),
            "complexity_switchings": _mean(
                [float(r.metrics.complexity_switchings) for r in per]
            ),
        }
    pairs = [
        (SchedulerKind.IS_JPFS, SchedulerKind.CONVENTIONAL),
        (SchedulerKind.ES_JPFS, SchedulerKind.CONVENTIONAL),
        (SchedulerKind.IS_JPFS, SchedulerKind.ES_JPFS),
    ]
    ratios: dict[str, dict[str, Optional[float]]] = {}
    for hi, lo in pairs:
        if hi in means and lo in means:
            label = f"{hi.value}/{lo.value}"
            ratios[label] = {
                metric: _ratio(means[hi][metric], means[lo][metric])
                for metric in _RATIO_METRICS
            }
    return ComparisonResult(tuple(seeds), means, ratios, infeasible, runs)


def _mean(values: Sequence[Optional[float]]) -> Optional[float]:
    present = [v for v in values if v is not None]
    if not present:
        return None
    return float(np.mean(present))


def _ratio(a: Optional[float], b: Optional[float]) -> Optional[float]:
    if a is None or b is None or b == 0:
        return None
    return a / b
