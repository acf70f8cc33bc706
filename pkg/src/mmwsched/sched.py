"""The three per-slot schedulers and the proportional-fairness state machine."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .rate import Pattern, ScenarioState, evaluate_pattern, pf_objective


class SchedulerKind(str, Enum):
    CONVENTIONAL = "conv"
    ES_JPFS = "es"
    IS_JPFS = "is"


@dataclass(frozen=True)
class PfState:
    """Proportional-fair bookkeeping: per-user average rates and the slot index.

    slot_index is 0 before any scheduling. Averages are floored at epsilon_bps
    so the PF metric rate/average never divides by zero and never-served users
    stay maximally attractive.
    """

    avg_rate_bps: np.ndarray
    slot_index: int
    epsilon_bps: float

    def __post_init__(self) -> None:
        avg = np.asarray(self.avg_rate_bps, dtype=float)
        if self.epsilon_bps <= 0:
            raise ValueError("epsilon_bps must be positive")
        if self.slot_index < 0:
            raise ValueError("slot_index must be non-negative")
        if np.any(avg <= 0):
            raise ValueError("average rates must stay positive")
        avg.setflags(write=False)
        object.__setattr__(self, "avg_rate_bps", avg)

    @classmethod
    def initial(cls, n_ues: int, epsilon_bps: float = 1e3) -> "PfState":
        return cls(np.full(n_ues, float(epsilon_bps)), 0, float(epsilon_bps))


def pf_update(state: PfState, instantaneous_rates_bps: np.ndarray) -> PfState:
    """Exponential-in-n average update: R(n) = (1 - 1/n) R(n-1) + (1/n) r(n).

    Unscheduled users carry rate 0. The result is floored at epsilon_bps.
    """
    rates = np.asarray(instantaneous_rates_bps, dtype=float)
    if rates.shape != state.avg_rate_bps.shape:
        raise ValueError("rate vector length does not match user count")
    if np.any(rates < 0):
        raise ValueError("instantaneous rates must be non-negative")
    n = state.slot_index + 1
    avg = (1.0 - 1.0 / n) * state.avg_rate_bps + (1.0 / n) * rates
    avg = np.maximum(avg, state.epsilon_bps)
    return PfState(avg, n, state.epsilon_bps)


@dataclass
class ComplexityLedger:
    """Beam-switching counts accumulated over a run, plus IS iteration totals."""

    beam_switch_count: int = 0
    is_iterations: int = 0
    per_slot: list[dict] = field(default_factory=list)

    def add_association(self, switchings: int) -> None:
        self.beam_switch_count += int(switchings)

    def add_slot(self, switchings: int, alpha: Optional[int] = None) -> None:
        self.beam_switch_count += int(switchings)
        if alpha is not None:
            self.is_iterations += int(alpha)
        self.per_slot.append({"switchings": int(switchings), "alpha": alpha})


@dataclass(frozen=True)
class Association:
    """Conventional max-power association: per-UE best link and per-AP RR lists."""

    ue_link: tuple[tuple[int, int], ...]  # per UE: (ap, beam)
    ap_users: dict[int, tuple[int, ...]]  # active AP -> associated UEs ascending


def conventional_associate(state: ScenarioState) -> Association:
    """Associate every UE to the active (AP, beam) with maximum expected power.

    Expected power ignores shadowing and blockage. Ties break toward the lowest
    (AP index, beam index).
    """
    exp = state.expected_power_dbm()
    active = state.active
    b = state.n_beams
    ue_link: list[tuple[int, int]] = []
    ap_users: dict[int, list[int]] = {m: [] for m in active}
    sub = exp[list(active)]  # (Ma, K, B)
    for k in range(state.n_ues):
        flat = int(np.argmax(sub[:, k, :]))  # first max = lowest (ap, beam)
        i, beam = divmod(flat, b)
        m = active[i]
        ue_link.append((m, beam))
        ap_users[m].append(k)
    return Association(tuple(ue_link), {m: tuple(v) for m, v in ap_users.items()})


def conventional_slot(
    state: ScenarioState, assoc: Association, cursors: dict[int, int]
) -> Pattern:
    """One round-robin slot: each active AP serves the next UE in its own list.

    Cursors advance in place. APs with no associated UEs stay idle.
    """
    links: list[Optional[tuple[int, int]]] = [None] * state.n_aps
    for m in state.active:
        users = assoc.ap_users[m]
        if not users:
            continue
        k = users[cursors[m] % len(users)]
        cursors[m] += 1
        links[m] = (k, assoc.ue_link[k][1])
    return Pattern(tuple(links))


def es_switchings_per_slot(n_ues: int, n_active: int, n_beams: int) -> int:
    """Exhaustive-search cost: ordered user selections times beam tuples."""
    return math.perm(n_ues, n_active) * n_beams**n_active


def es_jpfs_slot(state: ScenarioState, pf: PfState, slot: int) -> Pattern:
    """Exhaustive joint PF assignment: argmax over every ordered user selection
    and beam tuple of the PF objective. Ties break toward the lexicographically
    smallest (user tuple, beam tuple)."""
    active = state.active
    ma = len(active)
    k_tot = state.n_ues
    b = state.n_beams
    if k_tot < ma:
        raise ValueError("need at least as many UEs as active APs")
    P = state.slot_powers_mw(slot)
    A_all = P[list(active)]  # (Ma, K, B)
    noise = state.noise_mw
    eta = state.radio.snr_efficiency
    coeff = state.rate_coeff
    avg = pf.avg_rate_bps
    user_tuples = np.array(list(itertools.permutations(range(k_tot), ma)))
    n_users = user_tuples.shape[0]
    n_beam_tuples = b**ma
    obj = np.empty((n_users, n_beam_tuples))
    rows = np.arange(ma)
    for j, beams in enumerate(itertools.product(range(b), repeat=ma)):
        Ab = A_all[rows, :, np.array(beams)]  # (Ma, K)
        col_total = Ab.sum(axis=0)
        S = Ab[rows[None, :], user_tuples]
        I = col_total[user_tuples] - S
        rates = coeff * np.log2(1.0 + eta * S / (noise + I))
        obj[:, j] = (rates / avg[user_tuples]).sum(axis=1)
    flat = int(np.argmax(obj))  # first max = smallest (user tuple, beam tuple)
    t, j = divmod(flat, n_beam_tuples)
    users = user_tuples[t]
    beams = np.unravel_index(j, (b,) * ma)
    links: list[Optional[tuple[int, int]]] = [None] * state.n_aps
    for i, m in enumerate(active):
        links[m] = (int(users[i]), int(beams[i]))
    return Pattern(tuple(links))


@dataclass(frozen=True)
class IsSlotResult:
    pattern: Pattern
    alpha: int
    objectives: tuple[float, ...]  # PF objective after each iteration


def is_jpfs_slot(
    state: ScenarioState, pf: PfState, slot: int, delta_th: float = 0.1
) -> IsSlotResult:
    """Iterative link-by-link PF assignment.

    The first pass places links in AP-index order, the first one interference
    free and each later one against the links already placed. Later passes
    re-optimize every link against the other fixed links (a link may keep its
    current user). The loop stops once the relative objective improvement
    between consecutive passes drops to delta_th or below. Candidate ties break
    toward the lowest (user, beam).
    """
    if delta_th <= 0:
        raise ValueError("delta_th must be positive")
    active = state.active
    ma = len(active)
    if state.n_ues < ma:
        raise ValueError("need at least as many UEs as active APs")
    P = state.slot_powers_mw(slot)
    A = P[list(active)]  # (Ma, K, B)
    noise = state.noise_mw
    eta = state.radio.snr_efficiency
    coeff = state.rate_coeff
    avg = pf.avg_rate_bps
    users = [-1] * ma
    beams = [0] * ma
    objectives: list[float] = []
    r_pre = 0.0
    alpha = 0
    while True:
        alpha += 1
        for i in range(ma):
            _update_link(A, noise, eta, coeff, avg, users, beams, i)
        pattern = _build_pattern(state, active, users, beams)
        r_iter = pf_objective(pattern, slot, state, avg)
        objectives.append(r_iter)
        if r_iter - r_pre <= delta_th * r_pre:
            break
        r_pre = r_iter
    return IsSlotResult(pattern, alpha, tuple(objectives))


def _build_pattern(state: ScenarioState, active, users, beams) -> Pattern:
    links: list[Optional[tuple[int, int]]] = [None] * state.n_aps
    for i, m in enumerate(active):
        links[m] = (users[i], beams[i])
    return Pattern(tuple(links))


def _update_link(A, noise, eta, coeff, avg, users, beams, i) -> None:
    """Re-pick link i's (user, beam) to maximize the partial-pattern objective.

    Evaluates, for every candidate, the candidate link's own rate under
    interference from the placed links plus every placed link's rate under the
    candidate's beam, so mutual interference is fully accounted for.
    """
    ma, n_ues, n_beams = A.shape
    placed = [j for j in range(ma) if j != i and users[j] >= 0]
    own_signal = A[i]  # (K, B)
    if placed:
        interf_at_ue = np.add.reduce([A[j, :, beams[j]] for j in placed])  # (K,)
    else:
        interf_at_ue = np.zeros(n_ues)
    own_rate = coeff * np.log2(1.0 + eta * own_signal / (noise + interf_at_ue[:, None]))
    total = own_rate / avg[:, None]
    if placed:
        rest = np.zeros(n_beams)
        for j in placed:
            sig_j = A[j, users[j], beams[j]]
            base_i = sum(A[jj, users[j], beams[jj]] for jj in placed if jj != j)
            interf_j = base_i + A[i, users[j], :]  # (B,): candidate beam hits UE j
            rest += coeff * np.log2(1.0 + eta * sig_j / (noise + interf_j)) / avg[users[j]]
        total = total + rest[None, :]
        for j in placed:
            total[users[j], :] = -np.inf
    flat = int(np.argmax(total))  # first max = lowest (user, beam)
    users[i], beams[i] = divmod(flat, n_beams)


class ConventionalScheduler:
    """Max-power association once per run, then independent per-AP round robin."""

    kind = SchedulerKind.CONVENTIONAL

    def __init__(self, state: ScenarioState) -> None:
        self.ledger = ComplexityLedger()
        self.association = conventional_associate(state)
        # One beam-training sweep over all beams of every active AP.
        self.ledger.add_association(state.n_beams * state.n_active)
        self._cursors = {m: 0 for m in state.active}

    def schedule(self, state: ScenarioState, pf: PfState, slot: int) -> Pattern:
        pattern = conventional_slot(state, self.association, self._cursors)
        self.ledger.add_slot(0)
        return pattern


class EsJpfsScheduler:
    """Exhaustive-search joint PF scheduling, literal enumeration every slot."""

    kind = SchedulerKind.ES_JPFS

    def __init__(self, state: ScenarioState) -> None:
        self.ledger = ComplexityLedger()

    def schedule(self, state: ScenarioState, pf: PfState, slot: int) -> Pattern:
        pattern = es_jpfs_slot(state, pf, slot)
        self.ledger.add_slot(
            es_switchings_per_slot(state.n_ues, state.n_active, state.n_beams)
        )
        return pattern


class IsJpfsScheduler:
    """Iterative-search joint PF scheduling with a relative-improvement stop."""

    kind = SchedulerKind.IS_JPFS

    def __init__(self, state: ScenarioState, delta_th: float = 0.1) -> None:
        if delta_th <= 0:
            raise ValueError("delta_th must be positive")
        self.ledger = ComplexityLedger()
        self.delta_th = delta_th

    def schedule(self, state: ScenarioState, pf: PfState, slot: int) -> Pattern:
        result = is_jpfs_slot(state, pf, slot, self.delta_th)
        self.ledger.add_slot(
            result.alpha * state.n_beams * state.n_active, alpha=result.alpha
        )
        return result.pattern


Scheduler = ConventionalScheduler | EsJpfsScheduler | IsJpfsScheduler


def make_scheduler(
    kind: SchedulerKind, state: ScenarioState, delta_th: float = 0.1
) -> Scheduler:
    if kind == SchedulerKind.CONVENTIONAL:
        return ConventionalScheduler(state)
    if kind == SchedulerKind.ES_JPFS:
        return EsJpfsScheduler(state)
    if kind == SchedulerKind.IS_JPFS:
        return IsJpfsScheduler(state, delta_th)
    raise ValueError(f"unknown scheduler kind: {kind}")


def run_slot(
    scheduler: Scheduler, state: ScenarioState, pf: PfState, slot: int
):
    """Dispatch one slot: choose a pattern, evaluate it, update PF state.

    Returns (pattern, PatternRates, new PfState). Scheduled users receive their
    with-interference rate; everyone else contributes zero to the PF update.
    """
    pattern = scheduler.schedule(state, pf, slot)
    prates = evaluate_pattern(pattern, slot, state)
    inst = np.zeros(state.n_ues)
    for m, k, _ in pattern.active():
        inst[k] += prates.per_link_rate_bps[m]
    return pattern, prates, pf_update(pf, inst)
