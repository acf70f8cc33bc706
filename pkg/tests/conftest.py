"""Shared builders for seeded scheduler test instances."""

import numpy as np
import pytest

from mmwsched import ChannelParams, RadioParams, Room
from mmwsched import channel, geometry
from mmwsched.rate import ScenarioState
from mmwsched.sched import PfState, SchedulerKind, make_scheduler, run_slot


def make_instance(
    seed: int,
    n_active: int,
    n_ues: int,
    n_beams: int,
    warmup_slots: int = 20,
    params: ChannelParams | None = None,
    extra_slots: int = 1,
):
    """Small seeded scenario with an organically evolved PF state.

    APs come from the default grid, UEs from a uniform drop, and the PF
    averages from warmup_slots of actual IS scheduling so the instance matches
    the simulator's operating regime rather than an arbitrary state.
    """
    room = Room(20.0, 10.0, 4.0, 1.0)
    aps = geometry.default_ap_grid(room)[:n_active]
    codebook = geometry.uniform_codebook(360.0 / n_beams, 45.0)
    ues = geometry.drop_ues(room, n_ues / room.floor_area_m2, seed)
    assert len(ues) == n_ues
    placement = geometry.Placement(aps, ues)
    params = params or ChannelParams()
    realization = channel.realize(
        params, placement.n_aps, n_ues, warmup_slots + extra_slots, seed + 7777
    )
    state = ScenarioState(
        room, placement, codebook, tuple(range(n_active)), params, RadioParams(), realization
    )
    pf = PfState.initial(n_ues)
    scheduler = make_scheduler(SchedulerKind.IS_JPFS, state)
    for slot in range(warmup_slots):
        _, _, pf = run_slot(scheduler, state, pf, slot)
    return state, pf, warmup_slots


@pytest.fixture(scope="session")
def small_instances():
    """The criterion-3 instance family: 100 seeds cycling M, K, B."""
    instances = []
    for seed in range(100):
        n_active = 2 + seed % 2
        n_ues = 4 + seed % 3
        n_beams = 2 + seed % 2
        instances.append(
            (seed, make_instance(seed, n_active, n_ues, n_beams))
        )
    return instances
