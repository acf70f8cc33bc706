"""Multi-AP 60 GHz WLAN concurrent-transmission simulator with joint PF scheduling."""

from .channel import (
    ChannelParams,
    ChannelRealization,
    beam_gain,
    boresight_gain_db,
    pathloss_db,
    realize,
    received_power_dbm,
)
from .geometry import (
    Beam,
    BeamCodebook,
    Placement,
    Room,
    default_ap_grid,
    departure_angles,
    drop_ues,
    uniform_codebook,
)
from .metrics import (
    ComplexitySummary,
    MetricsReport,
    accumulate_user_rates,
    complexity_summary,
    fairness_index,
    spatial_reuse,
)
from .rate import (
    Pattern,
    PatternRates,
    RadioParams,
    ScenarioState,
    evaluate_pattern,
    link_rate_bps,
    pf_objective,
    sinr_linear,
)
from .sched import (
    ComplexityLedger,
    PfState,
    SchedulerKind,
    conventional_associate,
    conventional_slot,
    es_jpfs_slot,
    es_switchings_per_slot,
    is_jpfs_slot,
    make_scheduler,
    pf_update,
    run_slot,
)
from .sim import (
    CENTRAL_CLUSTER_APS,
    ComparisonResult,
    EsBudgetError,
    RunResult,
    ScenarioConfig,
    ScenarioError,
    SchedulerSpec,
    SweepCell,
    build_state,
    compare,
    run,
    sweep_ap_count,
    sweep_density,
)

__version__ = "0.1.0"
