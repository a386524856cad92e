"""Time-stepped multi-band cell simulator."""

from .channel import (
    CQI_SINR_DB,
    ChannelParams,
    ChannelState,
    init_channel,
    realize_rates,
    rsrq_db,
    sinr_to_cqi,
    stationary_cqi,
)
from .config import (
    ALGORITHMS,
    ConfigError,
    ScenarioConfig,
    config_from_dict,
    desk_scenario,
    dump_config,
    load_config,
    named_scenario,
)
from .engine import CellState, StepRecord, apply_handovers, init_cell, run_episode, step
from .snapshot import snapshot_instance

__all__ = [
    "ALGORITHMS",
    "CQI_SINR_DB",
    "CellState",
    "ChannelParams",
    "ChannelState",
    "ConfigError",
    "ScenarioConfig",
    "StepRecord",
    "apply_handovers",
    "config_from_dict",
    "desk_scenario",
    "dump_config",
    "init_cell",
    "init_channel",
    "load_config",
    "named_scenario",
    "realize_rates",
    "rsrq_db",
    "run_episode",
    "sinr_to_cqi",
    "snapshot_instance",
    "stationary_cqi",
    "step",
]
