"""Minimum-power RB assignment, power control and robust beamforming
for downlink multi-antenna URLLC-OFDMA under bounded channel uncertainty."""

from .config import ScenarioConfig, SolverOptions, load_config, table1
from .scheduler import ScheduleResult, solve_ncp, solve_rw_l1, validate_schedule
from .model import (
    ChannelSet,
    GainMatrix,
    build_gain_matrix,
    generate_channels,
    noise_power,
    path_loss_linear,
    worst_case_error,
    worst_case_gain,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelSet",
    "GainMatrix",
    "ScenarioConfig",
    "ScheduleResult",
    "SolverOptions",
    "solve_ncp",
    "solve_rw_l1",
    "validate_schedule",
    "build_gain_matrix",
    "generate_channels",
    "load_config",
    "noise_power",
    "path_loss_linear",
    "table1",
    "worst_case_error",
    "worst_case_gain",
]
