"""Energy-efficient two-zone power allocation for downlink massive-MIMO NOMA."""

from .allocator import (
    AllocationResult,
    ZonePartition,
    equal_power_allocation,
    partition_zones,
    solve,
    solve_baseline_single_zone,
    solve_many,
)
from .channel import UserGeometry, draw_channel, generate_user_geometry, mrt_precoder
from .config import SystemConfig, convert_units
from .experiments import brute_force_oracle, run_trial, run_trials, sweep

__all__ = [
    "AllocationResult",
    "SystemConfig",
    "UserGeometry",
    "ZonePartition",
    "brute_force_oracle",
    "convert_units",
    "draw_channel",
    "equal_power_allocation",
    "generate_user_geometry",
    "mrt_precoder",
    "partition_zones",
    "run_trial",
    "run_trials",
    "solve",
    "solve_baseline_single_zone",
    "solve_many",
    "sweep",
]
