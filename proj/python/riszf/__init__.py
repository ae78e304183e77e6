"""Zero-forcing precoding and phase optimization for the RIS-aided
broadcast channel.

The heavy lifting lives in the compiled extension; this package
re-exports its surface.
"""

from riszf._riszf import (  # noqa: F401
    AlgorithmResult,
    ChannelRealization,
    ConfigError,
    DegenerateAllocationError,
    PowerAllocation,
    ScenarioConfig,
    Vec3,
    dbm_to_watt,
    draw_realization,
    path_loss_db,
    run_algorithm,
    run_sweep,
    run_trial,
    sweep_csv,
    ula_steering,
    waterfill,
)

__all__ = [
    "AlgorithmResult",
    "ChannelRealization",
    "ConfigError",
    "DegenerateAllocationError",
    "PowerAllocation",
    "ScenarioConfig",
    "Vec3",
    "dbm_to_watt",
    "draw_realization",
    "path_loss_db",
    "run_algorithm",
    "run_sweep",
    "run_trial",
    "sweep_csv",
    "ula_steering",
    "waterfill",
]
