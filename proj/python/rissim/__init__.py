"""Python bindings for the RIS-aided uplink simulator."""

from ._core import (
    ConfigError,
    Error,
    SystemConfig,
    achievable_rate,
    build_pilots,
    cfo_kernel,
    cfr_from_cir,
    dft_matrix,
    format_double,
    generate_channels,
    grid_search,
    pgm_optimize,
    project_unit_modulus,
    rate_gradient,
    ris_training_schedule,
    run_experiment,
    train,
    zadoff_chu,
)

__all__ = [
    "ConfigError",
    "Error",
    "SystemConfig",
    "achievable_rate",
    "build_pilots",
    "cfo_kernel",
    "cfr_from_cir",
    "dft_matrix",
    "format_double",
    "generate_channels",
    "grid_search",
    "pgm_optimize",
    "project_unit_modulus",
    "rate_gradient",
    "ris_training_schedule",
    "run_experiment",
    "train",
    "zadoff_chu",
]
