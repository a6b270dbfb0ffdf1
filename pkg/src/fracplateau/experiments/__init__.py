"""Configuration-driven s-sweeps and their reports."""

from .config import ConfigError, ProblemTemplate, SweepConfig, load_config, sweep_config_from_dict
from .report import ROW_COLUMNS, emit_report
from .sweeps import (PreconditionError, SweepReport, SweepRow, default_threads,
                     run_detachment_sweep, run_stickiness_sweep)

__all__ = [
    "ConfigError", "ProblemTemplate", "SweepConfig", "load_config", "sweep_config_from_dict",
    "ROW_COLUMNS", "emit_report", "PreconditionError", "SweepReport", "SweepRow",
    "default_threads", "run_detachment_sweep", "run_stickiness_sweep",
]
