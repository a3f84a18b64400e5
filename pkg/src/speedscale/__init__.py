"""Energy-minimizing non-preemptive scheduling on speed-scalable processors."""

from .model import (
    MULTI, NON_PREEMPTIVE, PREEMPTIVE, SINGLE, InfeasibleError, Instance, InternalError, Job,
    ParameterError, Processor, ProcessorSet, Schedule, Segment, SpeedScaleError,
    UnknownReferenceError, UnsupportedModeError, energy, is_agreeable, total_energy, verify,
)
from .instances import generate
from .lp import build_config_lp, solve_lp
from .multi import solve_multi
from .oracle import bell_tilde, brute_force_single
from .single import solve_single
from .yds import yds_schedule

__version__ = "0.1.0"

__all__ = [
    "MULTI", "NON_PREEMPTIVE", "PREEMPTIVE", "SINGLE", "InfeasibleError", "Instance",
    "InternalError", "Job", "ParameterError", "Processor", "ProcessorSet", "Schedule", "Segment",
    "SpeedScaleError", "UnknownReferenceError", "UnsupportedModeError", "bell_tilde",
    "brute_force_single", "build_config_lp", "energy", "generate", "is_agreeable", "solve_lp",
    "solve_multi", "solve_single", "total_energy", "verify", "yds_schedule",
]
