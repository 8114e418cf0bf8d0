"""Architecture, micro-op schedule and analog validation windows."""

from .banks import Banks, ComplementStale, MuxNetwork, ScheduleViolation
from .engine import (
    Accelerator,
    BlockSizeMismatch,
    RunReport,
    exec_chi,
    exec_complement,
    exec_iota,
    exec_pi,
    exec_rho,
    exec_round,
    exec_theta,
    hash_message,
    init_message,
    init_state,
    map_block,
    read_state,
    run_block,
)
from .analog import AnalogProbe, AnalogWindow, analog_first_round, analog_window, attach_probe, idle_energy
from .schedule import CycleTrace, MicroOp
