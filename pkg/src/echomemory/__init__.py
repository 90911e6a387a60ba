"""Photon-echo quantum memory toolkit for three-level atomic ensembles."""
from . import analytic, bloch, ensemble, phasematch, protocol
from .bloch import AtomState
from .ensemble import MediumConfig, SimGrid, efficiency_sweep, run_simulation
from .protocol import ControlOrder, ProtocolKind, PulseSchedule, ScheduleError, build_schedule

__all__ = [
    "analytic",
    "bloch",
    "ensemble",
    "phasematch",
    "protocol",
    "AtomState",
    "MediumConfig",
    "SimGrid",
    "run_simulation",
    "efficiency_sweep",
    "ControlOrder",
    "ProtocolKind",
    "PulseSchedule",
    "ScheduleError",
    "build_schedule",
]
