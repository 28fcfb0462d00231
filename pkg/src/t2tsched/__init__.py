"""Deterministic simulator and scheduling library for mmWave train-to-train
communication with full-duplex mobile relays: channel + blockage geometry,
the three-stage heuristic scheduler, baseline policies, and an exhaustive
exact solver for tiny instances.
"""

from .channel import RadioParams, antenna_gain, k0_for_carrier
from .geometry import (
    CommWindow,
    NodeId,
    ObstacleField,
    TrainConfig,
    boundary_abscissas,
    comm_window,
    los_blocked,
    node_distance,
    node_position,
    snap_right_to_mr,
)
from .oracle import OracleGateError, OracleResult, exhaustive_optimum
from .ratemodel import FlowSpec, MatrixModel, PhysicalModel, RunSetup
from .scheduler import (
    Flow,
    FrameSchedule,
    NodeOccupancy,
    schedule_frame,
    select_modes,
    select_relay,
    slots_needed,
    validate_schedule,
)
from .simcore import (
    Metrics,
    Scenario,
    SimConfig,
    build_scenario,
    build_setup,
    run,
    sweep,
)

__version__ = "0.1.0"
