"""Slot-rate kernel with two interchangeable backends.

The per-slot SINR loop dominates the simulator's runtime, so it exists twice:
a compiled Cython extension (`_ckernel`) and a pure-Python twin (`pykernel`)
with identical operation order, selected at import time. Results are
bit-identical between the two (the extension is built with FP contraction
disabled); `benchmarks/bench_backends.py` compares their speed.

Set T2T_BACKEND=python or T2T_BACKEND=compiled to force a backend.
"""

from __future__ import annotations

import os

from ..channel import RadioParams
from ..geometry import ObstacleField

_env = os.environ.get("T2T_BACKEND", "auto").lower()

if _env == "python":
    from . import pykernel as _impl
elif _env == "compiled":
    from . import _ckernel as _impl  # type: ignore[no-redef]
else:
    try:
        from . import _ckernel as _impl  # type: ignore[no-redef]
    except ImportError:
        from . import pykernel as _impl  # type: ignore[no-redef]


def backend_name() -> str:
    return "compiled" if _impl.__name__.endswith("_ckernel") else "python"


def build_kernel(
    node_x0: list[float],
    node_v: list[float],
    node_y: list[float],
    field: ObstacleField,
    radio: RadioParams,
    slot_duration: float,
    shield_interference: bool = False,
):
    """Construct the active backend's kernel for one scenario's node set."""
    return _impl.Kernel(
        list(map(float, node_x0)),
        list(map(float, node_v)),
        list(map(float, node_y)),
        field.phase,
        field.period_len,
        field.blocked_len,
        field.band_lo,
        field.band_hi,
        radio.k0 * radio.tx_power_mw,
        -0.5 * radio.path_loss_exp,
        radio.max_gain_dbi,
        radio.side_lobe_dbi,
        radio.main_lobe_half_deg,
        radio.hpbw_deg,
        radio.noise_mw,
        radio.si_mw,
        radio.efficiency * radio.bandwidth_hz,
        slot_duration,
        shield_interference,
    )
