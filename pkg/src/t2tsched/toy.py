"""Hand-sized worked instance: two trains with three MRs each, nine flows,
three frames of four transmission slots, and per-frame book rates (units per
slot) instead of the physical channel. Used as an exact-solver benchmark:
the best possible schedule completes all nine flows.

Node numbering: flat 0-2 are train A's MR1-MR3, flat 3-5 are train B's
MR4-MR6. A zero rate means the link is blocked in that frame.
"""

from __future__ import annotations

from .geometry import CommWindow
from .ratemodel import FlowSpec, MatrixModel, RunSetup

# traffic units to move, row -> column (directed)
DEMAND = (
    (0, 0, 0, 18, 0, 2),
    (0, 0, 0, 0, 12, 4),
    (0, 0, 0, 0, 0, 6),
    (0, 0, 5, 0, 0, 0),
    (6, 0, 0, 0, 0, 0),
    (0, 10, 5, 0, 0, 0),
)

# link rates per frame, units per slot, symmetric
RATES_FRAME_1 = (
    (0, 4, 4, 3, 0, 0),
    (4, 0, 4, 0, 0, 0),
    (4, 4, 0, 0, 0, 3),
    (3, 0, 0, 0, 4, 4),
    (0, 0, 0, 4, 0, 4),
    (0, 0, 3, 4, 4, 0),
)
RATES_FRAME_2 = (
    (0, 4, 4, 0, 0, 0),
    (4, 0, 4, 0, 0, 3),
    (4, 4, 0, 0, 3, 3),
    (0, 0, 0, 0, 4, 4),
    (0, 0, 3, 4, 0, 4),
    (0, 3, 3, 4, 4, 0),
)
RATES_FRAME_3 = (
    (0, 4, 4, 0, 0, 1),
    (4, 0, 4, 0, 3, 2),
    (4, 4, 0, 3, 3, 3),
    (0, 0, 3, 0, 4, 4),
    (0, 3, 3, 4, 0, 4),
    (1, 2, 3, 4, 4, 0),
)

BEST_COMPLETED = 9  # a schedule finishing every flow in the window exists


def toy_setup(tx_slots: int = 4) -> RunSetup:
    """The worked instance as a runnable setup (book rates, dt = 1)."""
    frames = len((RATES_FRAME_1, RATES_FRAME_2, RATES_FRAME_3))
    window = CommWindow(
        slot_count=frames * tx_slots,
        slot_duration=1.0,
        sched_slots=0,
        tx_slots=tx_slots,
        frame_count=frames,
    )
    model = MatrixModel(
        [RATES_FRAME_1, RATES_FRAME_2, RATES_FRAME_3], window, na=3, nb=3
    )
    flows = []
    for i in range(6):
        for j in range(6):
            if DEMAND[i][j] > 0:
                flows.append(FlowSpec(len(flows), i, j, float(DEMAND[i][j])))
    return RunSetup(tuple(flows), window, model)
