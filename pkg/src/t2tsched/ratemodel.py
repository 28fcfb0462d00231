"""Rate providers for the scheduler.

`PhysicalModel` derives everything from geometry + the link budget through
the slot kernel. `MatrixModel` replays hand-given per-frame rate tables
(used by tiny worked instances and the exact-solver benchmarks); it has no
geometry, so every other node is a relay candidate and parallel links do not
interfere.
"""

from __future__ import annotations

from dataclasses import dataclass

from .channel import RadioParams
from .engine import build_kernel
from .geometry import (
    CommWindow,
    NodeId,
    ObstacleField,
    TrainConfig,
    boundary_abscissas,
    node_position,
    snap_right_to_mr,
)


@dataclass(frozen=True)
class FlowSpec:
    """One directed traffic demand between MRs on different trains."""

    id: int
    src: int  # flat node index
    dst: int
    demand: float  # bits (traffic units for matrix instances)


class PhysicalModel:
    """Geometry-backed rates. Nodes use flat indices: train A's MRs first."""

    def __init__(
        self,
        train_a: TrainConfig,
        train_b: TrainConfig,
        field: ObstacleField,
        radio: RadioParams,
        window: CommWindow,
        shield_interference: bool = False,
    ):
        self.train_a = train_a
        self.train_b = train_b
        self.field = field
        self.radio = radio
        self.window = window
        self.na = train_a.mr_count
        self.nb = train_b.mr_count
        self.node_count = self.na + self.nb
        x0, v, y = [], [], []
        for train in (train_a, train_b):
            for i in range(train.mr_count):
                x0.append(train.initial_position - train.mr_offset(i))
                v.append(train.speed)
                y.append(train.lateral_y)
        self.kernel = build_kernel(
            x0, v, y, field, radio, window.slot_duration, shield_interference
        )

    @property
    def dt(self) -> float:
        return self.window.slot_duration

    def node_id(self, flat: int) -> NodeId:
        if flat < self.na:
            return NodeId("A", flat)
        return NodeId("B", flat - self.na)

    def flat(self, node: NodeId) -> int:
        return node.index if node.train == "A" else self.na + node.index

    def train_of(self, flat: int) -> TrainConfig:
        return self.train_a if flat < self.na else self.train_b

    def position(self, flat: int, slot: int):
        return node_position(
            self.node_id(flat), self.train_a, self.train_b, slot, self.dt
        )

    def blocked(self, i: int, j: int, slot: int) -> bool:
        return self.kernel.blocked(i, j, slot)

    def direct_rate(self, i: int, j: int, slot: int) -> float:
        return self.kernel.solo_rate(i, j, slot, False)

    def relay_rate(self, i: int, via: int, j: int, slot: int) -> float:
        return self.kernel.relay_rate(i, via, j, slot)

    def slot_rates(self, link_tx, link_rx, slot: int):
        return self.kernel.slot_rates(link_tx, link_rx, slot)

    def all_nodes(self):
        return range(self.node_count)

    def relay_candidates(self, src: int, dst: int, slot: int) -> list[int]:
        """Geometric candidates for relaying a blocked src->dst flow.

        From each endpoint, take the two clear-region boundary abscissas on
        the opposite train's line and snap each rightward to the next MR
        there; a candidate on the endpoint's opposite train keeps the
        cross-band hop clear while the same-train hop is never blocked.
        """
        out = []
        for endpoint, other in ((src, dst), (dst, src)):
            target = self.train_of(other)
            pos = self.position(endpoint, slot)
            for absc in boundary_abscissas(pos, target.lateral_y, self.field):
                idx = snap_right_to_mr(absc, target, slot, self.dt)
                if idx is not None:
                    out.append(idx if target is self.train_a else self.na + idx)
        return out


class MatrixModel:
    """Per-frame rate tables: rates[frame][i][j], zero meaning blocked.

    Rates are book values (units per slot, dt = 1); interference and
    self-interference are already folded into the table.
    """

    def __init__(self, rates, window: CommWindow, na: int, nb: int):
        self.rates = rates
        self.window = window
        self.na = na
        self.nb = nb
        self.node_count = na + nb
        if len(rates) < window.frame_count:
            raise ValueError("need one rate table per frame")

    @property
    def dt(self) -> float:
        return 1.0

    def _rate(self, i: int, j: int, slot: int) -> float:
        return float(self.rates[self.window.frame_of_slot(slot)][i][j])

    def blocked(self, i: int, j: int, slot: int) -> bool:
        return self._rate(i, j, slot) <= 0.0

    def direct_rate(self, i: int, j: int, slot: int) -> float:
        return self._rate(i, j, slot)

    def relay_rate(self, i: int, via: int, j: int, slot: int) -> float:
        return min(self._rate(i, via, slot), self._rate(via, j, slot))

    def slot_rates(self, link_tx, link_rx, slot: int):
        return [self._rate(t, r, slot) for t, r in zip(link_tx, link_rx)]

    def all_nodes(self):
        return range(self.node_count)

    def relay_candidates(self, src: int, dst: int, slot: int) -> list[int]:
        # no geometry to narrow the search: every node is a candidate
        return list(range(self.node_count))


@dataclass(frozen=True)
class RunSetup:
    """Everything a policy run needs: flows, frame layout, rate provider."""

    flows: tuple[FlowSpec, ...]
    window: CommWindow
    model: PhysicalModel | MatrixModel

    @property
    def node_count(self) -> int:
        return self.model.node_count
