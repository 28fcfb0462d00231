"""Track-side geometry: train and relay positions over time, the periodic
obstacle band between the two tracks, exact line-of-sight blockage tests,
relay-candidate boundary rays, and the inter-train communication window.

Coordinates are 2-D top view: x runs along the tracks (direction of travel),
y is the lateral offset. Each train occupies one horizontal line y = const;
the obstacle band lies strictly between the two lines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

Point = tuple[float, float]


class GeometryError(ValueError):
    """Invalid geometric input (bad node index, degenerate segment, ...)."""


class UnboundedWindowError(GeometryError):
    """Equal train speeds: the trains never separate, the window is infinite."""


@dataclass(frozen=True)
class TrainConfig:
    """One train: locomotive-front position, constant speed, roof-mounted MRs."""

    initial_position: float  # x of the locomotive front at slot 0 [m]
    speed: float             # [m/s], constant
    length: float            # [m]
    mr_count: int            # number of mobile relays on the roof
    lateral_y: float         # y of this train's track line [m]

    def __post_init__(self):
        if self.length <= 0:
            raise GeometryError(f"train length must be positive, got {self.length}")
        if self.mr_count < 1:
            raise GeometryError(f"mr_count must be >= 1, got {self.mr_count}")
        if self.speed < 0:
            raise GeometryError(f"speed must be >= 0, got {self.speed}")

    def mr_offset(self, index: int) -> float:
        """Distance of MR `index` behind the locomotive front.

        MRs are spread evenly along the roof with half-spacing margins, so
        none sits exactly on a coupler.
        """
        if not 0 <= index < self.mr_count:
            raise GeometryError(f"MR index {index} out of range [0, {self.mr_count})")
        return (index + 0.5) * (self.length / self.mr_count)

    def mr_x(self, index: int, time_s: float) -> float:
        x0 = self.initial_position - self.mr_offset(index)
        return x0 + self.speed * time_s


@dataclass(frozen=True, order=True)
class NodeId:
    """A mobile relay: which train it rides on and its index along the roof."""

    train: str  # 'A' or 'B'
    index: int

    def __post_init__(self):
        if self.train not in ("A", "B"):
            raise GeometryError(f"train must be 'A' or 'B', got {self.train!r}")


@dataclass(frozen=True)
class ObstacleField:
    """Periodic rectangular obstacles between the tracks.

    Obstacle n occupies [phase + n*period_len, phase + n*period_len + blocked_len]
    in x and [band_lo, band_hi] in y, for every integer n.
    """

    period_len: float   # obstacle + gap [m]
    blocked_len: float  # obstacle length [m]
    band_lo: float      # near edge of the band (train-B side) [m]
    band_hi: float      # far edge of the band (train-A side) [m]
    phase: float = 0.0  # x of obstacle 0's left edge [m]

    def __post_init__(self):
        if self.period_len <= 0:
            raise GeometryError(f"period_len must be positive, got {self.period_len}")
        if not 0 <= self.blocked_len <= self.period_len:
            raise GeometryError(
                f"blocked_len must lie in [0, period_len], got {self.blocked_len}"
            )
        if not self.band_lo < self.band_hi:
            raise GeometryError(
                f"band_lo must be < band_hi, got [{self.band_lo}, {self.band_hi}]"
            )

    @property
    def gap_len(self) -> float:
        return self.period_len - self.blocked_len


@dataclass(frozen=True)
class CommWindow:
    """Communication window in slots plus the TDMA superframe layout."""

    slot_count: int      # M: total slots the trains stay within the threshold
    slot_duration: float  # [s]
    sched_slots: int     # scheduling-phase slots per frame
    tx_slots: int        # transmission-phase slots per frame
    frame_count: int     # T = ceil(M / (sched_slots + tx_slots))

    @property
    def frame_len(self) -> int:
        return self.sched_slots + self.tx_slots

    def first_tx_slot(self, frame: int) -> int:
        return frame * self.frame_len + self.sched_slots

    def tx_slot_range(self, frame: int) -> tuple[int, int]:
        """Transmission-phase slots of `frame` as [lo, hi), clipped to M."""
        lo = self.first_tx_slot(frame)
        hi = min((frame + 1) * self.frame_len, self.slot_count)
        return lo, max(lo, hi)

    def frame_of_slot(self, slot: int) -> int:
        return slot // self.frame_len


def node_position(
    node: NodeId, train_a: TrainConfig, train_b: TrainConfig,
    slot_index: int, slot_duration: float,
) -> Point:
    """Position of a node at the start of a slot (deterministic in the inputs)."""
    if slot_index < 0:
        raise GeometryError(f"slot_index must be >= 0, got {slot_index}")
    train = train_a if node.train == "A" else train_b
    # identical operation order to the slot kernel: x0 + v * (k * dt)
    x0 = train.initial_position - train.mr_offset(node.index)
    return (x0 + train.speed * (slot_index * slot_duration), train.lateral_y)


def node_distance(
    a: NodeId, b: NodeId, train_a: TrainConfig, train_b: TrainConfig,
    slot_index: int, slot_duration: float,
) -> float:
    ax, ay = node_position(a, train_a, train_b, slot_index, slot_duration)
    bx, by = node_position(b, train_a, train_b, slot_index, slot_duration)
    return math.hypot(bx - ax, by - ay)


def los_blocked(a: Point, b: Point, field: ObstacleField) -> bool:
    """Exact test: does segment (a, b) hit any obstacle rectangle?

    The segment is clipped to the band slab [band_lo, band_hi]; the clipped
    x-interval is then checked against the periodic obstacle intervals in
    closed form. No sampling, hence no false negatives at grazing incidence.
    """
    if a == b:
        raise GeometryError("degenerate segment: endpoints coincide")
    if field.blocked_len <= 0.0:
        return False
    # canonical endpoint order so the test is exactly symmetric in (a, b)
    if (a[1], a[0]) > (b[1], b[0]):
        a, b = b, a
    ax, ay = a
    bx, by = b
    dy = by - ay
    if dy == 0.0:
        if not field.band_lo <= ay <= field.band_hi:
            return False
        x_lo, x_hi = (ax, bx) if ax <= bx else (bx, ax)
    else:
        t1 = (field.band_lo - ay) / dy
        t2 = (field.band_hi - ay) / dy
        t_lo = max(min(t1, t2), 0.0)
        t_hi = min(max(t1, t2), 1.0)
        if t_lo > t_hi:
            return False
        dx = bx - ax
        x1 = ax + t_lo * dx
        x2 = ax + t_hi * dx
        x_lo, x_hi = (x1, x2) if x1 <= x2 else (x2, x1)
    # exists n with [phase + n*len, phase + n*len + Bd] meeting [x_lo, x_hi]?
    n_min = math.ceil((x_lo - field.phase - field.blocked_len) / field.period_len)
    n_max = math.floor((x_hi - field.phase) / field.period_len)
    return n_min <= n_max


def boundary_abscissas(
    endpoint: Point, target_y: float, field: ObstacleField
) -> tuple[float, float]:
    """Left boundaries of the two clear regions seen from `endpoint`.

    A blocked node sees two obstacle-free windows on the opposite track line:
    one to its left (between the previous obstacle and the one shadowing it)
    and one to its right (past that obstacle). Each window's left edge is the
    ray from the endpoint grazing the right edge of the bounding obstacle:
    the far band corner for the left window, the near corner for the right
    one. Returns the two abscissas where those rays cross y = target_y.
    """
    ex, ey = endpoint
    if ey == target_y:
        raise GeometryError("endpoint lies on the target line")
    if field.band_lo <= ey <= field.band_hi:
        raise GeometryError("endpoint lies inside the obstacle band")
    above = ey > field.band_hi
    near_y = field.band_hi if above else field.band_lo
    far_y = field.band_lo if above else field.band_hi

    # which periodic unit is the endpoint over, and is it over obstacle or gap
    rel = ex - field.phase
    unit = math.floor(rel / field.period_len)
    frac = rel - unit * field.period_len
    if frac < field.blocked_len:  # over obstacle `unit`
        left_corner_x = field.phase + (unit - 1) * field.period_len + field.blocked_len
        right_corner_x = field.phase + unit * field.period_len + field.blocked_len
    else:  # over the gap following obstacle `unit`
        left_corner_x = field.phase + unit * field.period_len + field.blocked_len
        right_corner_x = field.phase + (unit + 1) * field.period_len + field.blocked_len

    def cross(corner_x: float, corner_y: float) -> float:
        if corner_y == ey:
            raise GeometryError("obstacle corner at endpoint height")
        return ex + (target_y - ey) * (corner_x - ex) / (corner_y - ey)

    return cross(left_corner_x, far_y), cross(right_corner_x, near_y)


def snap_right_to_mr(
    abscissa: float, train: TrainConfig, slot_index: int, slot_duration: float
) -> int | None:
    """Index of the train's MR with smallest x >= abscissa, or None."""
    if not math.isfinite(abscissa):
        raise GeometryError(f"abscissa must be finite, got {abscissa}")
    time_s = slot_index * slot_duration
    best = None
    best_x = math.inf
    for i in range(train.mr_count):
        x = train.mr_x(i, time_s)
        if abscissa <= x < best_x:
            best, best_x = i, x
    return best


def comm_window(
    train_a: TrainConfig, train_b: TrainConfig, dis: float,
    slot_duration: float, sched_slots: int, tx_slots: int,
) -> CommWindow:
    """Slots until the inter-train distance irrevocably exceeds `dis`.

    The threshold is reached when the locomotive gap equals dis - L_t. The
    initial-offset term enters with the sign of the slower-minus-faster
    position, so a faster train starting behind (an overtake) lengthens the
    window, and the result is invariant under swapping the train labels.
    """
    lt = max(train_a.length, train_b.length)
    if dis < lt:
        raise GeometryError(f"dis must be >= train length {lt}, got {dis}")
    if slot_duration <= 0:
        raise GeometryError("slot_duration must be positive")
    if sched_slots < 0 or tx_slots <= 0:
        raise GeometryError("need sched_slots >= 0 and tx_slots >= 1")
    if train_a.speed == train_b.speed:
        raise UnboundedWindowError("equal speeds: communication window is unbounded")
    if train_a.speed > train_b.speed:
        offset = train_b.initial_position - train_a.initial_position
    else:
        offset = train_a.initial_position - train_b.initial_position
    speed_gap = abs(train_a.speed - train_b.speed)
    numer = (dis - lt) + offset
    m = max(0, math.ceil(numer / (speed_gap * slot_duration)))
    frames = math.ceil(m / (sched_slots + tx_slots)) if m > 0 else 0
    return CommWindow(
        slot_count=m,
        slot_duration=slot_duration,
        sched_slots=sched_slots,
        tx_slots=tx_slots,
        frame_count=frames,
    )
