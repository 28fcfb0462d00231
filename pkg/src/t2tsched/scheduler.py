"""Three-stage transmission scheduling plus the feasibility validator.

Stage 1 picks a relay for a blocked flow from the geometric candidate set
(fastest min-hop rate wins). Stage 2 assigns each pending flow a per-frame
mode: direct when clear at the frame's first transmission slot, relay when
blocked at both the first and last, skipped otherwise. Stage 3 packs the
frame slot by slot: direct flows first, each group in ascending order of the
slots it still needs, admitting flows whenever their four (relay) or two
(direct) node roles are free, re-admitting whenever a completion or a drop
frees capacity.

The validator re-derives every per-slot rate and replays the traffic
recursion, flagging any violation of the per-frame/per-slot feasibility
rules; policies never ship a frame that does not validate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .ratemodel import FlowSpec, RunSetup


class SchedulingError(ValueError):
    """Invalid scheduler input (bad relay, nonpositive rate, ...)."""


@dataclass(eq=False)
class Flow:
    """Mutable per-run flow state; mode fields are reassigned every frame."""

    id: int
    src: int
    dst: int
    demand: float
    remaining: float
    completed_frame: int | None = None
    mode: str | None = None  # 'direct' | 'relay' | None (skipped)
    relay: int = -1
    plan_rate: float = 0.0

    @classmethod
    def from_spec(cls, spec: FlowSpec) -> "Flow":
        return cls(spec.id, spec.src, spec.dst, spec.demand, spec.demand)

    def roles(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """(tx nodes, rx nodes) this flow occupies in its current mode."""
        if self.mode == "relay":
            return (self.src, self.relay), (self.relay, self.dst)
        return (self.src,), (self.dst,)


class NodeOccupancy:
    """Per-node transmit/receive busy flags, cleared at every frame start."""

    def __init__(self, node_count: int):
        self.tx_busy = [False] * node_count
        self.rx_busy = [False] * node_count

    def can_admit(self, flow: Flow) -> bool:
        tx, rx = flow.roles()
        return not (
            any(self.tx_busy[n] for n in tx) or any(self.rx_busy[n] for n in rx)
        )

    def acquire(self, flow: Flow) -> None:
        tx, rx = flow.roles()
        for n in tx:
            self.tx_busy[n] = True
        for n in rx:
            self.rx_busy[n] = True

    def release(self, flow: Flow) -> None:
        tx, rx = flow.roles()
        for n in tx:
            self.tx_busy[n] = False
        for n in rx:
            self.rx_busy[n] = False


@dataclass(frozen=True)
class TxEntry:
    flow: int
    relay: int  # -1 for direct
    rate: float  # realized end-to-end rate this slot


@dataclass(frozen=True)
class SlotRecord:
    slot: int
    entries: tuple[TxEntry, ...]


@dataclass
class FrameSchedule:
    """What actually went on the air in one frame."""

    frame: int
    records: list[SlotRecord]
    completed: tuple[int, ...]
    modes: dict[int, int]  # flow id -> relay node (-1 direct) assigned this frame
    probes: dict[int, tuple[bool, bool]] = field(default_factory=dict)


def slots_needed(flow: Flow, slot_duration: float) -> float:
    """Fractional slots to finish the flow at its per-frame planning rate."""
    if flow.plan_rate <= 0.0:
        raise SchedulingError(f"flow {flow.id} has no positive planning rate")
    return flow.remaining / (flow.plan_rate * slot_duration)


def _order_key(flow: Flow, slot_duration: float):
    # rate-0 flows (possible under the random policy) sort last
    if flow.plan_rate <= 0.0:
        return (math.inf, flow.id)
    return (flow.remaining / (flow.plan_rate * slot_duration), flow.id)


def select_relay(flow: Flow, frame: int, setup: RunSetup):
    """Best relay for a blocked flow: fastest min-hop rate, tie to the lowest
    node index. Returns (relay flat index, rate) or None."""
    slot = setup.window.first_tx_slot(frame)
    model = setup.model
    cands = sorted(set(model.relay_candidates(flow.src, flow.dst, slot)))
    best = None
    best_rate = 0.0
    for c in cands:
        if c == flow.src or c == flow.dst:
            continue
        rate = model.relay_rate(flow.src, c, flow.dst, slot)
        if rate > best_rate:
            best, best_rate = c, rate
    if best is None:
        return None
    return best, best_rate


def select_modes(flows: list[Flow], frame: int, setup: RunSetup):
    """Per-frame mode assignment; returns (direct set, relay set).

    Blocking is probed at the first and last transmission slot of the frame.
    A flow blocked at both probes goes hunting for a relay; blocked only at
    the first, it sits the frame out (the link is about to clear anyway).
    """
    model = setup.model
    first = setup.window.first_tx_slot(frame)
    lo, hi = setup.window.tx_slot_range(frame)
    fa: list[Flow] = []
    fb: list[Flow] = []
    probes: dict[int, tuple[bool, bool]] = {}
    if lo >= hi:
        return fa, fb, probes
    last = hi - 1
    for f in flows:
        if f.remaining <= 0.0:
            continue
        f.mode, f.relay, f.plan_rate = None, -1, 0.0
        b_first = model.blocked(f.src, f.dst, first)
        b_last = model.blocked(f.src, f.dst, last)
        probes[f.id] = (b_first, b_last)
        if not b_first:
            f.mode = "direct"
            f.plan_rate = model.direct_rate(f.src, f.dst, first)
            fa.append(f)
        elif b_last:
            sel = select_relay(f, frame, setup)
            if sel is not None:
                f.mode = "relay"
                f.relay, f.plan_rate = sel
                fb.append(f)
    return fa, fb, probes


def schedule_frame(
    fa: list[Flow], fb: list[Flow], frame: int, setup: RunSetup
) -> tuple[FrameSchedule, int]:
    """Pack one frame's transmission phase; returns the schedule and the
    number of flows completed in it."""
    model = setup.model
    dt = model.dt
    lo, hi = setup.window.tx_slot_range(frame)
    key = lambda f: _order_key(f, dt)
    fre = sorted(fa, key=key) + sorted(fb, key=key)
    modes = {f.id: (f.relay if f.mode == "relay" else -1) for f in fre}
    occ = NodeOccupancy(setup.node_count)
    trs: list[Flow] = []  # active set, kept sorted by flow id
    in_trs: set[int] = set()
    records: list[SlotRecord] = []
    completed: list[int] = []
    refill = True
    for slot in range(lo, hi):
        if refill:
            for f in fre:
                if f.id not in in_trs and occ.can_admit(f):
                    occ.acquire(f)
                    in_trs.add(f.id)
                    trs.append(f)
            trs.sort(key=lambda f: f.id)
            refill = False
        if not trs:
            break  # nothing admitted means nothing left to admit
        link_tx: list[int] = []
        link_rx: list[int] = []
        for f in trs:
            if f.mode == "relay":
                link_tx.extend((f.src, f.relay))
                link_rx.extend((f.relay, f.dst))
            else:
                link_tx.append(f.src)
                link_rx.append(f.dst)
        link_rates = model.slot_rates(link_tx, link_rx, slot)
        rates: list[float] = []
        li = 0
        for f in trs:
            if f.mode == "relay":
                rates.append(min(link_rates[li], link_rates[li + 1]))
                li += 2
            else:
                rates.append(link_rates[li])
                li += 1
        records.append(
            SlotRecord(
                slot,
                tuple(
                    TxEntry(f.id, f.relay if f.mode == "relay" else -1, r)
                    for f, r in zip(trs, rates)
                ),
            )
        )
        for f, r in zip(trs, rates):
            f.remaining = f.remaining - r * dt
        survivors: list[Flow] = []
        for f, r in zip(trs, rates):
            if r <= 0.0:
                # blocked mid-frame: abandon for this frame, free the nodes
                occ.release(f)
                in_trs.discard(f.id)
                fre.remove(f)
                refill = True
            elif f.remaining <= 0.0:
                f.completed_frame = frame
                completed.append(f.id)
                occ.release(f)
                in_trs.discard(f.id)
                fre.remove(f)
                refill = True
            else:
                survivors.append(f)
        trs = survivors
    return FrameSchedule(frame, records, tuple(completed), modes), len(completed)


def run_policy(setup: RunSetup, mode_selector) -> tuple[list[FrameSchedule], list[Flow], int]:
    """Frame loop shared by every policy: select modes, pack, accumulate.

    `mode_selector(flows, frame, setup) -> (fa, fb, probes)`.
    """
    flows = [Flow.from_spec(s) for s in setup.flows]
    schedules: list[FrameSchedule] = []
    total = 0
    for frame in range(setup.window.frame_count):
        if all(f.remaining <= 0.0 for f in flows):
            break
        fa, fb, probes = mode_selector(flows, frame, setup)
        sched, completed = schedule_frame(fa, fb, frame, setup)
        sched.probes = probes
        schedules.append(sched)
        total += completed
    return schedules, flows, total


# -- feasibility validation -------------------------------------------------

_RATE_RTOL = 1e-12


def validate_schedule(schedules: list[FrameSchedule], setup: RunSetup) -> list[str]:
    """Check a set of frame schedules against the per-frame/per-slot rules.

    Returns human-readable violations (empty list = feasible): one mode per
    flow per frame; transmissions only inside the frame's transmission
    phase; at most one transmit and one receive role per node per slot;
    relays distinct from the flow's endpoints; recorded rates reproducible
    from the rate model; completion flags exactly where the replayed
    remaining traffic crosses zero; completed flows never transmitting
    again.
    """
    model = setup.model
    dt = model.dt
    specs = {s.id: s for s in setup.flows}
    remaining = {s.id: float(s.demand) for s in setup.flows}
    completed_at: dict[int, int] = {}
    out: list[str] = []
    seen_frames: set[int] = set()
    for fs in schedules:
        if fs.frame in seen_frames or not 0 <= fs.frame < setup.window.frame_count:
            out.append(f"frame {fs.frame}: duplicate or out-of-window frame index")
            continue
        seen_frames.add(fs.frame)
        lo, hi = setup.window.tx_slot_range(fs.frame)
        mode_seen: dict[int, int] = {}
        frame_done: list[int] = []
        prev_slot = -1
        for rec in fs.records:
            if rec.slot <= prev_slot:
                out.append(f"frame {fs.frame}: slot {rec.slot} out of order or duplicated")
            prev_slot = rec.slot
            if not lo <= rec.slot < hi:
                out.append(
                    f"frame {fs.frame}: transmission in slot {rec.slot} outside "
                    f"the transmission phase [{lo}, {hi})"
                )
            tx_used: dict[int, int] = {}
            rx_used: dict[int, int] = {}
            for e in rec.entries:
                spec = specs.get(e.flow)
                if spec is None:
                    out.append(f"frame {fs.frame} slot {rec.slot}: unknown flow {e.flow}")
                    continue
                if e.flow in completed_at:
                    out.append(
                        f"frame {fs.frame} slot {rec.slot}: flow {e.flow} transmits "
                        f"after completing in frame {completed_at[e.flow]}"
                    )
                if e.flow in mode_seen:
                    if mode_seen[e.flow] != e.relay:
                        out.append(
                            f"frame {fs.frame}: flow {e.flow} uses two modes in one frame"
                        )
                else:
                    mode_seen[e.flow] = e.relay
                if e.relay >= 0 and e.relay in (spec.src, spec.dst):
                    out.append(
                        f"frame {fs.frame} slot {rec.slot}: flow {e.flow} relays "
                        f"through its own endpoint {e.relay}"
                    )
                if e.relay >= 0:
                    uses_tx = (spec.src, e.relay)
                    uses_rx = (e.relay, spec.dst)
                else:
                    uses_tx = (spec.src,)
                    uses_rx = (spec.dst,)
                for n in uses_tx:
                    tx_used[n] = tx_used.get(n, 0) + 1
                for n in uses_rx:
                    rx_used[n] = rx_used.get(n, 0) + 1
            for n, c in tx_used.items():
                if c > 1:
                    out.append(
                        f"frame {fs.frame} slot {rec.slot}: node {n} transmits for {c} flows"
                    )
            for n, c in rx_used.items():
                if c > 1:
                    out.append(
                        f"frame {fs.frame} slot {rec.slot}: node {n} receives for {c} flows"
                    )
            # re-derive the slot's rates in canonical (flow id) order
            entries = sorted(
                (e for e in rec.entries if e.flow in specs), key=lambda e: e.flow
            )
            link_tx: list[int] = []
            link_rx: list[int] = []
            for e in entries:
                spec = specs[e.flow]
                if e.relay >= 0:
                    link_tx.extend((spec.src, e.relay))
                    link_rx.extend((e.relay, spec.dst))
                else:
                    link_tx.append(spec.src)
                    link_rx.append(spec.dst)
            link_rates = model.slot_rates(link_tx, link_rx, rec.slot)
            li = 0
            for e in entries:
                if e.relay >= 0:
                    expect = min(link_rates[li], link_rates[li + 1])
                    li += 2
                else:
                    expect = link_rates[li]
                    li += 1
                if not math.isclose(e.rate, expect, rel_tol=_RATE_RTOL, abs_tol=0.0):
                    out.append(
                        f"frame {fs.frame} slot {rec.slot}: flow {e.flow} rate "
                        f"{e.rate!r} does not match the channel's {expect!r}"
                    )
                before = remaining[e.flow]
                remaining[e.flow] = before - e.rate * dt
                if before > 0.0 and remaining[e.flow] <= 0.0:
                    completed_at[e.flow] = fs.frame
                    frame_done.append(e.flow)
        if sorted(fs.completed) != sorted(frame_done):
            out.append(
                f"frame {fs.frame}: completion flags {sorted(fs.completed)} disagree "
                f"with the traffic replay {sorted(frame_done)}"
            )
    return out
