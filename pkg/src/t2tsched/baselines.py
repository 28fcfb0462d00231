"""Comparison policies sharing the frame packer and validator.

direct: every currently-clear flow transmits single-hop, blocked flows sit
the frame out. hybrid: each flow takes whichever of direct / best-of-all
relays is faster right now, however many node roles that costs. random:
a coin picks the mode and a random node the relay; direct flows still get
priority in the packing order.
"""

from __future__ import annotations

from .ratemodel import RunSetup
from .scheduler import Flow

POLICIES = ("heuristic", "direct", "hybrid", "random")


def direct_only_modes(flows: list[Flow], frame: int, setup: RunSetup):
    model = setup.model
    lo, hi = setup.window.tx_slot_range(frame)
    fa: list[Flow] = []
    probes: dict[int, tuple[bool, bool]] = {}
    if lo >= hi:
        return fa, [], probes
    for f in flows:
        if f.remaining <= 0.0:
            continue
        f.mode, f.relay, f.plan_rate = None, -1, 0.0
        b = model.blocked(f.src, f.dst, lo)
        probes[f.id] = (b, b)
        if not b:
            f.mode = "direct"
            f.plan_rate = model.direct_rate(f.src, f.dst, lo)
            fa.append(f)
    return fa, [], probes


def hybrid_selective_modes(flows: list[Flow], frame: int, setup: RunSetup):
    """Fastest mode right now, scanning every other node as a relay.

    Ties go to direct: it occupies two node roles instead of four.
    """
    model = setup.model
    lo, hi = setup.window.tx_slot_range(frame)
    fa: list[Flow] = []
    fb: list[Flow] = []
    probes: dict[int, tuple[bool, bool]] = {}
    if lo >= hi:
        return fa, fb, probes
    for f in flows:
        if f.remaining <= 0.0:
            continue
        f.mode, f.relay, f.plan_rate = None, -1, 0.0
        blocked = model.blocked(f.src, f.dst, lo)
        probes[f.id] = (blocked, blocked)
        direct = 0.0 if blocked else model.direct_rate(f.src, f.dst, lo)
        best_relay, best_rate = -1, 0.0
        for v in model.all_nodes():
            if v == f.src or v == f.dst:
                continue
            r = model.relay_rate(f.src, v, f.dst, lo)
            if r > best_rate:
                best_relay, best_rate = v, r
        if best_rate > direct:
            f.mode, f.relay, f.plan_rate = "relay", best_relay, best_rate
            fb.append(f)
        elif direct > 0.0:
            f.mode, f.plan_rate = "direct", direct
            fa.append(f)
    return fa, fb, probes


def random_modes(flows: list[Flow], frame: int, setup: RunSetup, rng):
    """Coin-flipped mode per flow and frame; relay drawn uniformly from the
    other nodes. Draws consume the run's seeded policy stream."""
    model = setup.model
    lo, hi = setup.window.tx_slot_range(frame)
    fa: list[Flow] = []
    fb: list[Flow] = []
    probes: dict[int, tuple[bool, bool]] = {}
    if lo >= hi:
        return fa, fb, probes
    for f in flows:
        if f.remaining <= 0.0:
            continue
        f.mode, f.relay, f.plan_rate = None, -1, 0.0
        b = model.blocked(f.src, f.dst, lo)
        probes[f.id] = (b, b)
        if int(rng.integers(0, 2)) == 0:
            f.mode = "direct"
            f.plan_rate = 0.0 if b else model.direct_rate(f.src, f.dst, lo)
            fa.append(f)
        else:
            others = [v for v in model.all_nodes() if v != f.src and v != f.dst]
            v = others[int(rng.integers(0, len(others)))]
            f.mode, f.relay = "relay", v
            f.plan_rate = model.relay_rate(f.src, v, f.dst, lo)
            fb.append(f)
    return fa, fb, probes
