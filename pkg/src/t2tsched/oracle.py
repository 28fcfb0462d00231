"""Exact solver for tiny instances by exhaustive slot-by-slot search.

Ground truth for the heuristic: maximizes the number of completed flows over
every feasible combination of per-frame modes and per-slot activations,
subject to the same rules the validator enforces. Branch-and-bound with the
heuristic's own result as the starting incumbent, an optimistic completion
bound for pruning, and state memoization. Instance size is gated hard; the
search is hopeless beyond desk scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .ratemodel import MatrixModel, RunSetup
from .scheduler import (
    FrameSchedule,
    SlotRecord,
    TxEntry,
    run_policy,
    select_modes,
)

GATE_MAX_FRAMES = 3
GATE_MAX_TX_SLOTS = 6
GATE_MAX_MRS_PER_TRAIN = 3
GATE_MAX_FLOWS = 4
GATE_MAX_FLOWS_MATRIX = 9  # book-rate instances stay searchable a bit longer

_MEMO_CAP = 4_000_000


class OracleGateError(ValueError):
    """Instance exceeds the exhaustive-search size gate."""


@dataclass
class OracleResult:
    optimum: int
    schedules: list[FrameSchedule]


def _check_gate(setup: RunSetup) -> None:
    model = setup.model
    is_matrix = isinstance(model, MatrixModel)
    max_flows = GATE_MAX_FLOWS_MATRIX if is_matrix else GATE_MAX_FLOWS
    na, nb = model.na, model.nb
    checks = (
        (len(setup.flows) <= max_flows, f"flows {len(setup.flows)} > {max_flows}"),
        (setup.window.frame_count <= GATE_MAX_FRAMES,
         f"frames {setup.window.frame_count} > {GATE_MAX_FRAMES}"),
        (setup.window.tx_slots <= GATE_MAX_TX_SLOTS,
         f"tx slots {setup.window.tx_slots} > {GATE_MAX_TX_SLOTS}"),
        (max(na, nb) <= GATE_MAX_MRS_PER_TRAIN,
         f"MRs per train {max(na, nb)} > {GATE_MAX_MRS_PER_TRAIN}"),
    )
    for ok, msg in checks:
        if not ok:
            raise OracleGateError(f"instance too large for exhaustive search: {msg}")


def exhaustive_optimum(setup: RunSetup) -> OracleResult:
    """Maximum number of completable flows, with one witness schedule.

    The witness always passes `validate_schedule`; the count is never below
    the heuristic's on the same instance (the heuristic seeds the search).
    """
    _check_gate(setup)
    inc_schedules, _, inc_total = run_policy(setup, select_modes)
    search = _Search(setup)
    best, witness = search.run(inc_total)
    if witness is None:
        return OracleResult(inc_total, inc_schedules)
    return OracleResult(best, witness)


class _Search:
    def __init__(self, setup: RunSetup):
        self.setup = setup
        self.model = setup.model
        self.window = setup.window
        self.specs = list(setup.flows)
        self.n = len(self.specs)
        self.dt = setup.model.dt
        self.frames = [
            self.window.tx_slot_range(t) for t in range(self.window.frame_count)
        ]
        self.ub = self._upper_rates()
        self.best = -1
        self.best_path: list[tuple[int, SlotRecord]] | None = None
        self.path: list[tuple[int, SlotRecord]] = []
        self.seen: set = set()

    # -- optimistic per-frame rate ceilings ---------------------------------

    def _link_upper(self, t: int, r: int, frame: int) -> float:
        model = self.model
        if isinstance(model, MatrixModel):
            return model.direct_rate(t, r, self.frames[frame][0])
        lo, hi = self.frames[frame]
        k = model.kernel
        dx0 = k.x0[t] - k.x0[r]
        dv = (k.v[t] - k.v[r]) * k.dt
        cands = [float(lo), float(hi - 1)]
        if dv != 0.0:
            cross = -dx0 / dv
            if lo < cross < hi - 1:
                cands.append(cross)
        dy = k.y[t] - k.y[r]
        d2min = min((dx0 + dv * c) ** 2 + dy * dy for c in cands)
        sig = k.k0pt * k.main_gain_lin * d2min ** k.half_exp
        return k.eta_w * math.log2(1.0 + sig / k.noise_mw)

    def _upper_rates(self):
        """ub[flow][frame]: no realized per-slot rate can exceed this."""
        ub = []
        for spec in self.specs:
            row = []
            for t in range(len(self.frames)):
                best = self._link_upper(spec.src, spec.dst, t)
                for v in self.model.all_nodes():
                    if v == spec.src or v == spec.dst:
                        continue
                    hop = min(
                        self._link_upper(spec.src, v, t),
                        self._link_upper(v, spec.dst, t),
                    )
                    best = max(best, hop)
                row.append(best)
            ub.append(row)
        return ub

    def _potential(self, remaining, frame: int, slot: int) -> int:
        """How many unfinished flows could still complete, ignoring contention."""
        count = 0
        for p in range(self.n):
            if remaining[p] <= 0.0:
                continue
            cap = 0.0
            for t in range(frame, len(self.frames)):
                lo, hi = self.frames[t]
                slots = hi - max(lo, slot) if t == frame else hi - lo
                if slots > 0:
                    cap += self.ub[p][t] * slots * self.dt
            if cap >= remaining[p] * (1.0 - 1e-12):
                count += 1
        return count

    # -- per-slot option sets ------------------------------------------------

    def _options(self, frame: int, slot: int, remaining, modes):
        """(flow position, relay-or--1) choices that can deliver at this slot."""
        model = self.model
        opts: list[list[int]] = []
        for p in range(self.n):
            if remaining[p] <= 0.0:
                opts.append([])
                continue
            spec = self.specs[p]
            if modes[p] is not None:
                relay = modes[p]
                if relay < 0:
                    ok = not model.blocked(spec.src, spec.dst, slot)
                else:
                    ok = not model.blocked(spec.src, relay, slot) and not model.blocked(
                        relay, spec.dst, slot
                    )
                opts.append([relay] if ok else [])
                continue
            choices: list[int] = []
            if not model.blocked(spec.src, spec.dst, slot):
                choices.append(-1)
            for v in model.all_nodes():
                if v == spec.src or v == spec.dst:
                    continue
                if not model.blocked(spec.src, v, slot) and not model.blocked(
                    v, spec.dst, slot
                ):
                    choices.append(v)
            opts.append(choices)
        return opts

    # -- search --------------------------------------------------------------

    def run(self, incumbent: int):
        self.best = incumbent
        remaining = [float(s.demand) for s in self.specs]
        completed = sum(1 for r in remaining if r <= 0.0)
        self._frame(0, remaining, completed)
        return self.best, self.best_path and self._assemble(self.best_path)

    def _improve(self, completed: int) -> None:
        self.best = completed
        self.best_path = [(f, rec) for f, rec in self.path]

    def _frame(self, frame: int, remaining, completed: int) -> None:
        if frame == len(self.frames):
            return
        lo, hi = self.frames[frame]
        self._slot(frame, lo, hi, remaining, [None] * self.n, completed)

    def _slot(self, frame: int, slot: int, hi: int, remaining, modes, completed) -> None:
        if completed + self._potential(remaining, frame, slot) <= self.best:
            return
        if slot == hi:
            self._frame(frame + 1, remaining, completed)
            return
        key = (slot, tuple(remaining), tuple(modes))
        if key in self.seen:
            return
        if len(self.seen) < _MEMO_CAP:
            self.seen.add(key)
        opts = self._options(frame, slot, remaining, modes)
        chosen: list[tuple[int, int]] = []
        self._assign(0, frame, slot, hi, remaining, modes, completed, opts, chosen, 0, 0)

    def _assign(
        self, p, frame, slot, hi, remaining, modes, completed, opts, chosen,
        tx_mask, rx_mask,
    ) -> None:
        if p == self.n:
            self._transmit(frame, slot, hi, remaining, modes, completed, chosen)
            return
        spec = self.specs[p]
        for relay in opts[p]:
            if relay < 0:
                tx_bits = 1 << spec.src
                rx_bits = 1 << spec.dst
            else:
                tx_bits = (1 << spec.src) | (1 << relay)
                rx_bits = (1 << relay) | (1 << spec.dst)
            if (tx_mask & tx_bits) or (rx_mask & rx_bits):
                continue
            chosen.append((p, relay))
            self._assign(
                p + 1, frame, slot, hi, remaining, modes, completed, opts, chosen,
                tx_mask | tx_bits, rx_mask | rx_bits,
            )
            chosen.pop()
        # the flow idles this slot
        self._assign(
            p + 1, frame, slot, hi, remaining, modes, completed, opts, chosen,
            tx_mask, rx_mask,
        )

    def _transmit(self, frame, slot, hi, remaining, modes, completed, chosen) -> None:
        if not chosen:
            self._slot(frame, slot + 1, hi, remaining, modes, completed)
            return
        link_tx: list[int] = []
        link_rx: list[int] = []
        for p, relay in chosen:
            spec = self.specs[p]
            if relay < 0:
                link_tx.append(spec.src)
                link_rx.append(spec.dst)
            else:
                link_tx.extend((spec.src, relay))
                link_rx.extend((relay, spec.dst))
        link_rates = self.model.slot_rates(link_tx, link_rx, slot)
        rates: list[float] = []
        li = 0
        for _, relay in chosen:
            if relay < 0:
                rates.append(link_rates[li])
                li += 1
            else:
                rates.append(min(link_rates[li], link_rates[li + 1]))
                li += 2
        new_remaining = list(remaining)
        new_modes = list(modes)
        new_completed = completed
        entries = []
        for (p, relay), rate in zip(chosen, rates):
            entries.append(TxEntry(self.specs[p].id, relay, rate))
            new_modes[p] = relay
            new_remaining[p] = new_remaining[p] - rate * self.dt
            if new_remaining[p] <= 0.0:
                new_completed += 1
        self.path.append((frame, SlotRecord(slot, tuple(entries))))
        if new_completed > self.best:
            self._improve(new_completed)
        self._slot(frame, slot + 1, hi, new_remaining, new_modes, new_completed)
        self.path.pop()

    # -- witness assembly ----------------------------------------------------

    def _assemble(self, path) -> list[FrameSchedule]:
        remaining = {s.id: float(s.demand) for s in self.specs}
        per_frame: dict[int, FrameSchedule] = {}
        for frame, rec in path:
            fs = per_frame.setdefault(frame, FrameSchedule(frame, [], (), {}))
            fs.records.append(rec)
            done = []
            for e in rec.entries:
                fs.modes[e.flow] = e.relay
                before = remaining[e.flow]
                remaining[e.flow] = before - e.rate * self.dt
                if before > 0.0 and remaining[e.flow] <= 0.0:
                    done.append(e.flow)
            if done:
                fs.completed = tuple(list(fs.completed) + done)
        return [per_frame[t] for t in sorted(per_frame)]
