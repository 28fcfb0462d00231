"""Scenario assembly, the per-frame simulation loop, metrics, and sweeps.

One root seed feeds three independent named streams (flow endpoints/demands,
obstacle phase, random-policy draws), so policies compared on the same seed
see identical traffic and identical obstacles.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import baselines
from .channel import ChannelError, RadioParams
from .geometry import CommWindow, GeometryError, ObstacleField, TrainConfig, comm_window
from .ratemodel import FlowSpec, PhysicalModel, RunSetup
from .scheduler import FrameSchedule, run_policy, select_modes, validate_schedule

# sub-stream tags under the root seed
_STREAM_FLOWS = 0
_STREAM_FIELD = 1
_STREAM_POLICY = 2


class ConfigError(ValueError):
    """A scenario parameter is missing, malformed, or out of range."""


class InvariantError(RuntimeError):
    """A policy emitted a schedule that failed validation; always a bug."""


@dataclass(frozen=True)
class SimConfig:
    """Flat experiment description (defaults: the simulated 28 GHz system)."""

    position_a: float = 0.0     # locomotive fronts [m]
    position_b: float = 0.0
    speed_a_kmh: float = 300.0
    speed_b_kmh: float = 150.0
    train_length: float = 200.0
    mr_per_train: int = 16
    track_gap: float = 150.0    # lateral separation of the two lines [m]

    tx_power_mw: float = 1000.0
    carrier_ghz: float = 28.0
    bandwidth_mhz: float = 1200.0
    noise_dbm_per_mhz: float = -134.0
    path_loss_exp: float = 2.0
    hpbw_deg: float = 30.0
    si_cancellation: float = 1e-13
    efficiency: float = 1.0

    blockage: float = 0.4       # obstacle coverage fraction of each period
    period: float = 50.0        # obstacle period along the track [m]
    band_lo: float = 50.0       # obstacle band, y range between the lines [m]
    band_hi: float = 100.0

    flows: int = 200
    demand_min_mbit: float = 30.0
    demand_max_mbit: float = 50.0

    slot_us: float = 18.0
    sched_phase_us: float = 850.0
    tx_slots: int = 2000

    dis: float = 250.0          # communication threshold [m]
    policy: str = "heuristic"
    seed: int = 1
    # whether obstacles attenuate interference paths as they do signal; the
    # interference sum as published counts every parallel link regardless
    shield_interference: bool = False


@dataclass(frozen=True)
class Scenario:
    """A fully drawn experiment: traffic and obstacle phase already sampled."""

    train_a: TrainConfig
    train_b: TrainConfig
    radio: RadioParams
    field: ObstacleField
    dis: float
    flows: tuple[FlowSpec, ...]
    slot_duration: float
    sched_slots: int
    tx_slots: int
    policy: str
    seed: int
    shield_interference: bool = False


@dataclass(frozen=True)
class FrameStats:
    frame: int
    completed: int
    bits: float  # bits put on the air in the frame


@dataclass(frozen=True)
class Metrics:
    completed_flows: int
    delivered_bits: float  # payload bits, capped per flow at its demand
    throughput_bps: float  # delivered_bits over the whole window M * dt
    frames: int
    slots: int
    per_frame: tuple[FrameStats, ...] = field(default=())


@dataclass
class RunResult:
    metrics: Metrics
    schedules: list[FrameSchedule]
    setup: RunSetup


def build_scenario(config: SimConfig) -> Scenario:
    """Validate a config and draw its seeded randomness into a Scenario."""
    c = config
    for name in ("train_length", "track_gap", "period", "slot_us"):
        if getattr(c, name) <= 0:
            raise ConfigError(f"{name} must be positive, got {getattr(c, name)}")
    if c.mr_per_train < 1:
        raise ConfigError(f"mr_per_train must be >= 1, got {c.mr_per_train}")
    if not 0.0 <= c.blockage <= 1.0:
        raise ConfigError(f"blockage must lie in [0, 1], got {c.blockage}")
    if not 0.0 < c.band_lo < c.band_hi < c.track_gap:
        raise ConfigError(
            f"obstacle band [{c.band_lo}, {c.band_hi}] must sit strictly "
            f"between the track lines (gap {c.track_gap})"
        )
    if c.policy not in baselines.POLICIES:
        raise ConfigError(f"policy must be one of {baselines.POLICIES}, got {c.policy!r}")
    max_flows = 2 * c.mr_per_train * c.mr_per_train
    if not 1 <= c.flows <= max_flows:
        raise ConfigError(f"flows must lie in [1, 2*N^2] = [1, {max_flows}], got {c.flows}")
    if not 0.0 < c.demand_min_mbit <= c.demand_max_mbit:
        raise ConfigError(
            f"demand range [{c.demand_min_mbit}, {c.demand_max_mbit}] Mbit invalid"
        )
    if c.tx_slots < 1 or c.sched_phase_us < 0:
        raise ConfigError("need tx_slots >= 1 and sched_phase_us >= 0")
    if c.dis < c.train_length:
        raise ConfigError(f"dis must be >= train_length, got {c.dis}")
    if c.speed_a_kmh == c.speed_b_kmh:
        raise ConfigError("equal speeds give an unbounded communication window")
    if min(c.speed_a_kmh, c.speed_b_kmh) < 0:
        raise ConfigError("speeds must be >= 0")

    try:
        radio = RadioParams(
            tx_power_mw=c.tx_power_mw,
            carrier_hz=c.carrier_ghz * 1e9,
            bandwidth_hz=c.bandwidth_mhz * 1e6,
            noise_dbm_per_mhz=c.noise_dbm_per_mhz,
            path_loss_exp=c.path_loss_exp,
            hpbw_deg=c.hpbw_deg,
            si_cancellation=c.si_cancellation,
            efficiency=c.efficiency,
        )
        train_a = TrainConfig(c.position_a, c.speed_a_kmh / 3.6, c.train_length,
                              c.mr_per_train, c.track_gap)
        train_b = TrainConfig(c.position_b, c.speed_b_kmh / 3.6, c.train_length,
                              c.mr_per_train, 0.0)
        field_rng = np.random.default_rng([c.seed, _STREAM_FIELD])
        obstacle_field = ObstacleField(
            period_len=c.period,
            blocked_len=c.blockage * c.period,
            band_lo=c.band_lo,
            band_hi=c.band_hi,
            phase=float(field_rng.uniform(0.0, c.period)),
        )
    except (GeometryError, ChannelError) as exc:
        raise ConfigError(str(exc)) from exc

    # ordered cross-train pairs, drawn without replacement
    na = nb = c.mr_per_train
    pairs = [(i, na + j) for i in range(na) for j in range(nb)]
    pairs += [(na + j, i) for j in range(nb) for i in range(na)]
    flow_rng = np.random.default_rng([c.seed, _STREAM_FLOWS])
    picks = flow_rng.choice(len(pairs), size=c.flows, replace=False)
    demands = flow_rng.uniform(c.demand_min_mbit * 1e6, c.demand_max_mbit * 1e6,
                               size=c.flows)
    flows = tuple(
        FlowSpec(k, pairs[int(p)][0], pairs[int(p)][1], float(d))
        for k, (p, d) in enumerate(zip(picks, demands))
    )
    return Scenario(
        train_a=train_a,
        train_b=train_b,
        radio=radio,
        field=obstacle_field,
        dis=c.dis,
        flows=flows,
        slot_duration=c.slot_us * 1e-6,
        sched_slots=math.ceil(c.sched_phase_us / c.slot_us),
        tx_slots=c.tx_slots,
        policy=c.policy,
        seed=c.seed,
        shield_interference=c.shield_interference,
    )


def build_setup(scenario: Scenario) -> RunSetup:
    window = comm_window(
        scenario.train_a, scenario.train_b, scenario.dis,
        scenario.slot_duration, scenario.sched_slots, scenario.tx_slots,
    )
    model = PhysicalModel(
        scenario.train_a, scenario.train_b, scenario.field, scenario.radio, window,
        shield_interference=scenario.shield_interference,
    )
    return RunSetup(scenario.flows, window, model)


def _selector_for(scenario: Scenario):
    if scenario.policy == "heuristic":
        return select_modes
    if scenario.policy == "direct":
        return baselines.direct_only_modes
    if scenario.policy == "hybrid":
        return baselines.hybrid_selective_modes
    if scenario.policy == "random":
        rng = np.random.default_rng([scenario.seed, _STREAM_POLICY])

        def selector(flows, frame, setup):
            return baselines.random_modes(flows, frame, setup, rng)

        return selector
    raise ConfigError(f"unknown policy {scenario.policy!r}")


def run(scenario: Scenario) -> RunResult:
    """Simulate one scenario end to end; every frame must validate."""
    setup = build_setup(scenario)
    schedules, flows, total = run_policy(setup, _selector_for(scenario))
    violations = validate_schedule(schedules, setup)
    if violations:
        raise InvariantError(
            f"policy {scenario.policy!r} emitted an infeasible schedule: "
            + "; ".join(violations[:5])
        )
    delivered = sum(f.demand - max(f.remaining, 0.0) for f in flows)
    duration = setup.window.slot_count * setup.window.slot_duration
    per_frame = tuple(
        FrameStats(
            fs.frame,
            len(fs.completed),
            sum(e.rate for rec in fs.records for e in rec.entries)
            * setup.window.slot_duration,
        )
        for fs in schedules
    )
    metrics = Metrics(
        completed_flows=total,
        delivered_bits=delivered,
        throughput_bps=delivered / duration if duration > 0 else 0.0,
        frames=setup.window.frame_count,
        slots=setup.window.slot_count,
        per_frame=per_frame,
    )
    return RunResult(metrics, schedules, setup)


# -- parameter sweeps --------------------------------------------------------

SWEEP_AXES = ("dis", "speed_b", "speed_a", "offset", "blockage", "flows")


@dataclass(frozen=True)
class SweepRow:
    axis: str
    value: float
    seed: int
    policy: str
    metrics: Metrics


def apply_axis(config: SimConfig, axis: str, value: float) -> SimConfig:
    """One sweep point: move the named parameter, keep everything else."""
    if axis == "dis":
        return replace(config, dis=value)
    if axis == "speed_b":
        return replace(config, speed_b_kmh=value)
    if axis == "speed_a":
        # keep the configured speed difference while moving the pair
        delta = config.speed_a_kmh - config.speed_b_kmh
        return replace(config, speed_a_kmh=value, speed_b_kmh=value - delta)
    if axis == "offset":
        return replace(config, position_b=config.position_a + value)
    if axis == "blockage":
        return replace(config, blockage=value)
    if axis == "flows":
        return replace(config, flows=int(value))
    raise ConfigError(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")


def _run_cell(task) -> SweepRow:
    axis, value, seed, policy, config = task
    cell = replace(apply_axis(config, axis, value), seed=seed, policy=policy)
    result = run(build_scenario(cell))
    metrics = replace(result.metrics, per_frame=())  # keep rows light
    return SweepRow(axis, value, seed, policy, metrics)


def worker_count(requested: int | None = None) -> int:
    """Worker processes for sweeps; the T2T_THREADS env var caps it."""
    count = requested if requested is not None else (os.cpu_count() or 1)
    cap = os.environ.get("T2T_THREADS")
    if cap is not None:
        try:
            count = min(count, int(cap))
        except ValueError as exc:
            raise ConfigError(f"T2T_THREADS must be an integer, got {cap!r}") from exc
    return max(1, count)


def sweep(
    config: SimConfig,
    axis: str,
    values: list[float],
    seeds: list[int],
    policies: list[str] | None = None,
    workers: int | None = None,
) -> list[SweepRow]:
    """Cartesian grid of independent seeded runs.

    Row order (and content) is a pure function of the arguments, regardless
    of how many workers execute the grid.
    """
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")
    if policies is None:
        policies = [config.policy]
    tasks = [
        (axis, float(v), int(s), p, config)
        for v in values
        for s in seeds
        for p in policies
    ]
    if not tasks:
        return []
    n_workers = min(worker_count(workers), len(tasks))
    if n_workers <= 1 or len(tasks) == 1:
        return [_run_cell(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(_run_cell, tasks, chunksize=1))
