"""Command-line front end: run / sweep / oracle / validate, CSV out.

Config files are flat INI documents with sections mirroring the scenario
fields; every value has a default, so all keys (and the file itself) are
optional. See configs/default.ini for the reference document.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys

from . import simcore
from .baselines import POLICIES
from .oracle import OracleGateError, exhaustive_optimum
from .scheduler import FrameSchedule, SlotRecord, TxEntry, run_policy, select_modes, validate_schedule
from .simcore import ConfigError, InvariantError, SimConfig
from .toy import toy_setup

CSV_HEADER = "axis,value,seed,policy,completed_flows,delivered_bits,throughput_bps,frames,slots"

# (section, key) -> (SimConfig field, parser)
_KEYMAP = {
    ("trains", "position_a"): ("position_a", float),
    ("trains", "position_b"): ("position_b", float),
    ("trains", "speed_a_kmh"): ("speed_a_kmh", float),
    ("trains", "speed_b_kmh"): ("speed_b_kmh", float),
    ("trains", "length"): ("train_length", float),
    ("trains", "mr_per_train"): ("mr_per_train", int),
    ("trains", "track_gap"): ("track_gap", float),
    ("radio", "tx_power_mw"): ("tx_power_mw", float),
    ("radio", "carrier_ghz"): ("carrier_ghz", float),
    ("radio", "bandwidth_mhz"): ("bandwidth_mhz", float),
    ("radio", "noise_dbm_per_mhz"): ("noise_dbm_per_mhz", float),
    ("radio", "path_loss_exp"): ("path_loss_exp", float),
    ("radio", "hpbw_deg"): ("hpbw_deg", float),
    ("radio", "si_cancellation"): ("si_cancellation", float),
    ("radio", "efficiency"): ("efficiency", float),
    ("obstacles", "blockage"): ("blockage", float),
    ("obstacles", "period"): ("period", float),
    ("obstacles", "band_lo"): ("band_lo", float),
    ("obstacles", "band_hi"): ("band_hi", float),
    ("traffic", "flows"): ("flows", int),
    ("traffic", "demand_min_mbit"): ("demand_min_mbit", float),
    ("traffic", "demand_max_mbit"): ("demand_max_mbit", float),
    ("frame", "slot_us"): ("slot_us", float),
    ("frame", "sched_phase_us"): ("sched_phase_us", float),
    ("frame", "tx_slots"): ("tx_slots", int),
    ("run", "dis"): ("dis", float),
    ("run", "policy"): ("policy", str),
    ("run", "seed"): ("seed", int),
}


def load_config(path: str | None) -> SimConfig:
    if path is None:
        return SimConfig()
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file {path!r} not found or unreadable")
    fields: dict = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            spec = _KEYMAP.get((section, key))
            if spec is None:
                raise ConfigError(f"unknown config key [{section}] {key}")
            name, cast = spec
            try:
                fields[name] = cast(raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for [{section}] {key}: {raw!r}") from exc
    return SimConfig(**fields)


def _apply_overrides(config: SimConfig, args) -> SimConfig:
    from dataclasses import replace

    if getattr(args, "seed", None) is not None:
        config = replace(config, seed=args.seed)
    policy = getattr(args, "policy", None)
    if policy is not None and policy != "all":
        config = replace(config, policy=policy)
    return config


def _metrics_row(axis, value, seed, policy, m) -> str:
    return ",".join(
        (
            axis,
            repr(float(value)),
            str(seed),
            policy,
            str(m.completed_flows),
            repr(m.delivered_bits),
            repr(m.throughput_bps),
            str(m.frames),
            str(m.slots),
        )
    )


def _write_csv(lines: list[str], out: str | None) -> None:
    text = "\n".join([CSV_HEADER] + lines) + "\n"
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


# -- subcommands -------------------------------------------------------------


def cmd_run(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    policies = list(POLICIES) if args.policy == "all" else [config.policy]
    lines = []
    dump_frames = []
    for policy in policies:
        from dataclasses import replace

        scenario = simcore.build_scenario(replace(config, policy=policy))
        result = simcore.run(scenario)
        lines.append(_metrics_row("none", 0.0, scenario.seed, policy, result.metrics))
        if args.dump:
            dump_frames.append((policy, result.schedules))
    _write_csv(lines, args.out)
    if args.dump:
        _write_dump(args.dump, config, dump_frames)
    return 0


def _write_dump(path: str, config: SimConfig, per_policy) -> None:
    from dataclasses import asdict

    doc = {
        "config": asdict(config),
        "runs": [
            {
                "policy": policy,
                "frames": [
                    {
                        "frame": fs.frame,
                        "completed": list(fs.completed),
                        "modes": {str(k): v for k, v in fs.modes.items()},
                        "records": [
                            {
                                "slot": rec.slot,
                                "entries": [[e.flow, e.relay, e.rate] for e in rec.entries],
                            }
                            for rec in fs.records
                        ],
                    }
                    for fs in schedules
                ],
            }
            for policy, schedules in per_policy
        ],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def cmd_sweep(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip() != ""]
    except ValueError:
        raise ConfigError(f"bad --values list: {args.values!r}")
    if not values:
        raise ConfigError("--values must name at least one sweep point")
    if args.seeds < 1:
        raise ConfigError(f"--seeds must be >= 1, got {args.seeds}")
    seeds = [config.seed + i for i in range(args.seeds)]
    policies = list(POLICIES) if args.policy == "all" else [config.policy]
    rows = simcore.sweep(config, args.axis, values, seeds, policies)
    lines = [
        _metrics_row(r.axis, r.value, r.seed, r.policy, r.metrics) for r in rows
    ]
    _write_csv(lines, args.out)
    if args.check_trend:
        bad = trend_violations(rows, values, policies, args.check_trend)
        if bad:
            for msg in bad:
                print(f"trend check failed: {msg}", file=sys.stderr)
            return 1
    return 0


def seed_means(rows, values, policy) -> list[float]:
    means = []
    for v in values:
        cells = [r.metrics.completed_flows for r in rows
                 if r.policy == policy and r.value == float(v)]
        means.append(sum(cells) / len(cells))
    return means


def trend_violations(rows, values, policies, direction: str) -> list[str]:
    """Seed-mean monotonicity along the axis, one small adjacent wobble allowed.

    A policy fails if more than one adjacent pair moves the wrong way, or if
    a single inversion is 2% or more of the larger neighbor.
    """
    out = []
    for policy in policies:
        means = seed_means(rows, values, policy)
        inversions = []
        for a, b in zip(means, means[1:]):
            lo, hi = (a, b) if direction == "increasing" else (b, a)
            if hi < lo:
                base = max(lo, 1e-12)
                inversions.append((lo - hi) / base)
        if len(inversions) > 1 or any(frac >= 0.02 for frac in inversions):
            out.append(
                f"policy {policy}: means along axis are {means}, "
                f"not {direction} (inversions {inversions})"
            )
    return out


def cmd_oracle(args) -> int:
    if args.toy:
        setup = toy_setup()
    else:
        config = _apply_overrides(load_config(args.config), args)
        scenario = simcore.build_scenario(config)
        setup = simcore.build_setup(scenario)
    try:
        result = exhaustive_optimum(setup)
    except OracleGateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    heuristic_frames, _, heuristic_total = run_policy(setup, select_modes)
    gap = result.optimum - heuristic_total
    print(f"optimum {result.optimum} heuristic {heuristic_total} gap {gap}")
    ok = heuristic_total <= result.optimum
    ok = ok and not validate_schedule(result.schedules, setup)
    ok = ok and not validate_schedule(heuristic_frames, setup)
    return 0 if ok else 1


def cmd_validate(args) -> int:
    with open(args.dump, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    try:
        config = SimConfig(**doc["config"])
    except TypeError as exc:
        raise ConfigError(f"bad dump config: {exc}") from exc
    violations = []
    for entry in doc["runs"]:
        from dataclasses import replace

        scenario = simcore.build_scenario(replace(config, policy=entry["policy"]))
        setup = simcore.build_setup(scenario)
        frames = [
            FrameSchedule(
                frame=f["frame"],
                records=[
                    SlotRecord(
                        rec["slot"],
                        tuple(TxEntry(int(e[0]), int(e[1]), float(e[2]))
                              for e in rec["entries"]),
                    )
                    for rec in f["records"]
                ],
                completed=tuple(f["completed"]),
                modes={int(k): v for k, v in f["modes"].items()},
            )
            for f in entry["frames"]
        ]
        for v in validate_schedule(frames, setup):
            violations.append(f"{entry['policy']}: {v}")
    for v in violations:
        print(f"violation: {v}", file=sys.stderr)
    return 1 if violations else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="t2t",
        description="mmWave train-to-train transmission scheduling simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, policy_default=None):
        p.add_argument("--config", help="INI config file (defaults built in)")
        p.add_argument("--seed", type=int, help="root seed override")
        p.add_argument("--policy", default=policy_default,
                       choices=list(POLICIES) + ["all"],
                       help="policy override; 'all' runs every policy")
        p.add_argument("--out", default="-", help="CSV output path (default stdout)")

    p_run = sub.add_parser("run", help="simulate one scenario")
    common(p_run)
    p_run.add_argument("--dump", help="also write the full schedule as JSON")
    p_run.set_defaults(fn=cmd_run)

    p_sweep = sub.add_parser("sweep", help="grid of seeded runs along one axis")
    common(p_sweep)
    p_sweep.add_argument("--axis", required=True, choices=simcore.SWEEP_AXES)
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated axis values, e.g. 150,200,250")
    p_sweep.add_argument("--seeds", type=int, required=True,
                         help="number of seeds (root seed, root seed + 1, ...)")
    p_sweep.add_argument("--check-trend", choices=("increasing", "decreasing"),
                         help="assert seed-mean completed flows moves this way")
    p_sweep.set_defaults(fn=cmd_sweep)

    p_oracle = sub.add_parser("oracle", help="exact optimum vs heuristic on a tiny instance")
    p_oracle.add_argument("--config", help="INI config file")
    p_oracle.add_argument("--seed", type=int, help="root seed override")
    p_oracle.add_argument("--toy", action="store_true",
                          help="use the built-in worked example with book rates")
    p_oracle.set_defaults(fn=cmd_oracle)

    p_val = sub.add_parser("validate", help="validate a schedule dump")
    p_val.add_argument("dump", help="JSON file written by: t2t run --dump")
    p_val.set_defaults(fn=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except InvariantError as exc:
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
