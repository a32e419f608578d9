"""Command-line interface: ``casecart {simulate,compare,optimize,gen-schedule,validate}``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .durations import SERVICES
from .experiment import Cell, run_cell
from .inventory import Bounds, OptConfig, minimize_inventory, scenario_table
from .network import NetworkError
from .policy import ALL_POLICIES, PolicyKind, policy_label
from .report import (bundle_trip_stats, grid_tables, load_reference, optimizer_report, scenario_table_report,
                     validate, validation_report, write_bundle, write_files)
from .scenario import DATA_DIR, ConfigError, Scenario
from .schedule import ScheduleError, format_schedule, generate_schedule

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_INFEASIBLE = 0, 2, 3, 4

log = logging.getLogger("casecart")


class DataError(RuntimeError):
    pass


def _policy(text: str) -> PolicyKind:
    try:
        return PolicyKind.parse(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _common(p: argparse.ArgumentParser, reps: bool = True) -> None:
    p.add_argument("--scenario", type=Path, default=None, help="scenario TOML (default: packaged scenario)")
    p.add_argument("--seed", type=int, default=None, help="master random seed")
    if reps:
        p.add_argument("--reps", type=_positive, default=None, help="replications per configuration")
        p.add_argument("--jobs", type=_positive, default=1, help="worker processes")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="casecart", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one policy and fleet size")
    _common(p)
    p.add_argument("--policy", type=_policy, default=None, help="current | twobatch | jit")
    p.add_argument("--agvs", type=_positive, default=None)
    p.add_argument("--inventory", choices=("scenario", "lb", "ub", "mid"), default="scenario")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("compare", help="policy x fleet-size grid with common random numbers")
    _common(p)
    p.add_argument("--policy", type=_policy, nargs="+", default=list(ALL_POLICIES))
    p.add_argument("--agvs", type=_positive, nargs="+", default=[6, 8, 10])
    p.add_argument("--inventory", choices=("scenario", "lb", "ub", "mid"), default="scenario")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("optimize", help="smallest inventory meeting a delay target")
    _common(p)
    p.add_argument("--policy", type=_policy, default=None)
    p.add_argument("--agvs", type=_positive, default=None)
    p.add_argument("--delta", type=float, default=None, help="target mean delay, minutes per surgery")
    p.add_argument("--exhaustive", action="store_true", help="scan the whole box (at most 4 free services)")
    p.add_argument("--table", action="store_true", help="also evaluate the upper/lower/mid inventory table")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("gen-schedule", help="write a synthetic schedule CSV")
    _common(p, reps=False)
    p.add_argument("--days", type=_positive, default=None, help="surgery days (default: warm-up + counted days)")
    p.add_argument("--out", type=Path, required=True, help="output CSV file")

    p = sub.add_parser("validate", help="compare a bundle's trip times with reference statistics")
    p.add_argument("bundle", type=Path)
    p.add_argument("--reference", type=Path, default=DATA_DIR / "trip_reference.csv")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out", type=Path, default=None)
    return ap


def _inventory(sc: Scenario, which: str) -> tuple[int, ...]:
    if which == "scenario":
        return sc.inventory_vector()
    b = Bounds.from_schedule(sc.schedule, sc.inventory_vector())
    return {"lb": b.lb, "ub": b.ub, "mid": b.midpoint}[which]


def _meta(sc: Scenario, args, **extra) -> dict:
    return {"command": args.command, "config_hash": sc.config_hash(), "scenario": sc.source,
            "seed": sc.sim.seed, "surgeries": len(sc.schedule), **extra}


def cmd_simulate(args) -> int:
    sc = Scenario.load(args.scenario).with_overrides(policy=args.policy, agvs=args.agvs, seed=args.seed,
                                                     replications=args.reps)
    inv = _inventory(sc, args.inventory)
    cell = Cell(sc.sim.policy, sc.sim.agvs, inv)
    results = run_cell(sc, cell, sc.sim.replications, sc.sim.seed, args.jobs)
    write_bundle(args.out, results, _meta(sc, args, policy=cell.policy.value, model=policy_label(cell.policy),
                                          agvs=cell.agvs, replications=len(results),
                                          inventory=dict(zip(SERVICES, inv))))
    print((Path(args.out) / "summary.txt").read_text(), end="")
    return EXIT_OK


def cmd_compare(args) -> int:
    sc = Scenario.load(args.scenario).with_overrides(seed=args.seed, replications=args.reps)
    inv = _inventory(sc, args.inventory)
    policies = sorted(dict.fromkeys(args.policy), key=policy_label)
    fleets = sorted(set(args.agvs))
    cells = []
    for pol in policies:
        for n in fleets:
            res = run_cell(sc, Cell(pol, n, inv), sc.sim.replications, sc.sim.seed, args.jobs)
            write_bundle(Path(args.out) / "cells" / f"{pol.value}-{n}", res,
                         _meta(sc, args, policy=pol.value, model=policy_label(pol), agvs=n,
                               replications=len(res), inventory=dict(zip(SERVICES, inv))))
            cells.append((pol, n, res))
    files = grid_tables(cells)
    write_files(args.out, files)
    print(files["grid.txt"], end="")
    return EXIT_OK


def cmd_optimize(args) -> int:
    sc = Scenario.load(args.scenario).with_overrides(policy=args.policy, agvs=args.agvs, seed=args.seed)
    reps = args.reps or sc.optimizer.replications
    delta = sc.optimizer.delta if args.delta is None else args.delta
    if delta < 0:
        raise ConfigError("--delta must be non-negative")
    if reps < 2:
        raise ConfigError("--reps must be at least 2 for optimization")
    bounds = Bounds.from_schedule(sc.schedule, sc.inventory_vector())
    cfg = OptConfig(delta, reps, sc.optimizer.alpha, sc.sim.seed, sc.sim.agvs, args.jobs)
    result = minimize_inventory(sc, sc.sim.policy, bounds, cfg, args.exhaustive or sc.optimizer.exhaustive)
    files = {"optimizer.csv": optimizer_report(result.history)}
    if args.table:
        files.update(scenario_table_report(scenario_table(sc, bounds, reps=reps, seed=sc.sim.seed,
                                                          agvs=sc.sim.agvs, jobs=args.jobs)))
    write_files(args.out, files)
    vec = ", ".join(f"{s}={v}" for s, v in zip(SERVICES, result.inventory))
    if not result.feasible:
        print(f"infeasible: mean delay {result.mean_delay:.4f} min at the upper bound exceeds {delta} min")
        return EXIT_INFEASIBLE
    print(f"inventory: {vec}\nmean delay: {result.mean_delay:.4f} min/surgery (target {delta})")
    return EXIT_OK


def cmd_gen_schedule(args) -> int:
    sc = Scenario.load(args.scenario)
    gen = sc.generator
    if args.seed is not None:
        gen.seed = args.seed
    if args.days is not None:
        gen.days = args.days
    records = generate_schedule(gen)
    Path(args.out).write_text(format_schedule(records))
    print(f"{len(records)} surgeries written to {args.out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    if not (args.bundle / "trips.csv").exists():
        raise DataError(f"{args.bundle} is not a bundle (no trips.csv)")
    try:
        ref = load_reference(args.reference)
    except OSError as e:
        raise DataError(f"cannot read reference {args.reference}: {e.strerror}") from None
    except ValueError as e:
        raise DataError(str(e)) from None
    files = validation_report(validate(bundle_trip_stats(args.bundle), ref, args.alpha))
    if args.out:
        write_files(args.out, files)
    print(files["validation.txt"], end="")
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "compare": cmd_compare, "optimize": cmd_optimize,
            "gen-schedule": cmd_gen_schedule, "validate": cmd_validate}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (ScheduleError, NetworkError, DataError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
