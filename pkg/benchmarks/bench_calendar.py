"""Compare the compiled and pure-Python event calendars.

Usage: python benchmarks/bench_calendar.py [--events N] [--reps R]

Reports raw push/pop throughput and the wall time of full replications of
the default scenario with each calendar.
"""
from __future__ import annotations

import argparse
import logging
import random
import sys
import time

from casecart.kernel.calendar import CEventCalendar, PyEventCalendar
from casecart.kernel.engine import Simulation
from casecart.policy import PolicyKind
from casecart.scenario import Scenario


def churn(cls, n: int, seed: int = 1) -> float:
    """Hold-model workload: keep ~1000 pending events, pop one, push one."""
    rng = random.Random(seed)
    cal = cls()
    for _ in range(1000):
        cal.push(rng.random() * 10.0, "e", None)
    t0 = time.perf_counter()
    for _ in range(n):
        ev = cal.pop()
        cal.push(ev.time + rng.expovariate(1.0), "e", None)
    return time.perf_counter() - t0


def replications(cls, sc: Scenario, reps: int) -> float:
    t0 = time.perf_counter()
    for r in range(reps):
        model = sc.build_model(PolicyKind.CURRENT, 10)
        sim = Simulation(calendar_cls=cls)
        model.start(sim, sc.sim.seed, r)
        sim.run(until=model.horizon)
        model.collect(sim, r)
    return time.perf_counter() - t0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--events", type=int, default=500_000)
    ap.add_argument("--reps", type=int, default=10)
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.ERROR)
    if CEventCalendar is None:
        print("compiled calendar not built; only the pure-Python timing is shown")
    impls = [("python", PyEventCalendar)] + ([("compiled", CEventCalendar)] if CEventCalendar else [])
    sc = Scenario.load()
    sc.schedule
    print(f"{'calendar':<10} {'pop+push/s':>12} {'replication (s)':>16}")
    base = None
    for name, cls in impls:
        t = churn(cls, args.events)
        rep = replications(cls, sc, args.reps) / args.reps
        base = base or (t, rep)
        print(f"{name:<10} {args.events / t:12.0f} {rep:16.3f}   "
              f"(x{base[0] / t:.2f} kernel, x{base[1] / rep:.2f} end-to-end)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
