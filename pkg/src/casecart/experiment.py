"""Replication orchestration and per-replication metrics."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .durations import SERVICES
from .kernel.engine import run_replication
from .kernel.results import ReplicationResult
from .policy import PolicyKind
from .scenario import Scenario
from .stats import SummaryStats

UTIL_KEYS = ("agv", "or", "cart_washer", "loader", "cart")


def metric_names() -> list[str]:
    names = ["surgeries", "mean_delay_min", "delayed_surgeries"]
    names += [f"delay_h/{s}" for s in SERVICES]
    names += [f"delayed/{s}" for s in SERVICES]
    names += ["clean_trips", "clean_trip_mean", "clean_trip_sd", "soiled_trips", "soiled_trip_mean",
              "soiled_trip_sd"]
    names += [f"util/{k}" for k in UTIL_KEYS]
    return names


def _mean_or_zero(xs: list[float]) -> float:
    return math.fsum(xs) / len(xs) if xs else 0.0


def replication_metrics(res: ReplicationResult) -> dict[str, float]:
    """Scalar metrics of one replication; empty samples give 0."""
    surg = [s for s in res.surgeries if s.counted]
    delays = [s.delay for s in surg]
    m: dict[str, float] = {
        "surgeries": float(len(surg)),
        "mean_delay_min": _mean_or_zero(delays),
        "delayed_surgeries": float(sum(d > 0 for d in delays)),
    }
    for svc in SERVICES:
        d = [s.delay for s in surg if s.service == svc]
        m[f"delay_h/{svc}"] = _mean_or_zero(d) / 60.0
    for svc in SERVICES:
        m[f"delayed/{svc}"] = float(sum(s.delay > 0 for s in surg if s.service == svc))
    for cls in ("clean", "soiled"):
        st = SummaryStats.of(t.minutes for t in res.trips if t.counted and t.cls == cls)
        m[f"{cls}_trips"] = float(st.n)
        m[f"{cls}_trip_mean"] = 0.0 if st.empty else st.mean
        m[f"{cls}_trip_sd"] = 0.0 if st.empty else st.sd
    for k in UTIL_KEYS:
        m[f"util/{k}"] = res.utilization.get(k, 0.0)
    return m


@dataclass(frozen=True)
class Cell:
    """One experimental configuration."""

    policy: PolicyKind
    agvs: int
    inventory: tuple[int, ...]


def _run_one(scenario: Scenario, cell: Cell, seed: int, rep: int) -> ReplicationResult:
    model = scenario.build_model(cell.policy, cell.agvs, dict(zip(SERVICES, cell.inventory)))
    return run_replication(model, model.horizon, seed, rep)


def _run_chunk(args) -> list[ReplicationResult]:
    scenario, cell, seed, reps = args
    return [_run_one(scenario, cell, seed, r) for r in reps]


def run_cell(scenario: Scenario, cell: Cell, reps: int, seed: int, jobs: int = 1) -> list[ReplicationResult]:
    """Run replications ``0..reps-1``; replication ``r`` uses the same random
    streams in every cell (common random numbers)."""
    if reps < 1:
        raise ValueError("need at least one replication")
    if jobs <= 1 or reps == 1:
        return [_run_one(scenario, cell, seed, r) for r in range(reps)]
    scenario.schedule, scenario.network  # resolve once before pickling
    chunks = [list(range(reps))[i::jobs] for i in range(jobs)]
    with ProcessPoolExecutor(jobs) as ex:
        parts = list(ex.map(_run_chunk, [(scenario, cell, seed, c) for c in chunks]))
    out = sorted((r for p in parts for r in p), key=lambda r: r.rep_index)
    return out


def mean_delays(results: list[ReplicationResult]) -> list[float]:
    return [replication_metrics(r)["mean_delay_min"] for r in results]
