"""Instrument inventory experiments: bounds, evaluation under common random
numbers, and a search for the smallest inventory meeting a delay target."""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field

from .durations import SERVICES
from .experiment import Cell, replication_metrics, run_cell
from .policy import PolicyKind
from .scenario import Scenario
from .schedule import ScheduleRecord, daily_max
from .stats import ConfidenceInterval, SummaryStats, mean_ci, upper_test

log = logging.getLogger(__name__)

Vector = tuple[int, ...]


def lower_bound(n: int) -> int:
    """Half the busiest day's case count, rounded up."""
    if int(n) != n or n < 1:
        raise ValueError(f"lower bound needs an integer n >= 1, got {n}")
    return (int(n) + 1) // 2


@dataclass(frozen=True)
class Bounds:
    lb: Vector
    ub: Vector

    def __post_init__(self):
        if len(self.lb) != len(SERVICES) or len(self.ub) != len(SERVICES):
            raise ValueError(f"bounds need {len(SERVICES)} components")
        if any(not 1 <= a <= b for a, b in zip(self.lb, self.ub)):
            raise ValueError(f"need 1 <= lb <= ub componentwise, got lb={self.lb} ub={self.ub}")

    @classmethod
    def from_schedule(cls, schedule: list[ScheduleRecord], ub: Vector) -> "Bounds":
        lb = []
        for svc, u in zip(SERVICES, ub):
            n = daily_max(schedule, svc)
            b = lower_bound(n) if n >= 1 else 1
            if b > u:
                log.warning("%s: lower bound %d exceeds the upper bound %d; using %d", svc, b, u, u)
                b = u
            lb.append(b)
        return cls(tuple(lb), tuple(ub))

    def contains(self, v: Vector) -> bool:
        return all(a <= x <= b for a, x, b in zip(self.lb, v, self.ub))

    @property
    def midpoint(self) -> Vector:
        return tuple((a + b) // 2 for a, b in zip(self.lb, self.ub))

    @property
    def free_dims(self) -> list[int]:
        return [i for i, (a, b) in enumerate(zip(self.lb, self.ub)) if a < b]


@dataclass(frozen=True)
class Evaluation:
    inventory: Vector
    per_rep: tuple[float, ...]  # mean delay per surgery (min), one per replication
    per_service_h: dict[str, float]

    @property
    def mean(self) -> float:
        return math.fsum(self.per_rep) / len(self.per_rep)

    @property
    def ci(self) -> ConfidenceInterval:
        s = SummaryStats.of(self.per_rep)
        if s.n < 2:
            return ConfidenceInterval(s.mean, s.mean)
        return mean_ci(s)


def evaluate(scenario: Scenario, inventory: Vector, policy: PolicyKind, reps: int, seed: int,
             agvs: int | None = None, jobs: int = 1) -> Evaluation:
    """Mean delay per surgery over ``reps`` replications.  Replication ``r``
    draws the same random numbers whatever the inventory vector."""
    results = run_cell(scenario, Cell(policy, agvs or scenario.sim.agvs, tuple(inventory)), reps, seed, jobs)
    metrics = [replication_metrics(r) for r in results]
    per_service = {s: math.fsum(m[f"delay_h/{s}"] for m in metrics) / len(metrics) for s in SERVICES}
    return Evaluation(tuple(inventory), tuple(m["mean_delay_min"] for m in metrics), per_service)


@dataclass
class OptConfig:
    delta: float = 1.0
    reps: int = 30
    alpha: float = 0.05
    seed: int = 20180911
    agvs: int | None = None
    jobs: int = 1

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delay target must be non-negative")
        if self.reps < 2:
            raise ValueError("need at least 2 replications per evaluation")


@dataclass
class HistoryRow:
    iteration: int
    inventory: Vector
    mean: float
    ci: ConfidenceInterval
    accepted: bool


@dataclass
class OptResult:
    feasible: bool
    inventory: Vector
    evaluation: Evaluation
    history: list[HistoryRow] = field(default_factory=list)

    @property
    def mean_delay(self) -> float:
        return self.evaluation.mean


def meets_target(ev: Evaluation, delta: float, alpha: float) -> bool:
    """Mean at or below the target and not significantly above it."""
    rejected, _ = upper_test(ev.per_rep, delta, alpha)
    return ev.mean <= delta and not rejected


class _Evaluator:
    def __init__(self, scenario: Scenario, policy: PolicyKind, cfg: OptConfig):
        self.scenario, self.policy, self.cfg = scenario, policy, cfg
        self.cache: dict[Vector, Evaluation] = {}

    def __call__(self, v: Vector) -> Evaluation:
        if v not in self.cache:
            c = self.cfg
            self.cache[v] = evaluate(self.scenario, v, self.policy, c.reps, c.seed, c.agvs, c.jobs)
        return self.cache[v]


def minimize_inventory(scenario: Scenario, policy: PolicyKind, bounds: Bounds, cfg: OptConfig,
                       exhaustive: bool = False) -> OptResult:
    """Smallest inventory whose mean delay stays within ``cfg.delta``.

    Greedy coordinate descent from the upper bound: each round evaluates every
    single-unit decrement and keeps the acceptable one with the smallest mean
    delay (lowest service index on ties).  ``exhaustive`` instead scans the
    whole box, for at most four free dimensions.
    """
    ev = _Evaluator(scenario, policy, cfg)
    top = ev(bounds.ub)
    history = [HistoryRow(0, bounds.ub, top.mean, top.ci, meets_target(top, cfg.delta, cfg.alpha))]
    if not history[0].accepted:
        return OptResult(False, bounds.ub, top, history)
    if exhaustive:
        return _exhaustive(ev, bounds, cfg, history)
    x = bounds.ub
    it = 0
    while True:
        it += 1
        best = None
        for i in range(len(x)):
            if x[i] <= bounds.lb[i]:
                continue
            cand = x[:i] + (x[i] - 1,) + x[i + 1:]
            e = ev(cand)
            ok = meets_target(e, cfg.delta, cfg.alpha)
            history.append(HistoryRow(it, cand, e.mean, e.ci, False))
            if ok and (best is None or e.mean < best[0].mean):
                best = (e, len(history) - 1)
        if best is None:
            break
        history[best[1]].accepted = True
        x = best[0].inventory
    return OptResult(True, x, ev(x), history)


def _exhaustive(ev: _Evaluator, bounds: Bounds, cfg: OptConfig, history: list[HistoryRow]) -> OptResult:
    free = bounds.free_dims
    if len(free) > 4:
        raise ValueError(f"exhaustive search supports at most 4 free dimensions, got {len(free)}")
    best = (sum(bounds.ub), history[0].mean, bounds.ub)
    ranges = [range(bounds.lb[i], bounds.ub[i] + 1) for i in free]
    for combo in itertools.product(*ranges):
        v = list(bounds.ub)
        for i, c in zip(free, combo):
            v[i] = c
        v = tuple(v)
        if v == bounds.ub:
            continue
        e = ev(v)
        ok = meets_target(e, cfg.delta, cfg.alpha)
        history.append(HistoryRow(1, v, e.mean, e.ci, ok))
        if ok and (sum(v), e.mean, v) < best:
            best = (sum(v), e.mean, v)
    return OptResult(True, best[2], ev(best[2]), history)


@dataclass(frozen=True)
class TableRow:
    scenario: str
    policy: PolicyKind
    inventory: Vector
    evaluation: Evaluation


def scenario_vectors(bounds: Bounds) -> dict[str, Vector]:
    return {"1": bounds.ub, "2": bounds.lb, "3": bounds.midpoint}


def scenario_table(scenario: Scenario, bounds: Bounds, policies=(PolicyKind.CURRENT, PolicyKind.TWOBATCH,
                                                                 PolicyKind.JIT),
                   reps: int = 30, seed: int = 20180911, agvs: int | None = None, jobs: int = 1) -> list[TableRow]:
    """Mean delay per (inventory scenario, policy) cell, all cells sharing
    random numbers."""
    rows = []
    for name, vec in scenario_vectors(bounds).items():
        for pol in policies:
            rows.append(TableRow(name, pol, vec, evaluate(scenario, vec, pol, reps, seed, agvs, jobs)))
    return rows
