"""Perioperative process: instrument pools, carts, MD loading, CCSA staging,
OR starts, soiled return and CSSD reprocessing.

Each scheduled surgery follows one chain of events::

    release -> instrument -> cart -> loader -> clean trip MD->CCSA -> staged
    -> ready at max(scheduled, staged + transfer) -> OR (FIFO per room)
    -> surgery -> soiled trip core->CSSD -> cart wash | instrument wash

Carts released at the same instant join the instrument queue in pick-list
order: by OR number, then scheduled start.  An OR is seized only when its
cart is ready, so a late cart never blocks the room for earlier-ready cases
queued behind it in schedule order.
"""
from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

from .durations import SERVICES, DurationTable
from .fleet import Fleet, TransportRequest
from .kernel.engine import Simulation
from .kernel.results import ReplicationResult, SurgeryRecord
from .kernel.rng import RngStream
from .network import GuidedPathNetwork
from .policy import PolicyKind, PolicyParams, release_time
from .schedule import ScheduleRecord
from .stochastic import Distribution, parse_distribution

log = logging.getLogger(__name__)

DAY = 1440.0

BASELINE_INVENTORY = {"ENT": 10, "Gynecology": 10, "Neurological": 12, "OrthoTrauma": 17,
                      "Pediatric": 8, "Urology": 18, "Vascular": 25}


@dataclass(frozen=True)
class Resources:
    """Facility resources and fixed delays (minutes unless noted)."""

    n_ors: int = 32
    carts: int = 110
    loaders: int = 4
    loader_delay: str = "TRIA(2, 3, 5)"
    cart_washers: int = 3
    cart_wash: float = 20.0
    instrument_wash: float = 180.0
    handling: float = 0.25
    ccsa_to_or: float = 0.0
    transfer_by_agv: bool = False
    transfer_lead: float = 15.0
    cssd_to_md: float = 0.0
    min_duration: float = 5.0
    stall_timeout: float = 30.0

    def validate(self) -> None:
        for name in ("n_ors", "carts", "loaders", "cart_washers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        for name in ("cart_wash", "instrument_wash", "handling", "ccsa_to_or", "transfer_lead",
                     "cssd_to_md", "min_duration"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if not self.stall_timeout > 0:
            raise ValueError("stall_timeout must be positive")
        parse_distribution(self.loader_delay)


class Resource:
    """Counted resource with a FIFO wait queue and a busy-time tally."""

    def __init__(self, sim: Simulation, name: str, capacity: int):
        self.sim = sim
        self.name = name
        self.capacity = capacity
        self.busy = 0
        self.queue: deque[tuple[Callable, tuple]] = deque()
        self.window = (0.0, math.inf)
        self._area = 0.0
        self._t = sim.now

    def _tally(self) -> None:
        lo, hi = self.window
        a, b = max(self._t, lo), min(self.sim.now, hi)
        if b > a:
            self._area += self.busy * (b - a)
        self._t = self.sim.now

    @property
    def available(self) -> int:
        return self.capacity - self.busy

    def request(self, callback: Callable, *args) -> None:
        if self.busy < self.capacity and not self.queue:
            self._tally()
            self.busy += 1
            callback(*args)
        else:
            self.queue.append((callback, args))

    def release(self) -> None:
        if self.busy <= 0:
            raise RuntimeError(f"{self.name}: release without seize")
        if self.queue:
            callback, args = self.queue.popleft()
            callback(*args)
        else:
            self._tally()
            self.busy -= 1

    def utilization(self, end: float) -> float:
        self._tally()
        lo, hi = self.window
        a, b = max(self._t, lo), min(end, hi)
        area = self._area + (self.busy * (b - a) if b > a else 0.0)
        span = min(end, hi) - lo
        return area / (span * self.capacity) if span > 0 else 0.0


@dataclass(eq=False)
class Surgery:
    rec: ScheduleRecord
    duration: float  # minutes
    loader_delay: float
    counted: bool
    released: float = math.nan
    staged: float = math.nan
    actual_start: float = math.nan
    end: float = math.nan
    stage: str = "scheduled"
    has_cart: bool = False

    @property
    def id(self) -> str:
        return self.rec.surgery_id

    @property
    def service(self) -> str:
        return self.rec.service

    @property
    def scheduled(self) -> float:
        return self.rec.scheduled


@dataclass
class HospitalModel:
    """One policy / fleet / inventory configuration of the case-cart system.

    Parameters
    ----------
    schedule : list of ScheduleRecord
        Surgeries; day 0 must be empty.
    network : GuidedPathNetwork
        Must define the ``md``, ``ccsa`` and ``cssd`` roles and OR cores.
    inventory : dict
        Instrument sets per service.
    warmup_days : int
        Surgeries on days ``1..warmup_days`` run but are excluded from
        statistics.
    """

    schedule: list[ScheduleRecord]
    network: GuidedPathNetwork
    policy: PolicyKind = PolicyKind.CURRENT
    n_agvs: int = 6
    inventory: dict[str, int] = field(default_factory=lambda: dict(BASELINE_INVENTORY))
    resources: Resources = field(default_factory=Resources)
    policy_params: PolicyParams = field(default_factory=PolicyParams)
    durations: DurationTable | None = None
    warmup_days: int = 1
    drain_days: int = 2
    trace: bool = False
    check: bool = False

    def __post_init__(self):
        self.resources.validate()
        if self.durations is None:
            self.durations = DurationTable()
        self._loader_dist: Distribution = parse_distribution(self.resources.loader_delay)
        for svc in SERVICES:
            if self.inventory.get(svc, 0) < 1 and any(r.service == svc for r in self.schedule):
                raise ValueError(f"inventory for {svc} must be at least 1")
        for r in self.schedule:
            if r.or_id > self.resources.n_ors:
                raise ValueError(f"surgery {r.surgery_id} uses OR {r.or_id} of {self.resources.n_ors}")
        self._md = self.network.role("md")
        self._ccsa = self.network.role("ccsa")
        self._cssd = self.network.role("cssd")
        self._core = {o: self.network.core_for_or(o) for o in sorted({r.or_id for r in self.schedule})}
        self._station = ({o: self.network.or_station(o) for o in self._core}
                         if self.resources.transfer_by_agv else {})

    # -- horizon ----------------------------------------------------------
    @property
    def last_day(self) -> int:
        return max((r.day for r in self.schedule), default=self.warmup_days)

    @property
    def horizon(self) -> float:
        return (self.last_day + 1 + self.drain_days) * DAY

    @property
    def stats_window(self) -> tuple[float, float]:
        return ((self.warmup_days + 1) * DAY, (self.last_day + 1) * DAY)

    # -- setup ------------------------------------------------------------
    def _draw(self, seed: int, rep_index: int) -> list[Surgery]:
        """Pre-draw all per-surgery randomness in schedule order."""
        dur_rng = {s: RngStream(seed, f"rep{rep_index}/duration/{s}") for s in SERVICES}
        load_rng = RngStream(seed, f"rep{rep_index}/loader-delay")
        out = []
        for r in sorted(self.schedule):
            hours = self.durations.select(r.service, r.start).sample(dur_rng[r.service])
            if r.duration_h is not None:
                hours = r.duration_h
            minutes = max(60.0 * hours, self.resources.min_duration)
            out.append(Surgery(r, minutes, self._loader_dist.sample(load_rng), r.day > self.warmup_days))
        return out

    def start(self, sim: Simulation, seed: int, rep_index: int) -> None:
        res = self.resources
        self.sim = sim
        self.log: list[tuple] = []
        self.fleet = Fleet(sim, self.network, self.n_agvs, res.handling, res.stall_timeout, check=self.check)
        self.fleet.window = self.stats_window
        self.pools = {s: Resource(sim, f"instruments/{s}", max(1, int(self.inventory.get(s, 1))))
                      for s in SERVICES}
        self.carts = Resource(sim, "carts", res.carts)
        self.loaders = Resource(sim, "loaders", res.loaders)
        self.washers = Resource(sim, "cart-washers", res.cart_washers)
        self.ors = [Resource(sim, f"OR{i + 1}", 1) for i in range(res.n_ors)]
        for r in self._resources():
            r.window = self.stats_window
        self.surgeries = self._draw(seed, rep_index)
        self.clamped = 0
        picks = []
        for s in self.surgeries:
            t = release_time(self.policy, self.policy_params, s.scheduled, -math.inf)
            if t < sim.now:
                self.clamped += 1
                t = sim.now
            picks.append((t, s.rec.or_id, s.scheduled, s.id, s))
        if self.clamped:
            log.warning("%d releases fell before the simulation start and were clamped", self.clamped)
        picks.sort(key=lambda p: p[:4])
        for t, *_, s in picks:
            sim.at(t, self._release, s, kind="release")

    def _resources(self) -> list[Resource]:
        return [*self.pools.values(), self.carts, self.loaders, self.washers, *self.ors]

    def _mark(self, s: Surgery, stage: str, check: bool = True) -> None:
        s.stage = stage
        if self.trace:
            self.log.append((self.sim.now, stage, s.id))
        if check and self.check:
            self.check_conservation()

    # -- clean side -------------------------------------------------------
    def _release(self, s: Surgery) -> None:
        s.released = self.sim.now
        self._mark(s, "release")
        self.pools[s.service].request(self._got_instrument, s)

    def _got_instrument(self, s: Surgery) -> None:
        self._mark(s, "instrument")
        self.carts.request(self._got_cart, s)

    def _got_cart(self, s: Surgery) -> None:
        s.has_cart = True
        self._mark(s, "cart")
        self.loaders.request(self._load, s)

    def _load(self, s: Surgery) -> None:
        self._mark(s, "load-start")
        self.sim.after(s.loader_delay, self._loaded, s, kind="loaded")

    def _loaded(self, s: Surgery) -> None:
        self.loaders.release()
        self._mark(s, "load-end")
        self.fleet.submit(TransportRequest(self._md, self._ccsa, s.id, self.sim.now, "clean",
                                           lambda t, s=s: self._staged(s), s.counted))

    def _staged(self, s: Surgery) -> None:
        s.staged = self.sim.now
        self._mark(s, "staged")
        res = self.resources
        if res.transfer_by_agv:
            go = max(self.sim.now, s.scheduled - res.transfer_lead)
            self.sim.at(go, self._transfer, s, kind="transfer")
        else:
            self.sim.at(max(s.scheduled, self.sim.now + res.ccsa_to_or), self._ready, s, kind="ready")

    def _transfer(self, s: Surgery) -> None:
        self.fleet.submit(TransportRequest(self._ccsa, self._station[s.rec.or_id], s.id, self.sim.now,
                                           "transfer", lambda t, s=s: self._at_or(s), s.counted))

    def _at_or(self, s: Surgery) -> None:
        self.sim.at(max(s.scheduled, self.sim.now), self._ready, s, kind="ready")

    def _ready(self, s: Surgery) -> None:
        self._mark(s, "ready")
        self.ors[s.rec.or_id - 1].request(self._start_surgery, s)

    def _start_surgery(self, s: Surgery) -> None:
        s.actual_start = self.sim.now
        self._mark(s, "start")
        self.sim.after(s.duration, self._end_surgery, s, kind="surgery-end")

    # -- soiled side ------------------------------------------------------
    def _end_surgery(self, s: Surgery) -> None:
        s.end = self.sim.now
        self._mark(s, "end", check=False)
        self.ors[s.rec.or_id - 1].release()
        if self.check:
            self.check_conservation()
        self.fleet.submit(TransportRequest(self._core[s.rec.or_id], self._cssd, s.id, self.sim.now, "soiled",
                                           lambda t, s=s: self._at_cssd(s), s.counted))

    def _at_cssd(self, s: Surgery) -> None:
        self._mark(s, "at-cssd")
        self.washers.request(self._wash_cart, s)
        self.sim.after(self.resources.instrument_wash + self.resources.cssd_to_md, self._instrument_back, s,
                       kind="instrument-back")

    def _wash_cart(self, s: Surgery) -> None:
        self.sim.after(self.resources.cart_wash, self._cart_clean, s, kind="cart-washed")

    def _cart_clean(self, s: Surgery) -> None:
        self.washers.release()
        s.has_cart = False
        if self.trace:
            self.log.append((self.sim.now, "cart-free", s.id))
        self.carts.release()

    def _instrument_back(self, s: Surgery) -> None:
        self._mark(s, "instrument-back", check=False)
        self.pools[s.service].release()
        if self.check:
            self.check_conservation()

    # -- checks and results -------------------------------------------------
    def check_conservation(self) -> None:
        """Every instrument set, cart and OR is either free or held by exactly
        one surgery in a stage that holds it."""
        holding_instr = {"instrument", "cart", "load-start", "load-end", "staged", "ready", "start", "end",
                         "at-cssd"}
        held = {svc: 0 for svc in SERVICES}
        for s in self.surgeries:
            if s.stage in holding_instr:
                held[s.service] += 1
        for svc, pool in self.pools.items():
            assert 0 <= pool.busy <= pool.capacity
            assert pool.busy == held[svc], f"{svc}: {pool.busy} sets out, {held[svc]} held"
        assert 0 <= self.carts.busy <= self.carts.capacity
        assert self.carts.busy == sum(s.has_cart for s in self.surgeries)
        assert 0 <= self.loaders.busy <= self.loaders.capacity
        assert 0 <= self.washers.busy <= self.washers.capacity
        in_or = [s.rec.or_id for s in self.surgeries if s.stage == "start"]
        assert len(in_or) == len(set(in_or)), "two surgeries share an OR"
        assert sum(o.busy for o in self.ors) == len(in_or)

    def collect(self, sim: Simulation, rep_index: int) -> ReplicationResult:
        end = self.stats_window[1]
        records = []
        censored = 0
        for s in self.surgeries:
            start = s.actual_start
            if math.isnan(start):
                censored += 1
                start = sim.now
            records.append(SurgeryRecord(s.id, s.service, s.rec.or_id, s.rec.day, s.scheduled, s.released,
                                         s.staged, start, s.duration / 60.0, s.counted))
        if censored:
            log.warning("replication %d: %d surgeries had not started by the horizon", rep_index, censored)
        trips = list(self.fleet.trips)
        util = {"agv": self.fleet.utilization(end),
                "or": sum(o.utilization(end) for o in self.ors) / len(self.ors),
                "cart_washer": self.washers.utilization(end),
                "loader": self.loaders.utilization(end),
                "cart": self.carts.utilization(end)}
        diag = {"censored": censored, "clamped_releases": self.clamped,
                "agv_stalls": self.fleet.diagnostics["stalls"], "agv_yields": self.fleet.diagnostics["yields"]}
        return ReplicationResult(rep_index, records, trips, util, diag, list(self.log))
