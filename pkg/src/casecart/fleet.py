"""AGV fleet on a guided-path network with zone-exclusive occupancy.

Every node and every link is a zone that holds at most one vehicle.  Before
leaving a node a vehicle atomically reserves the next link and the node at
its far end; when the hop after that enters a two-way section (bidirectional
links or a spur) the whole section, up to the node where one-way travel
resumes, is reserved as well, so two vehicles never meet head-on inside it.
Elevator crossings seize a slot in the elevator bank instead of a link zone.

Idle vehicles park at their own home spur.  Requests go to the nearest idle
or homeward-bound vehicle by uncongested route length (ties to the lower id);
when none is free they queue first-come first-served.
"""
from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

from .kernel.engine import Simulation
from .kernel.results import TripRecord
from .network import Arc, ElevatorBank, GuidedPathNetwork
from .stats import EMPTY, SummaryStats

log = logging.getLogger(__name__)

IDLE = "idle-at-home"
RETURNING = "returning"
EN_ROUTE_EMPTY = "en-route-empty"
LOADED = "loaded"

FREE = -1


@dataclass
class TransportRequest:
    origin: int
    dest: int
    cart: str
    request_time: float
    cls: str  # "clean" | "soiled" | "transfer"
    on_done: Callable[[float], None] | None = None
    counted: bool = True

    def __post_init__(self):
        if self.origin == self.dest:
            raise ValueError("transport origin and destination must differ")


@dataclass(eq=False)
class Agv:
    id: int
    home: int
    node: int
    state: str = IDLE
    arc: Arc | None = None
    plan: deque = field(default_factory=deque)
    owned: set = field(default_factory=set)
    task: TransportRequest | None = None
    phase: str = "idle"  # idle | home | to_origin | handling | to_dest
    arrive_at: float = 0.0
    depart_time: float = 0.0
    waiting: bool = False
    retry_pending: bool = False
    redirect: bool = False
    moves: int = 0
    stall_moves: int = -1
    elevator_unit: int | None = None

    @property
    def status(self) -> str:
        if self.elevator_unit is not None:
            return "on-elevator"
        if self.waiting:
            return "waiting-for-zone"
        return self.state


class Fleet:
    def __init__(self, sim: Simulation, net: GuidedPathNetwork, n_agvs: int, handling: float = 0.25,
                 stall_timeout: float = 30.0, on_trip: Callable[[TripRecord], None] | None = None,
                 check: bool = False):
        homes = net.homes()
        if n_agvs < 1:
            raise ValueError("fleet needs at least one AGV")
        if len(homes) < n_agvs:
            raise ValueError(f"network has {len(homes)} home stations for {n_agvs} AGVs")
        self.sim = sim
        self.net = net
        ev = net.elevator
        self.elevator = ElevatorBank(ev.units, ev.capacity, ev.delay)
        self.handling = handling
        self.stall_timeout = stall_timeout
        self.on_trip = on_trip
        self.check = check
        self.n_nodes = len(net.nodes)
        self._elev_zone = self.n_nodes + len(net.links)
        self.owner = [FREE] * (self._elev_zone + 1)
        self.waiters: dict[int, list[Agv]] = {}
        self.queue: deque[TransportRequest] = deque()
        self.trips: list[TripRecord] = []
        self.diagnostics = {"stalls": 0, "yields": 0}
        self.agvs = [Agv(i, homes[i], homes[i]) for i in range(n_agvs)]
        for a in self.agvs:
            self._take(a, a.home)
        self._busy = 0
        self._busy_area = 0.0
        self._busy_t = sim.now
        self.window = (0.0, math.inf)
        self._link_time = [
            (net.elevator.delay if ln.kind == "elevator" else ln.length / net.speed) for ln in net.links
        ]
        self._two_way = [ln.kind in ("bi", "spur") for ln in net.links]
        self._is_elev = [ln.kind == "elevator" for ln in net.links]

    # -- bookkeeping ----------------------------------------------------
    def _set_busy(self, delta: int) -> None:
        now = self.sim.now
        lo, hi = self.window
        a, b = max(self._busy_t, lo), min(now, hi)
        if b > a:
            self._busy_area += self._busy * (b - a)
        self._busy_t = now
        self._busy += delta

    def utilization(self, end: float) -> float:
        self._set_busy(0)
        lo, hi = self.window
        a, b = max(self._busy_t, lo), min(end, hi)
        area = self._busy_area + (self._busy * (b - a) if b > a else 0.0)
        span = min(end, hi) - lo
        return area / (span * len(self.agvs)) if span > 0 else 0.0

    def _take(self, agv: Agv, zone: int) -> None:
        cur = self.owner[zone]
        assert cur == FREE or cur == agv.id, f"zone {zone} held by AGV {cur}, wanted by {agv.id}"
        self.owner[zone] = agv.id
        agv.owned.add(zone)

    def _free(self, agv: Agv, zone: int) -> None:
        if self.owner[zone] == agv.id:
            self.owner[zone] = FREE
            agv.owned.discard(zone)
            self._wake(zone)

    def _wake(self, zone: int) -> None:
        ws = self.waiters.pop(zone, None)
        if not ws:
            return
        for agv in ws:
            if agv.waiting and not agv.retry_pending:
                agv.retry_pending = True
                self.sim.after(0.0, self._retry, agv, kind="agv-retry")

    # -- dispatch -------------------------------------------------------
    def submit(self, req: TransportRequest) -> None:
        best = None
        for agv in self.agvs:
            if agv.state not in (IDLE, RETURNING):
                continue
            d = self._distance(agv, req.origin)
            if best is None or d < best[0]:
                best = (d, agv)
        if best is None:
            self.queue.append(req)
        else:
            self._assign(best[1], req)

    def _distance(self, agv: Agv, target: int) -> float:
        if agv.arc is not None:
            rest = max(0.0, agv.arrive_at - self.sim.now) * self.net.speed
            return rest + self.net.route_length(agv.arc.dst, target)
        return self.net.route_length(agv.node, target)

    def _assign(self, agv: Agv, req: TransportRequest, was_busy: bool = False) -> None:
        if not was_busy:
            self._set_busy(+1)
        agv.task = req
        agv.state = EN_ROUTE_EMPTY
        agv.phase = "to_origin"
        if agv.arc is not None:
            agv.redirect = True
        else:
            self._replan(agv, req.origin)

    def _replan(self, agv: Agv, target: int, banned: frozenset = frozenset()) -> None:
        self._cancel_wait(agv)
        for z in sorted(agv.owned):
            if z != agv.node:
                self._free(agv, z)
        agv.plan = deque(self.net.shortest_route(agv.node, target, banned).arcs) if agv.node != target else deque()
        self._advance(agv)

    # -- movement -------------------------------------------------------
    def _advance(self, agv: Agv) -> None:
        if not agv.plan:
            self._reached(agv)
            return
        arc = agv.plan[0]
        n = self.n_nodes
        elevator = self._is_elev[arc.link]
        owner = self.owner
        if not elevator and owner[n + arc.link] == agv.id and owner[arc.dst] == agv.id:
            self._depart(agv, arc, None)
            return
        zones = [arc.dst] if elevator else [n + arc.link, arc.dst]
        plan = agv.plan
        j = 1
        while j < len(plan) and self._two_way[plan[j].link]:
            zones.append(n + plan[j].link)
            zones.append(plan[j].dst)
            j += 1
        busy = [z for z in zones if owner[z] != FREE and owner[z] != agv.id]
        unit = None
        if elevator:
            unit = self.elevator.free_unit()
            if unit is None:
                busy.append(self._elev_zone)
        if busy:
            self._wait(agv, busy)
            return
        for z in zones:
            self._take(agv, z)
        if elevator:
            self.elevator.board(unit)
        self._depart(agv, arc, unit)

    def _depart(self, agv: Agv, arc: Arc, unit: int | None) -> None:
        self._free(agv, arc.src)
        agv.node = FREE
        agv.arc = arc
        agv.elevator_unit = unit
        agv.moves += 1
        agv.arrive_at = self.sim.now + self._link_time[arc.link]
        self.sim.at(agv.arrive_at, self._arrive, agv, kind="agv-arrive")

    def _arrive(self, agv: Agv) -> None:
        arc = agv.arc
        agv.plan.popleft()
        agv.arc = None
        agv.node = arc.dst
        if agv.elevator_unit is not None:
            self.elevator.leave(agv.elevator_unit)
            agv.elevator_unit = None
            self._wake(self._elev_zone)
        else:
            self._free(agv, self.n_nodes + arc.link)
        if self.check:
            self.check_invariants()
        if agv.redirect:
            agv.redirect = False
            self._replan(agv, agv.task.origin)
            return
        self._advance(agv)

    def _wait(self, agv: Agv, zones: list[int]) -> None:
        agv.waiting = True
        for z in zones:
            lst = self.waiters.setdefault(z, [])
            if agv not in lst:
                lst.append(agv)
        if agv.stall_moves != agv.moves:
            agv.stall_moves = agv.moves
            self.sim.after(self.stall_timeout, self._stall_check, agv, agv.moves, kind="agv-stall")

    def _cancel_wait(self, agv: Agv) -> None:
        agv.waiting = False

    def _retry(self, agv: Agv) -> None:
        agv.retry_pending = False
        if not agv.waiting or agv.arc is not None:
            return
        agv.waiting = False
        self._advance(agv)

    def _stall_check(self, agv: Agv, moves: int) -> None:
        if agv.moves != moves or not agv.waiting:
            return
        self.diagnostics["stalls"] += 1
        log.warning("AGV %d blocked at %s for %.1f min", agv.id, self.net.node_id(agv.node), self.stall_timeout)
        target = agv.plan[-1].dst
        blocked = agv.plan[0].link
        try:
            alt = self.net.shortest_route(agv.node, target, frozenset({blocked}))
        except Exception:
            alt = None
        if alt is not None and alt.arcs:
            self.diagnostics["yields"] += 1
            self._replan(agv, target, frozenset({blocked}))
        if agv.waiting and agv.moves == moves:
            self.sim.after(self.stall_timeout, self._stall_check, agv, moves, kind="agv-stall")

    # -- task phases ----------------------------------------------------
    def _reached(self, agv: Agv) -> None:
        if agv.phase == "to_origin":
            agv.phase = "handling"
            agv.depart_time = self.sim.now
            self.sim.after(self.handling, self._loaded, agv, kind="agv-load")
        elif agv.phase == "to_dest":
            agv.phase = "handling"
            self.sim.after(self.handling, self._unloaded, agv, kind="agv-unload")
        elif agv.phase == "home":
            agv.phase = "idle"
            agv.state = IDLE
            self._set_busy(0)

    def _loaded(self, agv: Agv) -> None:
        agv.phase = "to_dest"
        agv.state = LOADED
        self._replan(agv, agv.task.dest)

    def _unloaded(self, agv: Agv) -> None:
        req = agv.task
        rec = TripRecord(agv.id, req.cls, self.net.node_id(req.origin), self.net.node_id(req.dest),
                         agv.depart_time, self.sim.now, req.counted)
        self.trips.append(rec)
        if self.on_trip:
            self.on_trip(rec)
        agv.task = None
        if self.queue:
            self._assign(agv, self.queue.popleft(), was_busy=True)
        else:
            self._set_busy(-1)
            self._go_home(agv)
        if req.on_done:
            req.on_done(self.sim.now)

    def _go_home(self, agv: Agv) -> None:
        if agv.node == agv.home:
            agv.state = IDLE
            agv.phase = "idle"
            return
        agv.state = RETURNING
        agv.phase = "home"
        self._replan(agv, agv.home)

    # -- checks -----------------------------------------------------------
    def check_invariants(self) -> None:
        seen: dict[int, int] = {}
        n = self.n_nodes
        for agv in self.agvs:
            if agv.arc is not None:
                zone = None if self._is_elev[agv.arc.link] else n + agv.arc.link
            else:
                zone = agv.node
            if zone is None:
                continue
            assert zone not in seen, f"AGVs {seen.get(zone)} and {agv.id} share zone {zone}"
            assert self.owner[zone] == agv.id, f"AGV {agv.id} occupies zone {zone} it does not own"
            seen[zone] = agv.id
        assert all(0 <= o <= self.elevator.capacity for o in self.elevator.occupancy)


def trip_stats(records, cls: str | None = None, bucket: str | None = None) -> SummaryStats:
    """Count, mean and sd of trip minutes, optionally by class and bucket."""
    sel = [r.minutes for r in records
           if (cls is None or r.cls == cls) and (bucket is None or r.bucket == bucket)]
    if not sel:
        return EMPTY
    return SummaryStats.of(sel)
