"""Guided-path network: nodes, links, routing and the network file format.

Network files are TOML::

    speed = 60.0                       # m/min, optional

    [elevator]
    units = 2
    capacity = 2
    delay_min = 0.6667

    [roles]
    md = "MD"
    ccsa = "CCSA"
    cssd = "CSSD"
    soiled_storage = "SS"
    homes = ["P1", "P2"]
    or_cores = [{ id = "COREA", ors = [1, 16] }]
    or_station_prefix = "OR"           # optional: OR1 ... OR32 station nodes

    [[node]]
    id = "MD"
    kind = "spur-end"                  # intersection | station | spur-end
    floor = 2

    [[link]]
    a = "J1"
    b = "MD"
    length = 15.0
    kind = "spur"                      # uni | bi | spur | elevator

Unidirectional links run from ``a`` to ``b``.  Elevator links join nodes on
different floors and take ``[elevator].delay_min`` to cross, whatever their
length; they are bidirectional unless ``oneway = true``.
"""
from __future__ import annotations

import heapq
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

NODE_KINDS = ("intersection", "station", "spur-end")
LINK_KINDS = ("uni", "bi", "spur", "elevator")


class NetworkError(ValueError):
    """Invalid network description."""


class UnreachableError(NetworkError):
    pass


@dataclass(frozen=True)
class NetworkNode:
    index: int
    id: str
    kind: str
    floor: int = 1

    @property
    def is_endpoint(self) -> bool:
        return self.kind in ("station", "spur-end")


@dataclass(frozen=True)
class NetworkLink:
    index: int
    a: int
    b: int
    length: float
    kind: str
    oneway: bool = False

    @property
    def two_way(self) -> bool:
        """Traffic may use the link in both directions (head-on possible)."""
        return self.kind in ("bi", "spur") or (self.kind == "elevator" and not self.oneway)

    @property
    def directions(self) -> tuple[tuple[int, int], ...]:
        if self.kind == "uni" or (self.kind == "elevator" and self.oneway):
            return ((self.a, self.b),)
        return ((self.a, self.b), (self.b, self.a))


@dataclass(frozen=True)
class Arc:
    """A link traversed in one direction."""

    link: int
    src: int
    dst: int


@dataclass(frozen=True)
class Route:
    arcs: tuple[Arc, ...]
    length: float  # metres, elevator crossings excluded
    elevator_legs: int

    @property
    def links(self) -> tuple[int, ...]:
        return tuple(a.link for a in self.arcs)

    def travel_time(self, speed: float, elevator_delay: float) -> float:
        return self.length / speed + self.elevator_legs * elevator_delay


@dataclass
class ElevatorBank:
    units: int = 2
    capacity: int = 2
    delay: float = 40.0 / 60.0
    occupancy: list[int] = field(default_factory=list)

    def __post_init__(self):
        if self.units < 1 or self.capacity < 1 or self.delay < 0:
            raise NetworkError("elevator needs units >= 1, capacity >= 1, delay >= 0")
        if not self.occupancy:
            self.occupancy = [0] * self.units

    def free_unit(self) -> int | None:
        for i, occ in enumerate(self.occupancy):
            if occ < self.capacity:
                return i
        return None

    def board(self, unit: int) -> None:
        if self.occupancy[unit] >= self.capacity:
            raise RuntimeError(f"elevator unit {unit} over capacity")
        self.occupancy[unit] += 1

    def leave(self, unit: int) -> None:
        self.occupancy[unit] -= 1


@dataclass(frozen=True)
class OrCore:
    node: str
    first_or: int
    last_or: int


class GuidedPathNetwork:
    def __init__(self, nodes, links, roles=None, speed: float = 60.0,
                 elevator: ElevatorBank | None = None):
        self.nodes: list[NetworkNode] = list(nodes)
        self.links: list[NetworkLink] = list(links)
        self.roles: dict = dict(roles or {})
        self.speed = float(speed)
        self.elevator = elevator or ElevatorBank()
        self.index = {n.id: n.index for n in self.nodes}
        self.out: list[list[Arc]] = [[] for _ in self.nodes]
        for ln in self.links:
            for src, dst in ln.directions:
                self.out[src].append(Arc(ln.index, src, dst))
        for arcs in self.out:
            arcs.sort(key=lambda a: a.link)
        self._routes: dict[tuple[int, int], Route] = {}

    # -- construction -------------------------------------------------
    @classmethod
    def from_dict(cls, data: dict) -> "GuidedPathNetwork":
        nodes = []
        seen = set()
        for i, nd in enumerate(data.get("node", [])):
            nid = str(nd["id"])
            if nid in seen:
                raise NetworkError(f"duplicate node id {nid!r}")
            seen.add(nid)
            kind = nd.get("kind", "intersection")
            if kind not in NODE_KINDS:
                raise NetworkError(f"node {nid!r}: unknown kind {kind!r}")
            nodes.append(NetworkNode(i, nid, kind, int(nd.get("floor", 1))))
        idx = {n.id: n.index for n in nodes}
        links = []
        for i, ld in enumerate(data.get("link", [])):
            try:
                a, b = idx[str(ld["a"])], idx[str(ld["b"])]
            except KeyError as e:
                raise NetworkError(f"link {i}: unknown node {e.args[0]!r}") from None
            kind = ld.get("kind", "bi")
            if kind not in LINK_KINDS:
                raise NetworkError(f"link {i}: unknown kind {kind!r}")
            length = float(ld.get("length", 0.0))
            links.append(NetworkLink(i, a, b, length, kind, bool(ld.get("oneway", False))))
        ev = data.get("elevator", {})
        elevator = ElevatorBank(int(ev.get("units", 2)), int(ev.get("capacity", 2)),
                                float(ev.get("delay_min", 40.0 / 60.0)))
        net = cls(nodes, links, data.get("roles", {}), float(data.get("speed", 60.0)), elevator)
        net.validate()
        return net

    @classmethod
    def load(cls, path: str | Path) -> "GuidedPathNetwork":
        with open(path, "rb") as fh:
            try:
                data = tomllib.load(fh)
            except tomllib.TOMLDecodeError as e:
                raise NetworkError(f"{path}: {e}") from None
        return cls.from_dict(data)

    def validate(self) -> None:
        if self.speed <= 0:
            raise NetworkError("speed must be positive")
        degree = [0] * len(self.nodes)
        for ln in self.links:
            if ln.a == ln.b:
                raise NetworkError(f"link {ln.index} is a self-loop")
            if not ln.length > 0:
                raise NetworkError(f"link {ln.index} must have positive length")
            degree[ln.a] += 1
            degree[ln.b] += 1
            fa, fb = self.nodes[ln.a].floor, self.nodes[ln.b].floor
            if ln.kind == "elevator" and fa == fb:
                raise NetworkError(f"elevator link {ln.index} does not change floor")
            if ln.kind != "elevator" and fa != fb:
                raise NetworkError(f"link {ln.index} changes floor without an elevator")
            if ln.kind == "spur":
                ends = [self.nodes[ln.a].kind == "spur-end", self.nodes[ln.b].kind == "spur-end"]
                if sum(ends) != 1:
                    raise NetworkError(f"spur link {ln.index} needs exactly one spur-end endpoint")
        for n in self.nodes:
            if n.kind == "spur-end":
                incident = [ln for ln in self.links if n.index in (ln.a, ln.b)]
                if len(incident) != 1 or incident[0].kind != "spur":
                    raise NetworkError(f"spur-end {n.id!r} must have exactly one incident spur link")
        for key in ("md", "ccsa", "cssd", "soiled_storage"):
            if key in self.roles and self.roles[key] not in self.index:
                raise NetworkError(f"role {key!r} names unknown node {self.roles[key]!r}")
        for h in self.roles.get("homes", []):
            if h not in self.index:
                raise NetworkError(f"home {h!r} is not a node")
        for core in self.or_cores():
            if core.node not in self.index:
                raise NetworkError(f"OR core {core.node!r} is not a node")
        self._check_connectivity()

    def _reach(self, start: int) -> set[int]:
        seen = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for arc in self.out[u]:
                if arc.dst not in seen:
                    seen.add(arc.dst)
                    stack.append(arc.dst)
        return seen

    def _check_connectivity(self) -> None:
        ends = [n.index for n in self.nodes if n.is_endpoint]
        for s in ends:
            missing = set(ends) - self._reach(s)
            if missing:
                other = self.nodes[min(missing)].id
                raise UnreachableError(f"station {other!r} unreachable from {self.nodes[s].id!r}")

    # -- roles ----------------------------------------------------------
    def node_id(self, i: int) -> str:
        return self.nodes[i].id

    def role(self, key: str) -> int:
        try:
            return self.index[self.roles[key]]
        except KeyError:
            raise NetworkError(f"network has no {key!r} role") from None

    def homes(self) -> list[int]:
        return [self.index[h] for h in self.roles.get("homes", [])]

    def or_cores(self) -> list[OrCore]:
        return [OrCore(str(c["id"]), int(c["ors"][0]), int(c["ors"][1]))
                for c in self.roles.get("or_cores", [])]

    def core_for_or(self, or_id: int) -> int:
        for core in self.or_cores():
            if core.first_or <= or_id <= core.last_or:
                return self.index[core.node]
        raise NetworkError(f"no OR core serves OR {or_id}")

    def or_station(self, or_id: int) -> int:
        prefix = self.roles.get("or_station_prefix")
        if not prefix or f"{prefix}{or_id}" not in self.index:
            raise NetworkError(f"network has no station for OR {or_id}")
        return self.index[f"{prefix}{or_id}"]

    # -- routing ----------------------------------------------------------
    def arc_cost(self, arc: Arc) -> float:
        ln = self.links[arc.link]
        if ln.kind == "elevator":
            # routing weight: distance covered at speed during the crossing
            return self.elevator.delay * self.speed
        return ln.length

    def shortest_route(self, src: int | str, dst: int | str, banned: frozenset[int] = frozenset()) -> Route:
        """Minimum-length route; ties go to the lexicographically smallest
        link-index sequence."""
        s = self.index[src] if isinstance(src, str) else src
        t = self.index[dst] if isinstance(dst, str) else dst
        if not banned and (s, t) in self._routes:
            return self._routes[(s, t)]
        best: dict[int, tuple[float, tuple[int, ...]]] = {s: (0.0, ())}
        arcs_to: dict[int, tuple[Arc, ...]] = {s: ()}
        heap = [(0.0, (), s)]
        done = set()
        while heap:
            cost, seq, u = heapq.heappop(heap)
            if u in done:
                continue
            done.add(u)
            if u == t:
                break
            for arc in self.out[u]:
                if arc.link in banned or arc.dst in done:
                    continue
                c = round(cost + self.arc_cost(arc), 9)
                key = (c, seq + (arc.link,))
                if arc.dst not in best or key < best[arc.dst]:
                    best[arc.dst] = key
                    arcs_to[arc.dst] = arcs_to[u] + (arc,)
                    heapq.heappush(heap, (c, key[1], arc.dst))
        if t not in done:
            raise UnreachableError(f"{self.nodes[t].id!r} unreachable from {self.nodes[s].id!r}")
        arcs = arcs_to[t]
        length = math.fsum(self.links[a.link].length for a in arcs if self.links[a.link].kind != "elevator")
        legs = sum(1 for a in arcs if self.links[a.link].kind == "elevator")
        route = Route(arcs, length, legs)
        if not banned:
            self._routes[(s, t)] = route
        return route

    def route_length(self, src: int, dst: int) -> float:
        """Routing metric of the shortest route (metres, elevator-equivalent)."""
        if src == dst:
            return 0.0
        r = self.shortest_route(src, dst)
        return r.length + r.elevator_legs * self.elevator.delay * self.speed
