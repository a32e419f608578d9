"""Discrete-event engine: clock, scheduling and the replication runner."""
from __future__ import annotations

import math
from typing import Any, Callable, Protocol

from .calendar import EventCalendar
from .results import ReplicationResult


class SchedulingError(RuntimeError):
    """An event was scheduled before the current clock."""


class LivelockError(RuntimeError):
    """The event loop exceeded its event-count safety cap."""


class Simulation:
    """Single-threaded event loop.

    Events carry a ``(callback, args)`` payload; ``kind`` is a tag for traces.
    """

    def __init__(self, event_cap: int = 5_000_000, calendar_cls=None):
        self.now = 0.0
        self.calendar = (calendar_cls or EventCalendar)()
        self.event_cap = event_cap
        self.processed = 0

    def at(self, t: float, callback: Callable[..., Any], *args, kind: str = "") -> int:
        if t < self.now:
            raise SchedulingError(f"event {kind or callback.__name__!r} at t={t} before clock {self.now}")
        return self.calendar.push(t, kind, (callback, args))

    def after(self, delay: float, callback: Callable[..., Any], *args, kind: str = "") -> int:
        return self.at(self.now + delay, callback, *args, kind=kind)

    def run(self, until: float = math.inf) -> None:
        cal = self.calendar
        while len(cal) and cal.peek_time() <= until:
            ev = cal.pop()
            self.now = ev.time
            self.processed += 1
            if self.processed > self.event_cap:
                raise LivelockError(f"more than {self.event_cap} events processed by t={self.now:.3f}")
            fn, args = ev.payload
            fn(*args)
        if until != math.inf:
            self.now = max(self.now, until)


class Model(Protocol):
    def start(self, sim: Simulation, seed: int, rep_index: int) -> None: ...

    def collect(self, sim: Simulation, rep_index: int) -> ReplicationResult: ...


def run_replication(model: Model, horizon: float, seed: int, rep_index: int,
                    event_cap: int = 5_000_000) -> ReplicationResult:
    """Run one replication of ``model`` up to ``horizon`` minutes."""
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    sim = Simulation(event_cap=event_cap)
    model.start(sim, seed, rep_index)
    sim.run(until=horizon)
    result = model.collect(sim, rep_index)
    result.events = sim.processed
    return result
