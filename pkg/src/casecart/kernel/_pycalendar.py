"""Pure-Python event calendar (binary heap keyed by ``(time, seq)``)."""
from __future__ import annotations

import heapq
from typing import Any, NamedTuple


class Event(NamedTuple):
    time: float
    seq: int
    kind: str
    payload: Any


class EventCalendar:
    """Pending events ordered by time, FIFO among equal times."""

    __slots__ = ("_heap", "_seq")

    def __init__(self):
        self._heap: list[Event] = []
        self._seq = 0

    def __len__(self) -> int:
        return len(self._heap)

    def push(self, time: float, kind: str, payload: Any = None) -> int:
        seq = self._seq
        self._seq = seq + 1
        heapq.heappush(self._heap, Event(float(time), seq, kind, payload))
        return seq

    def pop(self) -> Event | None:
        """Next event, or ``None`` once the calendar is exhausted."""
        if not self._heap:
            return None
        return heapq.heappop(self._heap)

    def peek_time(self) -> float:
        return self._heap[0].time if self._heap else float("inf")

    @property
    def inserted(self) -> int:
        return self._seq
