"""Per-replication output records."""
from __future__ import annotations

from dataclasses import dataclass, field

# time-of-day buckets used for AGV travel-time reporting, in minutes since midnight
BUCKETS: tuple[tuple[str, int, int], ...] = (
    ("00-03", 0, 180),
    ("03-06", 180, 360),
    ("06-09", 360, 540),
    ("09-12", 540, 720),
    ("12-15", 720, 900),
    ("15-19", 900, 1140),
    ("19-21", 1140, 1260),
    ("21-24", 1260, 1440),
)
BUCKET_LABELS = tuple(b[0] for b in BUCKETS)


def bucket_of(t: float) -> str:
    tod = t % 1440.0
    for label, lo, hi in BUCKETS:
        if lo <= tod < hi:
            return label
    return BUCKETS[-1][0]  # float rounding at 1440


@dataclass(frozen=True)
class SurgeryRecord:
    surgery_id: str
    service: str
    or_id: int
    day: int
    scheduled: float
    released: float
    staged: float
    actual_start: float
    duration_h: float
    counted: bool = True

    @property
    def delay(self) -> float:
        return max(0.0, self.actual_start - self.scheduled)


@dataclass(frozen=True)
class TripRecord:
    agv: int
    cls: str
    origin: str
    dest: str
    depart: float
    arrive: float
    counted: bool = True

    @property
    def minutes(self) -> float:
        return self.arrive - self.depart

    @property
    def bucket(self) -> str:
        return bucket_of(self.depart)


@dataclass
class ReplicationResult:
    rep_index: int
    surgeries: list[SurgeryRecord] = field(default_factory=list)
    trips: list[TripRecord] = field(default_factory=list)
    utilization: dict[str, float] = field(default_factory=dict)
    diagnostics: dict[str, int] = field(default_factory=dict)
    trace: list[tuple] = field(default_factory=list)
    events: int = 0
