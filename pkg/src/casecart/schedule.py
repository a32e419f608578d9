"""Surgery schedules: CSV loading/serialization and a synthetic generator.

CSV columns are ``surgery_id,date,or_id,service,scheduled_start[,duration_hours]``.
``date`` is either a day index (day 1 is the first surgery day; day 0 is
reserved) or an ISO date, in which case the earliest date becomes day 1.
"""
from __future__ import annotations

import csv
import datetime as dt
import io
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .durations import SERVICES, DurationTable, canonical_service
from .kernel.rng import RngStream
from .policy import hhmm, parse_hhmm

log = logging.getLogger(__name__)

N_ORS = 32
COLUMNS = ("surgery_id", "date", "or_id", "service", "scheduled_start", "duration_hours")
WEEKDAYS = ("Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday")

# case totals by service and weekday over the observation period below
CASE_TOTALS: dict[str, dict[str, int]] = {
    "ENT": dict(Sunday=25, Monday=295, Tuesday=148, Wednesday=264, Thursday=231, Friday=302, Saturday=20),
    "Gynecology": dict(Sunday=17, Monday=227, Tuesday=133, Wednesday=181, Thursday=176, Friday=198,
                       Saturday=13),
    "Neurological": dict(Sunday=22, Monday=174, Tuesday=168, Wednesday=293, Thursday=163, Friday=225,
                         Saturday=17),
    "OrthoTrauma": dict(Sunday=2, Monday=205, Tuesday=171, Wednesday=174, Thursday=206, Friday=207,
                        Saturday=56),
    "Pediatric": dict(Sunday=62, Monday=145, Tuesday=248, Wednesday=153, Thursday=276, Friday=158,
                      Saturday=79),
    "Urology": dict(Sunday=39, Monday=293, Tuesday=333, Wednesday=298, Thursday=382, Friday=466, Saturday=72),
    "Vascular": dict(Sunday=61, Monday=141, Tuesday=242, Wednesday=224, Thursday=241, Friday=235, Saturday=81),
}
OBSERVATION_PERIOD = (dt.date(2018, 1, 1), dt.date(2018, 9, 11))


class ScheduleError(ValueError):
    """Malformed schedule file or record."""


@dataclass(frozen=True, order=True)
class ScheduleRecord:
    day: int
    start: float  # minutes after midnight
    surgery_id: str
    or_id: int
    service: str
    duration_h: float | None = None

    def __post_init__(self):
        if not 1 <= self.or_id <= N_ORS:
            raise ScheduleError(f"or_id {self.or_id} outside 1..{N_ORS}")
        if self.service not in SERVICES:
            raise ScheduleError(f"unknown service {self.service!r}")
        if self.day < 1:
            raise ScheduleError("surgery days start at 1 (day 0 is reserved)")
        if not 0 <= self.start < 1440:
            raise ScheduleError("scheduled start must lie within the day")
        if self.duration_h is not None and not self.duration_h > 0:
            raise ScheduleError("duration override must be positive")

    @property
    def scheduled(self) -> float:
        """Absolute scheduled start in minutes since day 0, 00:00."""
        return self.day * 1440.0 + self.start


def weekday_counts(first: dt.date = OBSERVATION_PERIOD[0], last: dt.date = OBSERVATION_PERIOD[1]) -> dict[str, int]:
    """Number of each weekday in the inclusive date range, by enumeration."""
    c = Counter(WEEKDAYS[(first + dt.timedelta(days=i)).weekday()] for i in range((last - first).days + 1))
    return {w: c[w] for w in WEEKDAYS}


def weekday_means() -> dict[str, tuple[float, ...]]:
    """Mean daily case count per service, indexed Monday..Sunday."""
    nd = weekday_counts()
    return {s: tuple(CASE_TOTALS[s][w] / nd[w] for w in WEEKDAYS) for s in SERVICES}


# -- CSV ------------------------------------------------------------------
def _parse_rows(rows: list[tuple[int, dict]], source: str) -> list[ScheduleRecord]:
    iso = None
    parsed = []
    for lineno, row in rows:
        where = f"{source}, row {lineno}"
        try:
            raw_date = (row.get("date") or "").strip()
            is_iso = "-" in raw_date
            if iso is None:
                iso = is_iso
            elif iso != is_iso:
                raise ScheduleError("mixes ISO dates and day indices")
            date = dt.date.fromisoformat(raw_date) if is_iso else int(raw_date)
            or_id = int(row["or_id"])
            service = canonical_service(row["service"])
            start = parse_hhmm(row["scheduled_start"])
            dur = (row.get("duration_hours") or "").strip()
            parsed.append((lineno, where, row["surgery_id"].strip(), date, or_id, service, start,
                           float(dur) if dur else None))
        except (ValueError, KeyError, TypeError) as e:
            raise ScheduleError(f"{where}: {e}") from None
    base = min((p[3] for p in parsed), default=None) if iso else None
    out = []
    ids = set()
    for lineno, where, sid, date, or_id, service, start, dur in parsed:
        day = (date - base).days + 1 if iso else date
        try:
            rec = ScheduleRecord(day, start, sid, or_id, service, dur)
        except ScheduleError as e:
            raise ScheduleError(f"{where}: {e}") from None
        if sid in ids:
            raise ScheduleError(f"{where}: duplicate surgery id {sid!r}")
        ids.add(sid)
        out.append(rec)
    out.sort()
    _warn_overlaps(out)
    return out


def _warn_overlaps(records: list[ScheduleRecord], table: DurationTable | None = None) -> int:
    table = table or _default_table()
    last_end: dict[int, tuple[float, str]] = {}
    n = 0
    for r in sorted(records, key=lambda r: (r.or_id, r.scheduled)):
        key = r.or_id
        end = r.scheduled + 60.0 * (r.duration_h or table.select(r.service, r.start).mean)
        prev = last_end.get(key)
        if prev and r.scheduled < prev[0]:
            n += 1
            log.warning("surgery %s overlaps %s in OR %d; the later one will queue", r.surgery_id, prev[1], r.or_id)
        if not prev or end > prev[0]:
            last_end[key] = (end, r.surgery_id)
    return n


_TABLE: DurationTable | None = None


def _default_table() -> DurationTable:
    global _TABLE
    if _TABLE is None:
        _TABLE = DurationTable()
    return _TABLE


def read_schedule(text: str, source: str = "<schedule>") -> list[ScheduleRecord]:
    reader = csv.DictReader(io.StringIO(text))
    header = [h.strip() for h in (reader.fieldnames or [])]
    missing = [c for c in COLUMNS[:5] if c not in header]
    if missing:
        raise ScheduleError(f"{source}: header lacks columns {missing}")
    reader.fieldnames = header
    rows = [(i + 2, row) for i, row in enumerate(reader)]
    return _parse_rows(rows, source)


def load_schedule(path: str | Path) -> list[ScheduleRecord]:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ScheduleError(f"cannot read schedule {path}: {e.strerror}") from None
    return read_schedule(text, str(path))


def format_schedule(records: list[ScheduleRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    with_dur = any(r.duration_h is not None for r in records)
    w.writerow(COLUMNS if with_dur else COLUMNS[:5])
    for r in records:
        row = [r.surgery_id, r.day, r.or_id, r.service, hhmm(r.start)]
        if with_dur:
            row.append("" if r.duration_h is None else repr(r.duration_h))
        w.writerow(row)
    return buf.getvalue()


def write_schedule(records: list[ScheduleRecord], path: str | Path) -> None:
    Path(path).write_text(format_schedule(records))


def daily_max(schedule: list[ScheduleRecord], service: str) -> int:
    counts = Counter(r.day for r in schedule if r.service == service)
    return max(counts.values(), default=0)


# -- generator --------------------------------------------------------------
@dataclass
class GeneratorConfig:
    """Synthetic schedule parameters.

    ``means[service]`` holds seven mean daily counts, Monday first.  Day 1
    falls on ``first_weekday`` (0 = Monday).
    """

    means: dict[str, tuple[float, ...]] = field(default_factory=weekday_means)
    window: tuple[float, float] = (360.0, 900.0)
    days: int = 8
    seed: int = 12345
    first_weekday: int = 0
    grid: float = 15.0
    n_ors: int = N_ORS
    turnover: float = 0.0  # planned gap after each case, minutes
    durations: DurationTable | None = None

    def validate(self) -> None:
        lo, hi = self.window
        if not 0 <= lo <= hi < 1440:
            raise ValueError("start window must lie within one day")
        if self.days < 0:
            raise ValueError("days must be non-negative")
        if not 1 <= self.n_ors <= N_ORS:
            raise ValueError(f"n_ors must be in 1..{N_ORS}")
        if self.turnover < 0:
            raise ValueError("turnover must be non-negative")
        if not self.grid > 0:
            raise ValueError("grid must be positive")
        for s, m in self.means.items():
            canonical_service(s)
            if len(m) != 7 or any(not (x >= 0 and math.isfinite(x)) for x in m):
                raise ValueError(f"{s}: need seven non-negative means")


def generate_schedule(cfg: GeneratorConfig) -> list[ScheduleRecord]:
    """Poisson daily counts, grid-uniform starts, first-fit OR assignment."""
    cfg.validate()
    table = cfg.durations or _default_table()
    lo, hi = cfg.window
    slots = [lo + k * cfg.grid for k in range(int(math.floor((hi - lo) / cfg.grid + 1e-9)) + 1)]
    means = {canonical_service(s): m for s, m in cfg.means.items()}
    counts_rng = RngStream(cfg.seed, "generator/counts")
    times_rng = RngStream(cfg.seed, "generator/starts")
    out: list[ScheduleRecord] = []
    thinned = 0
    for day in range(1, cfg.days + 1):
        wd = (cfg.first_weekday + day - 1) % 7
        cases = []
        for svc in SERVICES:
            mu = means.get(svc, (0.0,) * 7)[wd]
            n = counts_rng.poisson(mu) if mu > 0 else 0
            for _ in range(n):
                cases.append((slots[int(times_rng.integers(0, len(slots)))], SERVICES.index(svc), len(cases)))
        cases.sort()
        busy: list[list[tuple[float, float]]] = [[] for _ in range(cfg.n_ors)]
        seq = 0
        for start, si, _ in cases:
            svc = SERVICES[si]
            end = start + 60.0 * table.select(svc, start).mean + cfg.turnover
            for o in range(cfg.n_ors):
                if all(end <= a or start >= b for a, b in busy[o]):
                    busy[o].append((start, end))
                    seq += 1
                    out.append(ScheduleRecord(day, start, f"D{day:02d}-{seq:03d}", o + 1, svc))
                    break
            else:
                thinned += 1
    if thinned:
        log.warning("thinned %d surgeries that did not fit the %d ORs", thinned, cfg.n_ors)
    out.sort()
    return out
