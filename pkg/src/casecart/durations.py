"""Surgery-duration distributions by service and scheduled time of day (hours)."""
from __future__ import annotations

from dataclasses import dataclass

from .policy import parse_hhmm
from .stochastic import Distribution, parse_distribution

SERVICES = ("ENT", "Gynecology", "Neurological", "OrthoTrauma", "Pediatric", "Urology", "Vascular")

_ALIASES = {
    "ent": "ENT", "entsurgery": "ENT",
    "gynecology": "Gynecology", "gynecologyservice": "Gynecology", "gyn": "Gynecology",
    "neurological": "Neurological", "neurology": "Neurological", "neurologicalsurgery": "Neurological",
    "neuro": "Neurological",
    "orthotrauma": "OrthoTrauma", "orthotraumasurgery": "OrthoTrauma", "ortho": "OrthoTrauma",
    "pediatric": "Pediatric", "pediatricsurgery": "Pediatric", "peds": "Pediatric",
    "urology": "Urology", "urologysurgery": "Urology",
    "vascular": "Vascular", "vascularsurgery": "Vascular",
}


def canonical_service(name: str) -> str:
    key = "".join(ch for ch in str(name).lower() if ch.isalnum())
    try:
        return _ALIASES[key]
    except KeyError:
        raise ValueError(f"unknown service {name!r}") from None


# (from, to, expression); "to" at or before "from" wraps past midnight
DEFAULT_TABLE: dict[str, list[tuple[str, str, str]]] = {
    "ENT": [("00:00", "08:00", "LOGN(2.02, 2.12)"),
            ("08:00", "14:00", "LOGN(1.62, 1.2)"),
            ("14:00", "00:00", "LOGN(1.23, 0.672)")],
    "Gynecology": [("07:00", "08:00", "0.01 + 4.81 * BETA(2.85, 4.03)"),
                   ("15:00", "16:00", "0.27 + LOGN(0.965, 0.511)"),
                   ("16:00", "07:00", "LOGN(1.65, 0.859)")],
    "Neurological": [("00:00", "09:00", "GAMM(0.494, 5.44)"),
                     ("09:00", "13:00", "ERLA(0.454, 5)"),
                     ("13:00", "00:00", "12 * BETA(4.95, 25.8)")],
    "OrthoTrauma": [("00:00", "08:00", "ERLA(0.587, 5)"),
                    ("08:00", "14:00", "LOGN(2.57, 1.29)"),
                    ("14:00", "00:00", "LOGN(2.09, 0.983)")],
    "Pediatric": [("00:00", "00:00", "LOGN(1.35, 0.693)")],
    "Urology": [("00:00", "07:00", "LOGN(1.63, 0.975)"),
                ("07:00", "08:00", "LOGN(1.2, 0.821)"),
                ("08:00", "00:00", "ERLA(0.244, 4)")],
    "Vascular": [("00:00", "07:00", "0.03 + 8.97 * BETA(0.97, 1.78)"),
                 ("07:00", "09:00", "GAMM(0.608, 3.58)"),
                 ("09:00", "14:00", "GAMM(0.42, 4.39)"),
                 ("14:00", "00:00", "TRIA(0.13, 0.83, 3.54)")],
}


@dataclass(frozen=True)
class Window:
    start: float
    end: float
    dist: Distribution

    def covers(self, tod: float) -> bool:
        if self.end <= self.start:  # wraps midnight; equal bounds cover the whole day
            return tod >= self.start or tod < self.end
        return self.start <= tod < self.end


class DurationTable:
    """Per-service duration windows.

    A time of day no window covers falls back to the window that starts most
    recently before it (cyclically).
    """

    def __init__(self, table: dict[str, list[tuple[str, str, str]]] | None = None):
        table = DEFAULT_TABLE if table is None else table
        self.windows: dict[str, list[Window]] = {}
        for svc, rows in table.items():
            name = canonical_service(svc)
            ws = [Window(parse_hhmm(a), parse_hhmm(b), parse_distribution(e)) for a, b, e in rows]
            if not ws:
                raise ValueError(f"service {name} has no duration windows")
            self.windows[name] = ws
        missing = set(SERVICES) - set(self.windows)
        if missing:
            raise ValueError(f"duration table lacks services {sorted(missing)}")

    def select(self, service: str, tod: float) -> Distribution:
        ws = self.windows[service]
        tod = tod % 1440.0
        for w in ws:
            if w.covers(tod):
                return w.dist
        return min(ws, key=lambda w: (tod - w.start) % 1440.0).dist

    def expressions(self) -> dict[str, list[tuple[str, str, str]]]:
        from .policy import hhmm
        return {s: [(hhmm(w.start), hhmm(w.end), w.dist.expression()) for w in ws]
                for s, ws in self.windows.items()}
