"""Case-cart delivery policies: when a surgery's cart is released to MD."""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

log = logging.getLogger(__name__)

DAY = 1440.0


class PolicyKind(enum.Enum):
    CURRENT = "current"
    TWOBATCH = "twobatch"
    JIT = "jit"

    @classmethod
    def parse(cls, text: "str | PolicyKind") -> "PolicyKind":
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower().replace("-", "").replace("_", "").replace(" ", "")
        aliases = {"current": cls.CURRENT, "1": cls.CURRENT, "model1": cls.CURRENT,
                   "twobatch": cls.TWOBATCH, "2": cls.TWOBATCH, "model2": cls.TWOBATCH,
                   "jit": cls.JIT, "justintime": cls.JIT, "3": cls.JIT, "model3": cls.JIT}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown policy {text!r} (expected current, twobatch or jit)") from None


ALL_POLICIES = (PolicyKind.CURRENT, PolicyKind.TWOBATCH, PolicyKind.JIT)


def policy_label(policy: PolicyKind) -> int:
    return {PolicyKind.CURRENT: 1, PolicyKind.TWOBATCH: 2, PolicyKind.JIT: 3}[policy]


def hhmm(minutes: float) -> str:
    m = int(round(minutes))
    return f"{m // 60:02d}:{m % 60:02d}"


def parse_hhmm(text: str | int | float) -> float:
    if isinstance(text, (int, float)):
        return float(text)
    h, _, m = str(text).strip().partition(":")
    if not (h.isdigit() and m.isdigit() and len(m) == 2):
        raise ValueError(f"malformed time {text!r}, expected HH:MM")
    val = int(h) * 60 + int(m)
    if int(m) >= 60 or val >= DAY:
        raise ValueError(f"time {text!r} out of range")
    return float(val)


@dataclass(frozen=True)
class PolicyParams:
    """Times of day are minutes after midnight."""

    current_batch: float = 900.0  # 15:00, day before
    twobatch_evening: float = 900.0  # 15:00, day before, morning cases
    twobatch_morning: float = 360.0  # 06:00, same day, afternoon cases
    morning_cutoff: float = 720.0  # 12:00 inclusive counts as morning
    jit_interval: float = 60.0

    def __post_init__(self):
        if not self.jit_interval > 0:
            raise ValueError("jit_interval must be positive")
        for name in ("current_batch", "twobatch_evening", "twobatch_morning", "morning_cutoff"):
            v = getattr(self, name)
            if not 0 <= v < DAY:
                raise ValueError(f"{name} must lie within [00:00, 24:00)")
        if self.twobatch_morning > self.morning_cutoff:
            raise ValueError("same-day batch must not come after the morning cutoff")


def release_time(policy: PolicyKind, params: PolicyParams, scheduled_start: float,
                 sim_start: float = 0.0) -> float:
    """Release time of the cart for a surgery scheduled at ``scheduled_start``
    (absolute minutes, day 0 starting at 0)."""
    day = int(scheduled_start // DAY)
    tod = scheduled_start - day * DAY
    if policy is PolicyKind.CURRENT:
        t = (day - 1) * DAY + params.current_batch
    elif policy is PolicyKind.TWOBATCH:
        if tod <= params.morning_cutoff:
            t = (day - 1) * DAY + params.twobatch_evening
        else:
            t = day * DAY + params.twobatch_morning
    elif policy is PolicyKind.JIT:
        t = scheduled_start - params.jit_interval
    else:  # pragma: no cover
        raise ValueError(policy)
    if t < sim_start:
        log.warning("release for surgery at %.1f clamped from %.1f to simulation start", scheduled_start, t)
        t = sim_start
    return t
