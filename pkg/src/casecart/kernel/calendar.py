"""Event calendar selection: compiled heap when built, pure Python otherwise.

Set ``CASECART_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

from ._pycalendar import Event
from ._pycalendar import EventCalendar as PyEventCalendar

CEventCalendar = None
if os.environ.get("CASECART_PURE_PYTHON") != "1":
    try:
        from ._ccalendar import EventCalendar as CEventCalendar
    except ImportError:  # extension not built
        CEventCalendar = None

EventCalendar = CEventCalendar or PyEventCalendar
COMPILED = CEventCalendar is not None

__all__ = ["Event", "EventCalendar", "PyEventCalendar", "CEventCalendar", "COMPILED"]
