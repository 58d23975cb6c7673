"""Cooperative wall-clock budgets.

Long-running loops call :func:`checkpoint`; inside a :func:`time_budget`
block it raises :class:`BudgetExceeded` once the deadline has passed.
Outside any block it is a no-op.
"""

from __future__ import annotations

import contextlib
import contextvars
import time

from .exceptions import BudgetExceeded

_deadline: contextvars.ContextVar = contextvars.ContextVar("deadline", default=None)


@contextlib.contextmanager
def time_budget(seconds):
    if seconds is None:
        yield
        return
    token = _deadline.set(time.monotonic() + float(seconds))
    try:
        yield
    finally:
        _deadline.reset(token)


def checkpoint():
    deadline = _deadline.get()
    if deadline is not None and time.monotonic() > deadline:
        raise BudgetExceeded("time budget exhausted")


def parse_duration(text) -> float | None:
    """Parse ``"90"``, ``"90s"``, ``"15m"``, ``"2h"`` or ``"7d"`` into seconds."""
    if text is None:
        return None
    if isinstance(text, (int, float)):
        return float(text)
    text = str(text).strip().lower()
    if not text or text in ("none", "inf"):
        return None
    units = {"s": 1, "m": 60, "h": 3600, "d": 86400}
    if text[-1] in units:
        return float(text[:-1]) * units[text[-1]]
    return float(text)
