"""Duration and timestamp helpers shared across the analysis pipeline."""

from __future__ import annotations

import calendar
import re
from datetime import datetime, timedelta, timezone

# Average calendar lengths; every duration constant in the pipeline uses these.
DAY = timedelta(days=1)
MONTH = timedelta(days=30.44)
YEAR = timedelta(days=365.25)

_DURATION_RE = re.compile(r"^\s*(\d+(?:\.\d+)?)\s*(d|m|y)\s*$", re.IGNORECASE)


def parse_duration(text: str) -> timedelta:
    """Parse a duration like ``30d``, ``6m``, ``1.5y`` into a timedelta.

    Units: d = days, m = months of 30.44 days, y = years of 365.25 days.

    Raises:
        ValueError: if the text is not ``<number><unit>``.
    """
    match = _DURATION_RE.match(text)
    if match is None:
        raise ValueError(f"invalid duration {text!r}: expected <number>d|m|y")
    value = float(match.group(1))
    unit = match.group(2).lower()
    if unit == "d":
        return value * DAY
    if unit == "m":
        return value * MONTH
    return value * YEAR


def format_duration(delta: timedelta) -> str:
    """Render a duration in the most natural of d/m/y units."""
    days = delta / DAY
    for unit, span in (("y", YEAR / DAY), ("m", MONTH / DAY)):
        units = days / span
        if units >= 1 and abs(units - round(units, 2)) < 1e-9:
            text = f"{round(units, 2):g}{unit}"
            return text
    return f"{days:g}d"


def parse_instant(text: str) -> datetime:
    """Parse an ISO-8601 timestamp to an aware UTC datetime.

    Naive timestamps are taken as UTC; a trailing ``Z`` is accepted.
    """
    cleaned = text.strip()
    if cleaned.endswith(("Z", "z")):
        cleaned = cleaned[:-1] + "+00:00"
    moment = datetime.fromisoformat(cleaned)
    if moment.tzinfo is None:
        return moment.replace(tzinfo=timezone.utc)
    return moment.astimezone(timezone.utc)


def format_instant(moment: datetime) -> str:
    """Render an aware datetime as ISO-8601 UTC with a Z suffix."""
    return moment.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def add_calendar_years(moment: datetime, years: int) -> datetime:
    """Shift a datetime by whole calendar years, clamping Feb 29 to Feb 28."""
    year = moment.year + years
    day = moment.day
    if moment.month == 2 and day == 29 and not calendar.isleap(year):
        day = 28
    return moment.replace(year=year, day=day)
