"""Greedy truck-factor computation over an authorship table.

The truck factor is the size of the smallest developer prefix, in greedy
order, whose removal leaves fewer than half of the files with a main author.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime

from .authorship import AuthorshipTable

COVERAGE_STOP = 0.5


class TFUndefinedError(Exception):
    """No file has a main author, so no removal can be measured."""


@dataclass(frozen=True)
class TFSnapshot:
    as_of: datetime
    tf: int
    tf_developers: frozenset[str]
    coverage_at_stop: float  # in [0, 0.5)
    removal_order: tuple[str, ...]


def coverage(table: AuthorshipTable, removed: frozenset[str] | set[str] = frozenset()) -> float:
    """Fraction of main-authored files still covered after removing developers.

    The denominator is fixed: every file that had a main author in the
    original table, whether or not its authors were removed.

    Raises:
        ValueError: no file has a main author, or ``removed`` contains an
            unknown developer.
    """
    if not table.main_authors:
        raise ValueError("coverage undefined: no file has a main author")
    unknown = set(removed) - set(table.developers())
    if unknown:
        raise ValueError(f"unknown developers in removal set: {sorted(unknown)}")
    covered = sum(1 for authors in table.main_authors.values() if authors - removed)
    return covered / len(table.main_authors)


def compute_tf(table: AuthorshipTable) -> TFSnapshot:
    """Remove the heaviest main author until coverage drops below one half.

    Selection order: most files main-authored, then larger summed score over
    the whole table, then smallest dev_id. Counts never need recomputing
    while a developer remains: every file they main-author is still covered.

    Raises:
        TFUndefinedError: the table has no main-authored files.
    """
    if not table.main_authors:
        raise TFUndefinedError(f"truck factor undefined at {table.as_of.isoformat()}")
    denominator = len(table.main_authors)
    authored_count: dict[str, int] = {}
    for authors in table.main_authors.values():
        for dev in authors:
            authored_count[dev] = authored_count.get(dev, 0) + 1
    ranking = sorted(
        authored_count,
        key=lambda dev: (-authored_count[dev], -table.doa_sum(dev), dev),
    )
    removed: list[str] = []
    removed_set: set[str] = set()
    for dev in ranking:
        removed.append(dev)
        removed_set.add(dev)
        covered = sum(1 for authors in table.main_authors.values() if authors - removed_set)
        if covered / denominator < COVERAGE_STOP:
            return TFSnapshot(
                as_of=table.as_of,
                tf=len(removed),
                tf_developers=frozenset(removed),
                coverage_at_stop=covered / denominator,
                removal_order=tuple(removed),
            )
    raise AssertionError("unreachable: removing every main author empties coverage")
