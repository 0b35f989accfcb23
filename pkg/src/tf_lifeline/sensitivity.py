"""Abandonment-threshold sensitivity over inter-commit gap profiles.

For every truck-factor developer of every repository, the gaps between their
consecutive commits say how often a given silence threshold would have
declared them gone while they eventually returned. Sweeping a grid of
thresholds yields precision, the improvement over the next smaller threshold,
and their harmonic mean.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import timedelta
from decimal import ROUND_HALF_EVEN, Decimal

from .history import RepositoryHistory
from .timeutil import MONTH, YEAR, format_duration

DEFAULT_GRID = (3 * MONTH, 6 * MONTH, 1 * YEAR, 1.5 * YEAR, 2 * YEAR)


@dataclass(frozen=True)
class InterCommitProfile:
    repo_id: str
    dev_id: str
    deltas: tuple[timedelta, ...]  # ascending


@dataclass(frozen=True)
class SensitivityRow:
    threshold: timedelta
    label: str
    precision: float
    improvement: float | None  # None for the smallest threshold, or nothing to correct
    harmonic: float | None


@dataclass(frozen=True)
class SensitivityReport:
    profile_count: int
    rows: tuple[SensitivityRow, ...]


def profile_developers(
    history: RepositoryHistory, tf_developers: frozenset[str] | set[str]
) -> list[InterCommitProfile]:
    """Gap profiles for the given developers; single-commit developers yield none."""
    commits_by_dev: dict[str, list] = {}
    for commit in history.commits:
        dev = commit.author_key()
        if dev in tf_developers:
            commits_by_dev.setdefault(dev, []).append(commit.timestamp)
    profiles = []
    for dev in sorted(commits_by_dev):
        stamps = commits_by_dev[dev]
        if len(stamps) < 2:
            continue
        deltas = sorted(b - a for a, b in zip(stamps, stamps[1:]))
        profiles.append(
            InterCommitProfile(repo_id=history.repo_id, dev_id=dev, deltas=tuple(deltas))
        )
    return profiles


def _errs(profile: InterCommitProfile, threshold: timedelta) -> bool:
    # a gap reaching the threshold means the developer would have been
    # declared gone mid-profile and later returned
    return bool(profile.deltas) and profile.deltas[-1] >= threshold


def precision_of(threshold: timedelta, profiles: list[InterCommitProfile]) -> float:
    """Fraction of profiles with no gap reaching the threshold.

    Raises:
        ValueError: no profiles given.
    """
    if not profiles:
        raise ValueError("precision undefined over zero profiles")
    fine = sum(1 for p in profiles if not _errs(p, threshold))
    return fine / len(profiles)


def improvement_of(
    larger: timedelta, smaller: timedelta, profiles: list[InterCommitProfile]
) -> float | None:
    """Share of the smaller threshold's mistakes the larger threshold fixes.

    None when the smaller threshold made no mistakes.

    Raises:
        ValueError: thresholds not strictly ordered, or no profiles given.
    """
    if larger <= smaller:
        raise ValueError("improvement needs larger > smaller threshold")
    if not profiles:
        raise ValueError("improvement undefined over zero profiles")
    flagged = [p for p in profiles if _errs(p, smaller)]
    if not flagged:
        return None
    corrected = sum(1 for p in flagged if not _errs(p, larger))
    return corrected / len(flagged)


def harmonic(precision: float, improvement: float) -> float:
    """Harmonic mean 2pi/(p+i).

    Raises:
        ValueError: both terms are zero.
    """
    if precision + improvement == 0:
        raise ValueError("harmonic mean undefined when both terms are zero")
    return 2 * precision * improvement / (precision + improvement)


def table_round(value: float) -> float:
    """Display rounding for report rows: two stages, 3 decimals then 2.

    Staged rounding with ties-to-even prints 0.6454 as 0.64 (via 0.645) where
    single-stage rounding would print 0.65; the sensitivity table uses this
    convention throughout.
    """
    coarse = Decimal(repr(value)).quantize(Decimal("0.001"), rounding=ROUND_HALF_EVEN)
    return float(coarse.quantize(Decimal("0.01"), rounding=ROUND_HALF_EVEN))


def build_report(
    profiles: list[InterCommitProfile], grid: tuple[timedelta, ...] = DEFAULT_GRID
) -> SensitivityReport:
    """Precision/improvement/harmonic rows over an ascending threshold grid.

    Raises:
        ValueError: grid not strictly ascending, or no profiles given.
    """
    if list(grid) != sorted(set(grid)):
        raise ValueError("threshold grid must be strictly ascending")
    if not profiles:
        raise ValueError("sensitivity report needs at least one profile")
    rows = []
    previous: timedelta | None = None
    for threshold in grid:
        precision = precision_of(threshold, profiles)
        improvement = None
        mean = None
        if previous is not None:
            improvement = improvement_of(threshold, previous, profiles)
            if improvement is not None and (precision + improvement) > 0:
                mean = harmonic(precision, improvement)
        rows.append(
            SensitivityRow(
                threshold=threshold,
                label=format_duration(threshold),
                precision=precision,
                improvement=improvement,
                harmonic=mean,
            )
        )
        previous = threshold
    return SensitivityReport(profile_count=len(profiles), rows=tuple(rows))
