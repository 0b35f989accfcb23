"""Project lifecycle over yearly snapshots: detachment events and survival.

A project is Active while at least one truck-factor developer is still
around. When every developer in the truck-factor set has left (their last
commits lie behind the snapshot and behind the abandonment threshold), a
detachment event is recorded and the project turns Inactive. It turns Active
again only when the truck-factor set attracts a developer who has not
abandoned the project; after the last event, that same observation is what
counts as survival.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta
from enum import Enum

from .authorship import DEFAULT_DOA_MODEL, DoaModel, build_authorship_table
from .history import EMPTY_RULES, RepositoryHistory, RuleSet
from .timeutil import YEAR, add_calendar_years
from .truckfactor import TFSnapshot, TFUndefinedError, compute_tf

ANCHOR_HEAD = "head"
ANCHOR_SNAPSHOT = "snapshot"


@dataclass(frozen=True)
class AbandonmentPolicy:
    """How long a developer must be silent before counting as gone.

    ``anchor`` decides what the silence is measured against: the repository
    head (default) or the snapshot instant under evaluation.
    """

    threshold: timedelta = YEAR
    anchor: str = ANCHOR_HEAD


class ProjectState(Enum):
    ACTIVE = "active"
    INACTIVE = "inactive"


class ContributorKind(Enum):
    NEWCOMER = "newcomer"  # first commit after the detachment
    OLD_CONTRIBUTOR = "old-contributor"


@dataclass(frozen=True)
class TFDDEvent:
    detected_at: datetime  # snapshot that first observed the detachment
    occurred_at: datetime  # last commit of the last detached developer
    detached: frozenset[str]
    tf_at_event: int


@dataclass(frozen=True)
class SnapshotPoint:
    as_of: datetime
    tf: TFSnapshot | None  # None when the truck factor was undefined (gap)


@dataclass(frozen=True)
class LifecycleTimeline:
    repo_id: str
    snapshots: tuple[SnapshotPoint, ...]
    states: tuple[ProjectState, ...]  # parallel to snapshots; gaps carry state
    events: tuple[TFDDEvent, ...]
    survived: bool | None  # None when no event happened
    new_tf_developers: frozenset[str]
    newcomer_split: dict[str, ContributorKind]
    attracted_at: datetime | None


@dataclass(frozen=True)
class PostTFDDMetrics:
    commits_after: int
    pct_commits_after: float
    new_tf_file_share: float  # share of head files main-authored by the new TF set


def developer_activity(history: RepositoryHistory) -> dict[str, tuple[datetime, datetime]]:
    """dev -> (first commit, last commit) timestamps."""
    activity: dict[str, tuple[datetime, datetime]] = {}
    for commit in history.commits:
        dev = commit.author_key()
        first, _last = activity.get(dev, (commit.timestamp, commit.timestamp))
        activity[dev] = (first, commit.timestamp)
    return activity


def is_abandoner(
    dev: str,
    history: RepositoryHistory,
    policy: AbandonmentPolicy = AbandonmentPolicy(),
    at: datetime | None = None,
) -> bool:
    """Whether the developer's silence has reached the policy threshold.

    Raises:
        ValueError: the developer never committed to this history.
    """
    activity = developer_activity(history)
    if dev not in activity:
        raise ValueError(f"{history.repo_id}: unknown developer {dev!r}")
    _first, last = activity[dev]
    if policy.anchor == ANCHOR_SNAPSHOT:
        if at is None:
            raise ValueError("snapshot-anchored policy needs the snapshot instant")
        return at - last >= policy.threshold
    return history.head_at - last >= policy.threshold


def snapshot_instants(
    history: RepositoryHistory, cadence_days: float | None = None
) -> list[datetime]:
    """Snapshot times: creation plus k years (or a fixed cadence), up to head."""
    instants = []
    k = 1
    while True:
        if cadence_days is None:
            at = add_calendar_years(history.created_at, k)
        else:
            at = history.created_at + k * timedelta(days=cadence_days)
        if at > history.head_at:
            break
        instants.append(at)
        k += 1
    return instants


def yearly_snapshots(
    history: RepositoryHistory,
    rules: RuleSet = EMPTY_RULES,
    model: DoaModel = DEFAULT_DOA_MODEL,
    cadence_days: float | None = None,
) -> tuple[SnapshotPoint, ...]:
    """Truck factor at every yearly instant; undefined ones become gaps."""
    points = []
    for at in snapshot_instants(history, cadence_days):
        table = build_authorship_table(history, at, rules, model)
        try:
            tf = compute_tf(table)
        except TFUndefinedError:
            tf = None
        points.append(SnapshotPoint(as_of=at, tf=tf))
    return tuple(points)


class _Walk:
    """State machine shared by event detection and state labelling."""

    def __init__(self, history: RepositoryHistory, policy: AbandonmentPolicy):
        self.policy = policy
        self.history = history
        self.activity = developer_activity(history)

    def gone(self, dev: str, at: datetime) -> bool:
        _first, last = self.activity[dev]
        if self.policy.anchor == ANCHOR_SNAPSHOT:
            return at - last >= self.policy.threshold
        return self.history.head_at - last >= self.policy.threshold

    def run(
        self, snapshots: tuple[SnapshotPoint, ...]
    ) -> tuple[list[TFDDEvent], list[ProjectState]]:
        state = ProjectState.ACTIVE
        states: list[ProjectState] = []
        events: list[TFDDEvent] = []
        for point in snapshots:
            if point.tf is None:
                states.append(state)
                continue
            at = point.as_of
            tf_set = point.tf.tf_developers
            detached = all(
                self.activity[d][1] < at and self.gone(d, at) for d in tf_set
            )
            if state is ProjectState.ACTIVE:
                if detached:
                    state = ProjectState.INACTIVE
                    events.append(
                        TFDDEvent(
                            detected_at=at,
                            occurred_at=max(self.activity[d][1] for d in tf_set),
                            detached=tf_set,
                            tf_at_event=point.tf.tf,
                        )
                    )
            else:
                # only a currently-active TF developer ends the episode; an
                # all-abandoner TF set keeps the project inactive even when
                # someone still has commits ahead of this snapshot
                if any(not self.gone(d, at) for d in tf_set):
                    state = ProjectState.ACTIVE
            states.append(state)
        return events, states


def detect_tfdd(
    snapshots: tuple[SnapshotPoint, ...],
    history: RepositoryHistory,
    policy: AbandonmentPolicy = AbandonmentPolicy(),
) -> tuple[TFDDEvent, ...]:
    """Detachment events: every snapshot whose whole TF set has left, with
    consecutive detections of one episode collapsed into the first."""
    events, _states = _Walk(history, policy).run(snapshots)
    return tuple(events)


def classify_survival(
    snapshots: tuple[SnapshotPoint, ...],
    events: tuple[TFDDEvent, ...],
    history: RepositoryHistory,
    policy: AbandonmentPolicy = AbandonmentPolicy(),
) -> tuple[bool, frozenset[str], dict[str, ContributorKind], datetime | None]:
    """Did the project attract a fresh, active TF developer after the last event?

    Returns (survived, new TF developers at the first qualifying snapshot,
    newcomer split for them, attraction instant).

    Raises:
        ValueError: there are no events to classify.
    """
    if not events:
        raise ValueError(f"{history.repo_id}: survival undefined without a detachment event")
    walk = _Walk(history, policy)
    last = events[-1]
    for point in snapshots:
        if point.tf is None or point.as_of <= last.detected_at:
            continue
        qualifying = frozenset(
            d
            for d in point.tf.tf_developers
            if d not in last.detached and not walk.gone(d, point.as_of)
        )
        if qualifying:
            split = {
                d: (
                    ContributorKind.NEWCOMER
                    if walk.activity[d][0] > last.occurred_at
                    else ContributorKind.OLD_CONTRIBUTOR
                )
                for d in qualifying
            }
            return True, qualifying, split, point.as_of
    return False, frozenset(), {}, None


def attraction_delay_years(occurred_at: datetime, attracted_at: datetime) -> int:
    """1-based whole-year bucket between detachment and attraction."""
    return int((attracted_at - occurred_at) / YEAR) + 1


def post_tfdd_metrics(
    history: RepositoryHistory,
    event: TFDDEvent,
    new_tf_developers: frozenset[str],
    rules: RuleSet = EMPTY_RULES,
    model: DoaModel = DEFAULT_DOA_MODEL,
) -> PostTFDDMetrics:
    """Activity landed after the detachment, and the new TF set's file share at head."""
    total = len(history.commits)
    after = sum(1 for c in history.commits if c.timestamp > event.occurred_at)
    share = 0.0
    if new_tf_developers:
        table = build_authorship_table(history, history.head_at, rules, model)
        if table.files:
            authored = sum(
                1
                for authors in table.main_authors.values()
                if authors & new_tf_developers
            )
            share = authored / len(table.files)
    return PostTFDDMetrics(
        commits_after=after,
        pct_commits_after=after / total,
        new_tf_file_share=share,
    )


def build_timeline(
    history: RepositoryHistory,
    rules: RuleSet = EMPTY_RULES,
    model: DoaModel = DEFAULT_DOA_MODEL,
    policy: AbandonmentPolicy = AbandonmentPolicy(),
    cadence_days: float | None = None,
) -> tuple[LifecycleTimeline, PostTFDDMetrics | None]:
    """Full lifecycle of one repository: snapshots, events, survival, metrics."""
    snapshots = yearly_snapshots(history, rules, model, cadence_days)
    events, states = _Walk(history, policy).run(snapshots)
    survived: bool | None = None
    new_tf: frozenset[str] = frozenset()
    split: dict[str, ContributorKind] = {}
    attracted_at = None
    metrics = None
    if events:
        survived, new_tf, split, attracted_at = classify_survival(
            snapshots, tuple(events), history, policy
        )
        metrics = post_tfdd_metrics(history, events[-1], new_tf, rules, model)
    timeline = LifecycleTimeline(
        repo_id=history.repo_id,
        snapshots=snapshots,
        states=tuple(states),
        events=tuple(events),
        survived=survived,
        new_tf_developers=new_tf,
        newcomer_split=split,
        attracted_at=attracted_at,
    )
    return timeline, metrics
