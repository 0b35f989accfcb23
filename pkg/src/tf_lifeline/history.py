"""Repository history model: commits, file changes, snapshots, dataset filters.

A history is an immutable, time-ordered list of commits. Every downstream
computation (authorship, truck factor, lifecycle) replays this structure, so
ingestion is the only place that touches raw logs or git itself.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from datetime import datetime, timedelta
from enum import Enum
from fnmatch import fnmatchcase
from pathlib import Path

from .timeutil import YEAR, parse_instant

logger = logging.getLogger(__name__)

# Dataset filter defaults: a project is dropped when more than half of its
# files ever added appear within the first <20 commits, or when its commit
# span is shorter than 2 years (a span of exactly 2 years is kept).
MIGRATION_COMMIT_WINDOW = 20
MIGRATION_FRACTION = 0.5
LONGEVITY_MINIMUM = 2 * YEAR


class HistoryError(Exception):
    """Base for ingestion and replay failures."""


class MalformedLogError(HistoryError):
    """A normalized-log line could not be parsed; message carries the line number."""


class EmptyHistoryError(HistoryError):
    """The source contains no commits."""


class ChangeKind(str, Enum):
    ADD = "A"
    MODIFY = "M"
    DELETE = "D"
    RENAME = "R"


@dataclass(frozen=True)
class FileChange:
    kind: ChangeKind
    path: str
    old_path: str | None = None  # set for renames only


@dataclass(frozen=True)
class CommitRecord:
    id: str
    author_name: str
    author_email: str
    timestamp: datetime  # aware UTC
    is_merge: bool
    changes: tuple[FileChange, ...]
    dev_id: str | None = None  # filled by identity resolution

    def author_key(self) -> str:
        """Resolution result when present, lower-cased e-mail otherwise."""
        return self.dev_id if self.dev_id is not None else self.author_email.lower()


@dataclass(frozen=True)
class RepositoryHistory:
    repo_id: str
    commits: tuple[CommitRecord, ...]

    def __post_init__(self) -> None:
        if not self.commits:
            raise EmptyHistoryError(f"{self.repo_id}: history has no commits")
        keys = [(c.timestamp, c.id) for c in self.commits]
        if keys != sorted(keys):
            raise HistoryError(f"{self.repo_id}: commits not ascending by (timestamp, id)")

    @property
    def created_at(self) -> datetime:
        return self.commits[0].timestamp

    @property
    def head_at(self) -> datetime:
        return self.commits[-1].timestamp

    def span(self) -> timedelta:
        return self.head_at - self.created_at


@dataclass(frozen=True)
class FileSnapshot:
    as_of: datetime
    live_files: frozenset[str]


# ---------------------------------------------------------------------------
# ingestion


def _validate_path(path: str, where: str) -> str:
    if not path or path.startswith("/") or ".." in path.split("/"):
        raise MalformedLogError(f"{where}: unsafe file path {path!r}")
    return path


_KINDS = {k.value: k for k in ChangeKind}


def _parse_change(raw: dict, where: str) -> FileChange:
    kind = _KINDS.get(raw.get("kind"))
    if kind is None:
        raise MalformedLogError(f"{where}: unknown change kind {raw.get('kind')!r}")
    path = _validate_path(str(raw.get("path") or ""), where)
    old_path = raw.get("old_path")
    if kind is ChangeKind.RENAME:
        if not old_path:
            raise MalformedLogError(f"{where}: rename without old_path")
        old_path = _validate_path(str(old_path), where)
    elif old_path:
        raise MalformedLogError(f"{where}: old_path given for non-rename")
    return FileChange(kind=kind, path=path, old_path=old_path)


def parse_log_line(line: str, lineno: int) -> CommitRecord:
    where = f"line {lineno}"
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedLogError(f"{where}: invalid JSON ({exc.msg})") from exc
    if not isinstance(raw, dict):
        raise MalformedLogError(f"{where}: expected an object")
    try:
        commit_id = str(raw["id"])
        timestamp = parse_instant(str(raw["ts"]))
    except KeyError as exc:
        raise MalformedLogError(f"{where}: missing field {exc.args[0]!r}") from exc
    except ValueError as exc:
        raise MalformedLogError(f"{where}: bad timestamp ({exc})") from exc
    changes = tuple(
        _parse_change(c, where) for c in raw.get("changes", []) if isinstance(c, dict)
    )
    return CommitRecord(
        id=commit_id,
        author_name=str(raw.get("author_name", "")),
        author_email=str(raw.get("author_email", "")),
        timestamp=timestamp,
        is_merge=bool(raw.get("merge", False)),
        changes=changes,
    )


def ingest_log_file(path: Path, repo_id: str | None = None) -> RepositoryHistory:
    """Read a normalized JSON-lines commit log into a history."""
    commits = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            commits.append(parse_log_line(line, lineno))
    if not commits:
        raise EmptyHistoryError(f"{path}: log contains no commits")
    commits.sort(key=lambda c: (c.timestamp, c.id))
    return RepositoryHistory(repo_id=repo_id or path.stem, commits=tuple(commits))


def ingest_repository(source: str | Path, repo_id: str | None = None) -> RepositoryHistory:
    """Build a history from either a normalized log file or a local git repository.

    Args:
        source: path to a JSON-lines log file, or to a git working directory.
        repo_id: identifier for reports; defaults to the source's base name.

    Raises:
        MalformedLogError: a log line failed to parse (message names the line).
        EmptyHistoryError: the source has no commits.
    """
    src = Path(source)
    if src.is_dir():
        from .gitlog import read_git_repository

        commits = read_git_repository(src)
        if not commits:
            raise EmptyHistoryError(f"{src}: repository has no commits")
        commits.sort(key=lambda c: (c.timestamp, c.id))
        return RepositoryHistory(repo_id=repo_id or src.name, commits=tuple(commits))
    if src.is_file():
        return ingest_log_file(src, repo_id)
    raise HistoryError(f"{src}: not a log file or repository directory")


# ---------------------------------------------------------------------------
# replay

# Sentinel for lineages first seen through a modify/rename; nobody earns
# first-authorship credit there.
_UNKNOWN_CREATOR = None


class Lineage:
    """One file identity threaded through renames.

    Counts per-developer change events so authorship factors can be read off
    directly: ``creator`` made the Add (None when the file entered the replay
    implicitly), ``edits`` holds Modify/Rename counts per developer.
    """

    __slots__ = ("creator", "created_at", "edits")

    def __init__(self, creator: str | None, created_at: datetime):
        self.creator = creator
        self.created_at = created_at
        self.edits: dict[str, int] = {}

    def record_edit(self, dev: str) -> None:
        self.edits[dev] = self.edits.get(dev, 0) + 1

    def total_events(self) -> int:
        return (1 if self.creator is not None else 0) + sum(self.edits.values())

    def events_by(self, dev: str) -> int:
        own = self.edits.get(dev, 0)
        if self.creator == dev:
            own += 1
        return own

    def developers(self) -> set[str]:
        devs = set(self.edits)
        if self.creator is not None:
            devs.add(self.creator)
        return devs


def replay_lineages(history: RepositoryHistory, as_of: datetime) -> dict[str, Lineage]:
    """Replay changes with timestamp <= as_of; returns live path -> lineage.

    Renames carry the lineage to the new path; deletions drop it (a re-added
    path starts a fresh lineage). Changes touching paths never seen before are
    tolerated: they create a lineage with no credited creator.
    """
    live: dict[str, Lineage] = {}
    for commit in history.commits:
        if commit.timestamp > as_of:
            break
        dev = commit.author_key()
        for change in commit.changes:
            if change.kind is ChangeKind.ADD:
                if change.path in live:
                    live[change.path].record_edit(dev)
                else:
                    live[change.path] = Lineage(dev, commit.timestamp)
            elif change.kind is ChangeKind.MODIFY:
                lineage = live.get(change.path)
                if lineage is None:
                    lineage = Lineage(_UNKNOWN_CREATOR, commit.timestamp)
                    live[change.path] = lineage
                lineage.record_edit(dev)
            elif change.kind is ChangeKind.DELETE:
                live.pop(change.path, None)
            else:  # rename
                lineage = live.pop(change.old_path, None)
                if lineage is None:
                    lineage = Lineage(_UNKNOWN_CREATOR, commit.timestamp)
                lineage.record_edit(dev)
                live[change.path] = lineage
    return live


def snapshot_files(history: RepositoryHistory, as_of: datetime) -> FileSnapshot:
    """The set of files alive at as_of.

    Raises:
        ValueError: as_of precedes the first commit.
    """
    if as_of < history.created_at:
        raise ValueError(
            f"{history.repo_id}: snapshot at {as_of.isoformat()} precedes repository creation"
        )
    return FileSnapshot(as_of=as_of, live_files=frozenset(replay_lineages(history, as_of)))


# ---------------------------------------------------------------------------
# dataset filters


def filter_corrupted_migration(
    history: RepositoryHistory,
    commit_window: int = MIGRATION_COMMIT_WINDOW,
    fraction: float = MIGRATION_FRACTION,
) -> bool:
    """True when the history looks like a bulk import (exclude it).

    Fires if any prefix of fewer than ``commit_window`` commits adds strictly
    more than ``fraction`` of all files ever added. Histories shorter than the
    window always fire: the whole project fits in the prefix.
    """
    adds_per_commit = [
        sum(1 for ch in commit.changes if ch.kind is ChangeKind.ADD)
        for commit in history.commits
    ]
    total_adds = sum(adds_per_commit)
    if total_adds == 0:
        return False
    cumulative = 0
    for adds in adds_per_commit[: commit_window - 1]:
        cumulative += adds
        if cumulative > fraction * total_adds:
            return True
    return False


def filter_longevity(history: RepositoryHistory, minimum: timedelta = LONGEVITY_MINIMUM) -> bool:
    """True when the commit span is shorter than ``minimum`` (exclude it)."""
    return history.span() < minimum


# ---------------------------------------------------------------------------
# source-file selection


@dataclass(frozen=True)
class RuleSet:
    """Ordered include/exclude globs applied to snapshot paths.

    With no include patterns everything is included; excludes always win.
    Globs are matched against the full path, ``*`` crosses directory
    separators (so ``*.rb`` matches ``src/app.rb``).
    """

    includes: tuple[str, ...] = ()
    excludes: tuple[str, ...] = ()

    def admits(self, path: str) -> bool:
        if self.includes and not any(fnmatchcase(path, p) for p in self.includes):
            return False
        return not any(fnmatchcase(path, p) for p in self.excludes)


EMPTY_RULES = RuleSet()


def parse_rules(lines: list[str], where: str = "rules") -> RuleSet:
    includes: list[str] = []
    excludes: list[str] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("include:"):
            includes.append(line[len("include:"):].strip())
        elif line.startswith("exclude:"):
            excludes.append(line[len("exclude:"):].strip())
        else:
            raise ValueError(f"{where} line {lineno}: expected include:<glob> or exclude:<glob>")
    return RuleSet(includes=tuple(includes), excludes=tuple(excludes))


def load_rules(path: str | Path) -> RuleSet:
    with open(path, encoding="utf-8") as handle:
        return parse_rules(handle.readlines(), where=str(path))


def select_source_files(snapshot: FileSnapshot, rules: RuleSet = EMPTY_RULES) -> FileSnapshot:
    """Restrict a snapshot to the paths the rule set admits."""
    if rules == EMPTY_RULES:
        return snapshot
    return FileSnapshot(
        as_of=snapshot.as_of,
        live_files=frozenset(p for p in snapshot.live_files if rules.admits(p)),
    )
