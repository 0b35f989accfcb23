from __future__ import annotations

from datetime import datetime, timezone

import pytest

from tf_lifeline.history import ChangeKind, CommitRecord, FileChange, RepositoryHistory


def ts(when: str | datetime) -> datetime:
    """Short ISO date/datetime to aware UTC; datetimes pass through."""
    if isinstance(when, datetime):
        return when
    if "T" not in when:
        when += "T00:00:00"
    return datetime.fromisoformat(when).replace(tzinfo=timezone.utc)


def change(*spec):
    """("A", path) / ("M", path) / ("D", path) / ("R", old, new)."""
    kind = ChangeKind(spec[0])
    if kind is ChangeKind.RENAME:
        return FileChange(kind=kind, path=spec[2], old_path=spec[1])
    return FileChange(kind=kind, path=spec[1])


_COUNTER = [0]


def commit(
    dev: str,
    when: str | datetime,
    *changes,
    merge: bool = False,
    cid: str | None = None,
) -> CommitRecord:
    """Commit authored by `dev` with dev_id pre-resolved to `dev`."""
    _COUNTER[0] += 1
    return CommitRecord(
        id=cid or f"c{_COUNTER[0]:05d}",
        author_name=dev.title(),
        author_email=f"{dev}@example.com",
        timestamp=ts(when),
        is_merge=merge,
        changes=tuple(c if isinstance(c, FileChange) else change(*c) for c in changes),
        dev_id=dev,
    )


def history(*commits: CommitRecord, repo_id: str = "repo") -> RepositoryHistory:
    ordered = sorted(commits, key=lambda c: (c.timestamp, c.id))
    return RepositoryHistory(repo_id=repo_id, commits=tuple(ordered))


@pytest.fixture
def simple_history() -> RepositoryHistory:
    """One dev creates two files, a second dev edits one of them."""
    return history(
        commit("alice", "2020-01-01", ("A", "a.rb"), ("A", "b.rb")),
        commit("alice", "2020-02-01", ("M", "a.rb")),
        commit("bob", "2020-03-01", ("M", "a.rb")),
    )
