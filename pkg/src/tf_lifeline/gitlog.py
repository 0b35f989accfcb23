"""Convert a local git repository's log into normalized commit records.

Shells out to ``git log`` with machine-readable separators. Merge commits are
diffed against their first parent, so they only contribute the files they
actually land on the main line.
"""

from __future__ import annotations

import logging
import subprocess
from pathlib import Path

from .history import ChangeKind, CommitRecord, FileChange, HistoryError
from .timeutil import parse_instant

logger = logging.getLogger(__name__)

_RECORD_SEP = "\x1e"
_FIELD_SEP = "\x1f"

_LOG_FORMAT = _RECORD_SEP + _FIELD_SEP.join(["%H", "%an", "%ae", "%aI", "%P"])


def _git_log_output(repo: Path) -> str:
    cmd = [
        "git",
        "-C",
        str(repo),
        "-c",
        "core.quotepath=off",
        "log",
        "--reverse",
        "--diff-merges=first-parent",
        "--find-renames",
        "--name-status",
        f"--format={_LOG_FORMAT}",
    ]
    result = subprocess.run(cmd, capture_output=True, text=True)
    if result.returncode != 0:
        raise HistoryError(f"git log failed for {repo}: {result.stderr.strip()}")
    return result.stdout


def _parse_status_line(line: str) -> FileChange | None:
    parts = line.split("\t")
    status = parts[0]
    code = status[0]
    if code in ("R", "C") and len(parts) >= 3:
        if code == "C":
            # copies introduce a fresh file at the destination
            return FileChange(kind=ChangeKind.ADD, path=parts[2])
        return FileChange(kind=ChangeKind.RENAME, path=parts[2], old_path=parts[1])
    if len(parts) < 2:
        return None
    path = parts[1]
    if code == "A":
        return FileChange(kind=ChangeKind.ADD, path=path)
    if code == "D":
        return FileChange(kind=ChangeKind.DELETE, path=path)
    if code in ("M", "T"):
        # type changes (symlink <-> file) are ordinary edits here
        return FileChange(kind=ChangeKind.MODIFY, path=path)
    logger.debug("ignoring git status %r for %s", status, path)
    return None


def read_git_repository(repo: Path) -> list[CommitRecord]:
    """Read every commit reachable from HEAD, oldest first."""
    commits: list[CommitRecord] = []
    for chunk in _git_log_output(repo).split(_RECORD_SEP):
        if not chunk.strip():
            continue
        lines = chunk.strip("\n").split("\n")
        fields = lines[0].split(_FIELD_SEP)
        if len(fields) != 5:
            raise HistoryError(f"unexpected git log header: {lines[0]!r}")
        commit_id, author_name, author_email, timestamp, parents = fields
        changes = []
        for line in lines[1:]:
            if not line.strip():
                continue
            change = _parse_status_line(line)
            if change is not None:
                changes.append(change)
        commits.append(
            CommitRecord(
                id=commit_id,
                author_name=author_name,
                author_email=author_email,
                timestamp=parse_instant(timestamp),
                is_merge=len(parents.split()) > 1,
                changes=tuple(changes),
            )
        )
    return commits
