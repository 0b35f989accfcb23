"""Alias resolution: collapse raw commit identities into canonical developers.

Precedence per identity: explicit mapping file, then remote account lookup,
then the identity untouched. Identities are keyed by lower-cased e-mail; the
mapping file and the remote service may both merge several e-mails into one
developer. Lookup failures degrade to untouched identities with a warning,
they never abort an analysis run.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import os
import threading
import time
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .history import RepositoryHistory

logger = logging.getLogger(__name__)

API_URL_ENV = "TF_API_URL"
API_TOKEN_ENV = "TF_API_TOKEN"


class MappingError(ValueError):
    """The identity mapping file is unreadable or self-contradictory."""


@dataclass(frozen=True)
class RawIdentity:
    name: str
    email: str

    @property
    def key(self) -> str:
        return self.email.lower()


@dataclass(frozen=True)
class CanonicalDeveloper:
    dev_id: str
    aliases: tuple[RawIdentity, ...]  # never empty

    def emails(self) -> frozenset[str]:
        return frozenset(alias.key for alias in self.aliases)


@dataclass(frozen=True)
class AliasReport:
    repo_id: str
    raw_identities: int
    canonical_developers: tuple[CanonicalDeveloper, ...]

    @property
    def alias_percentage(self) -> float:
        """Share of raw identities that merged away: 1 - canonical/raw."""
        return 1.0 - len(self.canonical_developers) / self.raw_identities


def load_mapping(path: str | Path) -> dict[str, str]:
    """Read a mapping file ``{"<dev_id>": ["email", ...]}`` to email -> dev_id.

    Raises:
        MappingError: unparsable file, or one e-mail claimed by two developers.
    """
    try:
        with open(path, encoding="utf-8") as handle:
            raw = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise MappingError(f"cannot read mapping file {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise MappingError(f"mapping file {path}: expected an object of dev_id -> [emails]")
    mapping: dict[str, str] = {}
    for dev_id, emails in raw.items():
        if not isinstance(emails, list):
            raise MappingError(f"mapping file {path}: entry {dev_id!r} is not a list")
        for email in emails:
            key = str(email).lower()
            claimed = mapping.get(key)
            if claimed is not None and claimed != dev_id:
                raise MappingError(
                    f"mapping file {path}: {email!r} claimed by both {claimed!r} and {dev_id!r}"
                )
            mapping[key] = str(dev_id)
    return mapping


# transport(url, headers) -> (http status, response body); 0 = network failure
Transport = Callable[[str, dict[str, str]], tuple[int, str]]


def _urllib_transport(url: str, headers: dict[str, str]) -> tuple[int, str]:
    request = urllib.request.Request(url, headers=headers)
    try:
        with urllib.request.urlopen(request, timeout=30) as response:
            return response.status, response.read().decode("utf-8", "replace")
    except urllib.error.HTTPError as exc:
        return exc.code, exc.read().decode("utf-8", "replace")
    except (urllib.error.URLError, OSError) as exc:
        return 0, str(exc)


class LookupClient:
    """Commit -> hosting-account lookup with an on-disk cache.

    The cache is a JSON-lines file of ``{"repo", "commit", "account"}``
    records; negative answers are cached too, so a finished corpus run never
    re-asks the service. Rate-limit responses (HTTP 429) are retried with
    bounded exponential backoff, any other failure logs a warning and counts
    as "no account".
    """

    def __init__(
        self,
        api_url: str | None = None,
        token: str | None = None,
        cache_path: str | Path | None = None,
        transport: Transport = _urllib_transport,
        max_attempts: int = 3,
        backoff_base: float = 1.0,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.api_url = api_url if api_url is not None else os.environ.get(API_URL_ENV)
        self.token = token if token is not None else os.environ.get(API_TOKEN_ENV)
        self.cache_path = Path(cache_path) if cache_path else None
        self.transport = transport
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self.sleep = sleep
        self._cache: dict[tuple[str, str], str | None] = {}
        self._lock = threading.Lock()  # one client is shared across pool workers
        if self.cache_path is not None and self.cache_path.exists():
            self._load_cache()

    def _load_cache(self) -> None:
        with open(self.cache_path, encoding="utf-8") as handle:
            for line in handle:
                if not line.strip():
                    continue
                entry = json.loads(line)
                self._cache[(entry["repo"], entry["commit"])] = entry.get("account")

    def _store(self, repo: str, commit: str, account: str | None) -> None:
        with self._lock:
            self._cache[(repo, commit)] = account
            if self.cache_path is None:
                return
            self.cache_path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.cache_path, "a", encoding="utf-8") as handle:
                handle.write(
                    json.dumps({"repo": repo, "commit": commit, "account": account}) + "\n"
                )

    def lookup(self, repo_locator: str, commit_id: str) -> str | None:
        """Account that authored the commit, or None when unknown."""
        with self._lock:
            if (repo_locator, commit_id) in self._cache:
                return self._cache[(repo_locator, commit_id)]
        account = self._fetch(repo_locator, commit_id)
        self._store(repo_locator, commit_id, account)
        return account

    def _fetch(self, repo_locator: str, commit_id: str) -> str | None:
        if not self.api_url:
            logger.warning("no lookup endpoint configured (%s unset)", API_URL_ENV)
            return None
        query = urllib.parse.urlencode({"repo": repo_locator, "commit": commit_id})
        url = f"{self.api_url.rstrip('/')}/commit-account?{query}"
        headers = {"Accept": "application/json"}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        for attempt in range(self.max_attempts):
            status, body = self.transport(url, headers)
            if status == 429:
                delay = self.backoff_base * (2**attempt)
                logger.warning("rate limited looking up %s@%s, retrying in %.1fs",
                               repo_locator, commit_id, delay)
                self.sleep(delay)
                continue
            if status != 200:
                logger.warning("lookup failed for %s@%s: status %s", repo_locator, commit_id, status)
                return None
            try:
                payload = json.loads(body)
            except json.JSONDecodeError:
                logger.warning("lookup returned non-JSON for %s@%s", repo_locator, commit_id)
                return None
            account = payload.get("account")
            return str(account) if account else None
        logger.warning("lookup for %s@%s still rate limited after %d attempts",
                       repo_locator, commit_id, self.max_attempts)
        return None


def resolve_aliases(
    history: RepositoryHistory,
    mapping: dict[str, str] | None = None,
    client: LookupClient | None = None,
    repo_locator: str | None = None,
) -> tuple[RepositoryHistory, AliasReport]:
    """Annotate every commit with a canonical dev_id.

    Identities already covered by the mapping file are never sent to the
    remote service; the service is asked once per distinct identity, at that
    identity's earliest commit. Unresolved identities keep their lower-cased
    e-mail as dev_id, so resolving an already-resolved history is a no-op.

    Returns:
        The canonicalized history and the alias statistics for it.
    """
    mapping = mapping or {}
    locator = repo_locator or history.repo_id
    first_seen: dict[str, tuple[str, RawIdentity]] = {}  # email -> (commit id, identity)
    for commit in history.commits:
        identity = RawIdentity(name=commit.author_name, email=commit.author_email)
        if identity.key not in first_seen:
            first_seen[identity.key] = (commit.id, identity)
    assignments: dict[str, str] = {}
    for email, (commit_id, _identity) in first_seen.items():
        mapped = mapping.get(email)
        if mapped is not None:
            assignments[email] = mapped
            continue
        if client is not None:
            account = client.lookup(locator, commit_id)
            if account:
                assignments[email] = account
                continue
        assignments[email] = email
    by_dev: dict[str, list[RawIdentity]] = {}
    for email, (_commit_id, identity) in sorted(first_seen.items()):
        by_dev.setdefault(assignments[email], []).append(identity)
    developers = tuple(
        CanonicalDeveloper(dev_id=dev_id, aliases=tuple(aliases))
        for dev_id, aliases in sorted(by_dev.items())
    )
    commits = tuple(
        dataclasses.replace(commit, dev_id=assignments[commit.author_email.lower()])
        for commit in history.commits
    )
    report = AliasReport(
        repo_id=history.repo_id,
        raw_identities=len(first_seen),
        canonical_developers=developers,
    )
    return RepositoryHistory(repo_id=history.repo_id, commits=commits), report
