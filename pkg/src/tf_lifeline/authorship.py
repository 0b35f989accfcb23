"""Degree-of-authorship scoring and main-author selection per file.

A developer's standing on a file combines three counts: whether they created
it, how many changes they landed on it, and how many changes everyone else
landed on it. The weighted recency-free formula turns those counts into a
score; per-file gates turn scores into the set of main authors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime

from .history import (
    EMPTY_RULES,
    Lineage,
    RepositoryHistory,
    RuleSet,
    replay_lineages,
)


@dataclass(frozen=True)
class AuthorshipFactors:
    first_authorship: int  # 1 when the developer created the file
    deliveries: int  # changes by the developer after creation
    acceptances: int  # changes by everyone else


@dataclass(frozen=True)
class DoaModel:
    """Coefficients and gates for authorship scoring.

    ``base`` doubles as the absolute main-author gate by default: a developer
    whose score never clears the intercept has no meaningful authorship.
    """

    base: float = 3.293
    fa_weight: float = 1.098
    dl_weight: float = 0.164
    ac_weight: float = 0.321
    norm_threshold: float = 0.75
    abs_threshold: float = 3.293
    require_abs_gate: bool = True


DEFAULT_DOA_MODEL = DoaModel()


def compute_doa(factors: AuthorshipFactors, model: DoaModel = DEFAULT_DOA_MODEL) -> float:
    """Score = base + fa*FA + dl*DL - ac*ln(1 + AC)."""
    return (
        model.base
        + model.fa_weight * factors.first_authorship
        + model.dl_weight * factors.deliveries
        - model.ac_weight * math.log(1 + factors.acceptances)
    )


def _lineage_factors(lineage: Lineage, dev: str) -> AuthorshipFactors:
    total = lineage.total_events()
    deliveries = lineage.edits.get(dev, 0)
    first = 1 if lineage.creator == dev else 0
    return AuthorshipFactors(
        first_authorship=first,
        deliveries=deliveries,
        acceptances=total - deliveries - first,
    )


def compute_factors(
    history: RepositoryHistory, dev: str, path: str, as_of: datetime
) -> AuthorshipFactors:
    """Authorship factors of one developer on one live file at a point in time.

    Changes made under previous names of the file (renames) count toward it.

    Raises:
        ValueError: the path is not alive at as_of.
    """
    live = replay_lineages(history, as_of)
    lineage = live.get(path)
    if lineage is None:
        raise ValueError(f"{history.repo_id}: {path!r} is not a live file at {as_of.isoformat()}")
    return _lineage_factors(lineage, dev)


def main_authors_of(doa_by_dev: dict[str, float], model: DoaModel = DEFAULT_DOA_MODEL) -> frozenset[str]:
    """Developers whose score clears both per-file gates.

    A developer qualifies with score >= norm_threshold of the file's best
    score and, when the absolute gate is on, score >= abs_threshold. The
    result is empty exactly when nobody clears the absolute gate; such files
    are treated as having no main author at all.
    """
    if not doa_by_dev:
        return frozenset()
    best = max(doa_by_dev.values())
    if model.require_abs_gate and best < model.abs_threshold:
        return frozenset()
    if best <= 0:
        # ratio gate is meaningless on non-positive scores; only reachable
        # with the absolute gate disabled
        return frozenset(d for d, v in doa_by_dev.items() if v == best)
    qualified = set()
    for dev, value in doa_by_dev.items():
        if value < model.norm_threshold * best:
            continue
        if model.require_abs_gate and value < model.abs_threshold:
            continue
        qualified.add(dev)
    return frozenset(qualified)


@dataclass(frozen=True)
class AuthorshipTable:
    """Per-file scores and main authors for one snapshot of a repository.

    ``files`` is every live file admitted by the rule set; ``main_authors``
    holds only files with a non-empty main-author set, and that subset is the
    coverage denominator downstream.
    """

    as_of: datetime
    files: frozenset[str]
    doa: dict[tuple[str, str], float]  # (dev, path) -> score
    main_authors: dict[str, frozenset[str]]

    def developers(self) -> frozenset[str]:
        return frozenset(dev for dev, _path in self.doa)

    def doa_sum(self, dev: str) -> float:
        return sum(v for (d, _p), v in self.doa.items() if d == dev)

    def files_main_authored(self, dev: str) -> int:
        return sum(1 for authors in self.main_authors.values() if dev in authors)


def build_authorship_table(
    history: RepositoryHistory,
    as_of: datetime,
    rules: RuleSet = EMPTY_RULES,
    model: DoaModel = DEFAULT_DOA_MODEL,
) -> AuthorshipTable:
    """Score every (developer, live file) pair at as_of.

    Only changes with timestamp <= as_of are replayed, so the table built from
    a truncated history equals the table built from the full one.
    """
    live = replay_lineages(history, as_of)
    doa: dict[tuple[str, str], float] = {}
    main_authors: dict[str, frozenset[str]] = {}
    files = set()
    for path, lineage in live.items():
        if not rules.admits(path):
            continue
        files.add(path)
        scores = {
            dev: compute_doa(_lineage_factors(lineage, dev), model)
            for dev in lineage.developers()
        }
        for dev, value in scores.items():
            doa[(dev, path)] = value
        authors = main_authors_of(scores, model)
        if authors:
            main_authors[path] = authors
    return AuthorshipTable(
        as_of=as_of, files=frozenset(files), doa=doa, main_authors=main_authors
    )
