"""Batch pipeline over a corpus of repositories, plus deterministic reports.

Every project flows ingest -> dataset filters -> alias resolution -> lifecycle;
a broken project is recorded and skipped, never fatal for the corpus. Report
files are byte-stable across runs: sorted keys, sorted rows, fixed float
precision, no wall-clock stamps.
"""

from __future__ import annotations

import csv
import json
import logging
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

from .authorship import build_authorship_table
from .config import AnalysisConfig
from .history import (
    EMPTY_RULES,
    RuleSet,
    filter_corrupted_migration,
    filter_longevity,
    ingest_repository,
    load_rules,
)
from .identity import LookupClient, load_mapping, resolve_aliases
from .lifecycle import (
    LifecycleTimeline,
    PostTFDDMetrics,
    attraction_delay_years,
    build_timeline,
)
from .sensitivity import (
    SensitivityReport,
    build_report as build_sensitivity_report,
    profile_developers,
    table_round,
)
from .stats import EffectSize, Sided, TestResult, benjamini_hochberg, cliffs_delta, mann_whitney
from .timeutil import YEAR, format_instant

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1"

STATUS_ANALYZED = "analyzed"
STATUS_EXCLUDED = "excluded"
STATUS_FAILED = "failed"

FILTER_MIGRATION = "corrupted-migration"
FILTER_LONGEVITY = "longevity"


@dataclass
class ProjectResult:
    repo_id: str
    status: str
    excluded_by: str | None = None
    error: str | None = None
    alias_percentage: float | None = None
    timeline: LifecycleTimeline | None = None
    metrics: PostTFDDMetrics | None = None
    span_years: float | None = None
    created_at: datetime | None = None
    devs_at_event: int | None = None
    commits_at_event: int | None = None
    files_at_event: int | None = None
    age_years_at_event: float | None = None


@dataclass
class CorpusReport:
    schema_version: str
    projects: list[ProjectResult]
    aggregates: dict

    @property
    def failed(self) -> list[ProjectResult]:
        return [p for p in self.projects if p.status == STATUS_FAILED]


def load_project_list(path: str | Path) -> list[tuple[str, Path]]:
    """One source per line, relative to the list file; '#' starts a comment."""
    base = Path(path).parent
    entries: list[tuple[str, Path]] = []
    seen: dict[str, int] = {}
    raw_lines = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            text = line.split("#", 1)[0].strip()
            if text:
                raw_lines.append(text)
    for text in raw_lines:
        source = (base / text).resolve()
        repo_id = source.stem if source.suffix else source.name
        seen[repo_id] = seen.get(repo_id, 0) + 1
        entries.append((repo_id, source))
    # duplicate stems fall back to the path as written
    counted = {rid for rid, n in seen.items() if n > 1}
    return [
        (text if rid in counted else rid, src)
        for (rid, src), text in zip(entries, raw_lines)
    ]


def run_project(
    repo_id: str,
    source: Path,
    config: AnalysisConfig,
    rules: RuleSet,
    mapping: dict[str, str] | None,
    client: LookupClient | None,
) -> ProjectResult:
    """The full pipeline for one repository; failures become a result row."""
    try:
        history = ingest_repository(source, repo_id)
        if filter_corrupted_migration(
            history, config.migration_commit_window, config.migration_fraction
        ):
            return ProjectResult(repo_id, STATUS_EXCLUDED, excluded_by=FILTER_MIGRATION)
        if filter_longevity(history, config.longevity_minimum):
            return ProjectResult(repo_id, STATUS_EXCLUDED, excluded_by=FILTER_LONGEVITY)
        resolved, alias_report = resolve_aliases(history, mapping, client)
        timeline, metrics = build_timeline(
            resolved,
            rules=rules,
            model=config.doa,
            policy=config.abandon,
            cadence_days=config.cadence_days,
        )
        result = ProjectResult(
            repo_id,
            STATUS_ANALYZED,
            alias_percentage=alias_report.alias_percentage,
            timeline=timeline,
            metrics=metrics,
            span_years=history.span() / YEAR,
            created_at=history.created_at,
        )
        if timeline.events:
            last = timeline.events[-1]
            at = last.detected_at
            result.commits_at_event = sum(
                1 for c in resolved.commits if c.timestamp <= at
            )
            result.devs_at_event = len(
                {c.author_key() for c in resolved.commits if c.timestamp <= at}
            )
            table = build_authorship_table(resolved, at, rules, config.doa)
            result.files_at_event = len(table.files)
            result.age_years_at_event = (at - history.created_at) / YEAR
        return result
    except Exception as exc:  # a bad project must not sink the corpus
        logger.warning("project %s failed: %s", repo_id, exc)
        return ProjectResult(repo_id, STATUS_FAILED, error=f"{type(exc).__name__}: {exc}")


def _prepare_shared(config: AnalysisConfig):
    rules = load_rules(config.rules_path) if config.rules_path else EMPTY_RULES
    mapping = load_mapping(config.mapping_path) if config.mapping_path else None
    client = None
    if not config.offline:
        candidate = LookupClient(cache_path=config.cache_path)
        if candidate.api_url:
            client = candidate
    return rules, mapping, client


def run_corpus(
    projects: list[tuple[str, Path]],
    config: AnalysisConfig,
    jobs: int | None = None,
) -> CorpusReport:
    """Analyze every project and aggregate; rows come back sorted by repo_id."""
    rules, mapping, client = _prepare_shared(config)
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        results = list(
            pool.map(
                lambda item: run_project(item[0], item[1], config, rules, mapping, client),
                projects,
            )
        )
    results.sort(key=lambda r: r.repo_id)
    return CorpusReport(
        schema_version=SCHEMA_VERSION,
        projects=results,
        aggregates=build_aggregates(results),
    )


def run_sensitivity(
    projects: list[tuple[str, Path]],
    config: AnalysisConfig,
    jobs: int | None = None,
) -> SensitivityReport:
    """Gap profiles of every TF developer across the analyzed corpus."""
    rules, mapping, client = _prepare_shared(config)
    profiles = []

    def one(item: tuple[str, Path]):
        repo_id, source = item
        try:
            history = ingest_repository(source, repo_id)
            if filter_corrupted_migration(
                history, config.migration_commit_window, config.migration_fraction
            ):
                return []
            if filter_longevity(history, config.longevity_minimum):
                return []
            resolved, _ = resolve_aliases(history, mapping, client)
            timeline, _metrics = build_timeline(
                resolved,
                rules=rules,
                model=config.doa,
                policy=config.abandon,
                cadence_days=config.cadence_days,
            )
            tf_devs = frozenset(
                dev
                for point in timeline.snapshots
                if point.tf is not None
                for dev in point.tf.tf_developers
            )
            return profile_developers(resolved, tf_devs)
        except Exception as exc:
            logger.warning("sensitivity: project %s failed: %s", repo_id, exc)
            return []

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        for chunk in pool.map(one, projects):
            profiles.extend(chunk)
    profiles.sort(key=lambda p: (p.repo_id, p.dev_id))
    return build_sensitivity_report(profiles, config.grid)


# ---------------------------------------------------------------------------
# aggregates


def _histogram(values) -> dict[int, int]:
    out: dict[int, int] = {}
    for v in values:
        out[v] = out.get(v, 0) + 1
    return dict(sorted(out.items()))


def _last_tf(timeline: LifecycleTimeline) -> int | None:
    for point in reversed(timeline.snapshots):
        if point.tf is not None:
            return point.tf.tf
    return None


_COMPARISON_METRICS = (
    ("commits_after", Sided.GREATER),
    ("pct_commits_after", Sided.GREATER),
    ("devs_at_event", Sided.TWO_SIDED),
    ("commits_at_event", Sided.TWO_SIDED),
    ("files_at_event", Sided.TWO_SIDED),
    ("age_years_at_event", Sided.TWO_SIDED),
)


def _metric_value(result: ProjectResult, metric: str) -> float | None:
    if metric == "commits_after":
        return None if result.metrics is None else float(result.metrics.commits_after)
    if metric == "pct_commits_after":
        return None if result.metrics is None else result.metrics.pct_commits_after
    value = getattr(result, metric)
    return None if value is None else float(value)


def _cohort_comparisons(with_events: list[ProjectResult]) -> list[dict]:
    surviving = [r for r in with_events if r.timeline.survived]
    fading = [r for r in with_events if not r.timeline.survived]
    if not surviving or not fading:
        return []
    rows = []
    p_values = []
    for metric, sided in _COMPARISON_METRICS:
        a = [v for r in surviving if (v := _metric_value(r, metric)) is not None]
        b = [v for r in fading if (v := _metric_value(r, metric)) is not None]
        if not a or not b:
            continue
        test: TestResult = mann_whitney(a, b, sided)
        effect: EffectSize = cliffs_delta(a, b)
        rows.append(
            {
                "metric": metric,
                "n_surviving": len(a),
                "n_non_surviving": len(b),
                "sided": sided.value,
                "statistic": test.statistic,
                "p_value": test.p_value,
                "delta": effect.delta,
                "magnitude": effect.magnitude.value,
            }
        )
        p_values.append(test.p_value)
    for row, adjusted in zip(rows, benjamini_hochberg(p_values)):
        row["p_adjusted"] = adjusted
    return rows


def build_aggregates(results: list[ProjectResult]) -> dict:
    analyzed = [r for r in results if r.status == STATUS_ANALYZED]
    with_events = [r for r in analyzed if r.timeline.events]
    survived = [r for r in with_events if r.timeline.survived]
    aggregates: dict = {
        "projects_total": len(results),
        "projects_analyzed": len(analyzed),
        "projects_excluded": sum(1 for r in results if r.status == STATUS_EXCLUDED),
        "projects_failed": sum(1 for r in results if r.status == STATUS_FAILED),
        "tf_histogram": _histogram(
            tf for r in analyzed if (tf := _last_tf(r.timeline)) is not None
        ),
        "tfdd_projects": len(with_events),
        "tfdd_rate": (len(with_events) / len(analyzed)) if analyzed else None,
        "tfdd_by_tf": _histogram(r.timeline.events[0].tf_at_event for r in with_events),
        "repo_age_years": _histogram(int(r.span_years) for r in with_events),
        "tfdd_timing_years": _histogram(
            int((r.timeline.events[0].occurred_at - r.created_at) / YEAR) + 1
            for r in with_events
            if r.created_at is not None
        ),
        "survived_projects": len(survived),
        "survival_rate": (len(survived) / len(with_events)) if with_events else None,
        "attraction_delay_years": _histogram(
            attraction_delay_years(r.timeline.events[-1].occurred_at, r.timeline.attracted_at)
            for r in survived
            if r.timeline.attracted_at is not None
        ),
        "newcomer_shares": _newcomer_shares(survived),
        "median_new_tf_file_share": (
            statistics.median(r.metrics.new_tf_file_share for r in survived)
            if survived
            else None
        ),
        "cohort_comparisons": _cohort_comparisons(with_events),
    }
    return aggregates


def _newcomer_shares(survived: list[ProjectResult]) -> dict[str, int]:
    shares = {"all_newcomers": 0, "all_old_contributors": 0, "mixed": 0}
    for result in survived:
        kinds = set(result.timeline.newcomer_split.values())
        if not kinds:
            continue
        if len(kinds) == 2:
            shares["mixed"] += 1
        elif next(iter(kinds)).value == "newcomer":
            shares["all_newcomers"] += 1
        else:
            shares["all_old_contributors"] += 1
    return shares


# ---------------------------------------------------------------------------
# emission


def _r6(value: float) -> float:
    """Fixed report precision: 6 significant digits."""
    return float(f"{value:.6g}")


def _clean(value):
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        return _r6(value)
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _timeline_payload(timeline: LifecycleTimeline) -> dict:
    snapshots = []
    for point, state in zip(timeline.snapshots, timeline.states):
        entry: dict = {"as_of": format_instant(point.as_of), "state": state.value}
        if point.tf is None:
            entry["tf"] = None
        else:
            entry["tf"] = point.tf.tf
            entry["developers"] = sorted(point.tf.tf_developers)
            entry["coverage_at_stop"] = point.tf.coverage_at_stop
            entry["removal_order"] = list(point.tf.removal_order)
        snapshots.append(entry)
    events = [
        {
            "detected_at": format_instant(e.detected_at),
            "occurred_at": format_instant(e.occurred_at),
            "detached": sorted(e.detached),
            "tf_at_event": e.tf_at_event,
        }
        for e in timeline.events
    ]
    return {
        "snapshots": snapshots,
        "events": events,
        "survived": timeline.survived,
        "new_tf_developers": sorted(timeline.new_tf_developers),
        "newcomer_split": {d: k.value for d, k in sorted(timeline.newcomer_split.items())},
        "attracted_at": (
            None if timeline.attracted_at is None else format_instant(timeline.attracted_at)
        ),
    }


def project_payload(result: ProjectResult) -> dict:
    payload: dict = {
        "repo_id": result.repo_id,
        "status": result.status,
        "excluded_by": result.excluded_by,
        "error": result.error,
        "alias_percentage": result.alias_percentage,
        "span_years": result.span_years,
    }
    if result.timeline is not None:
        payload["timeline"] = _timeline_payload(result.timeline)
    if result.metrics is not None:
        payload["post_tfdd"] = {
            "commits_after": result.metrics.commits_after,
            "pct_commits_after": result.metrics.pct_commits_after,
            "new_tf_file_share": result.metrics.new_tf_file_share,
        }
    for key in ("devs_at_event", "commits_at_event", "files_at_event", "age_years_at_event"):
        value = getattr(result, key)
        if value is not None:
            payload[key] = value
    return payload


def report_payload(report: CorpusReport) -> dict:
    return _clean(
        {
            "schema_version": report.schema_version,
            "projects": [project_payload(r) for r in report.projects],
            "aggregates": report.aggregates,
        }
    )


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def _csv_cell(value) -> str | int | float:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6g}"
    return value


def emit_report(report: CorpusReport, out_dir: str | Path, formats: tuple[str, ...] = ("json", "csv")) -> list[Path]:
    """Write report files; repeated runs on equal inputs are byte-identical."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    if "json" in formats:
        path = out / "report.json"
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            json.dump(report_payload(report), handle, indent=2, sort_keys=True)
            handle.write("\n")
        written.append(path)
    if "csv" in formats:
        written.extend(_emit_csv_tables(report, out))
    return written


def _emit_csv_tables(report: CorpusReport, out: Path) -> list[Path]:
    aggregates = report.aggregates
    written = []

    def table(name: str, header: list[str], rows: list[list]) -> None:
        path = out / name
        _write_csv(path, header, [[_csv_cell(v) for v in row] for row in rows])
        written.append(path)

    table(
        "per_project.csv",
        [
            "repo_id", "status", "excluded_by", "error", "alias_percentage",
            "span_years", "snapshots", "last_tf", "events", "survived",
            "new_tf_developers", "commits_after", "pct_commits_after",
            "new_tf_file_share",
        ],
        [
            [
                r.repo_id,
                r.status,
                r.excluded_by,
                r.error,
                r.alias_percentage,
                r.span_years,
                len(r.timeline.snapshots) if r.timeline else None,
                _last_tf(r.timeline) if r.timeline else None,
                len(r.timeline.events) if r.timeline else None,
                r.timeline.survived if r.timeline else None,
                "|".join(sorted(r.timeline.new_tf_developers)) if r.timeline else None,
                r.metrics.commits_after if r.metrics else None,
                r.metrics.pct_commits_after if r.metrics else None,
                r.metrics.new_tf_file_share if r.metrics else None,
            ]
            for r in report.projects
        ],
    )
    for name, key in (
        ("tf_histogram.csv", "tf_histogram"),
        ("tfdd_by_tf.csv", "tfdd_by_tf"),
        ("repo_age_years.csv", "repo_age_years"),
        ("tfdd_timing_years.csv", "tfdd_timing_years"),
        ("attraction_delay_years.csv", "attraction_delay_years"),
    ):
        table(name, [_histogram_key(name), "count"], [[k, v] for k, v in aggregates[key].items()])
    table(
        "newcomer_shares.csv",
        ["composition", "count"],
        [[k, v] for k, v in sorted(aggregates["newcomer_shares"].items())],
    )
    table(
        "commits_after.csv",
        ["repo_id", "cohort", "commits_after", "pct_commits_after"],
        [
            [
                r.repo_id,
                "surviving" if r.timeline.survived else "non_surviving",
                r.metrics.commits_after,
                r.metrics.pct_commits_after,
            ]
            for r in report.projects
            if r.status == STATUS_ANALYZED and r.timeline.events and r.metrics is not None
        ],
    )
    table(
        "cohort_comparison.csv",
        [
            "metric", "n_surviving", "n_non_surviving", "sided", "statistic",
            "p_value", "p_adjusted", "delta", "magnitude",
        ],
        [
            [
                row["metric"], row["n_surviving"], row["n_non_surviving"], row["sided"],
                row["statistic"], row["p_value"], row.get("p_adjusted"), row["delta"],
                row["magnitude"],
            ]
            for row in aggregates["cohort_comparisons"]
        ],
    )
    return written


def _histogram_key(name: str) -> str:
    return {
        "tf_histogram.csv": "tf",
        "tfdd_by_tf.csv": "tf_at_event",
        "repo_age_years.csv": "age_years",
        "tfdd_timing_years.csv": "year",
        "attraction_delay_years.csv": "years_after_event",
    }[name]


def emit_sensitivity(report: SensitivityReport, out_dir: str | Path) -> Path:
    """The threshold table as CSV: raw values plus display rounding."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "sensitivity.csv"
    rows = []
    for row in report.rows:
        rows.append(
            [
                row.label,
                _csv_cell(row.precision),
                _csv_cell(row.improvement),
                _csv_cell(row.harmonic),
                _csv_cell(table_round(row.precision)),
                _csv_cell(None if row.improvement is None else table_round(row.improvement)),
                _csv_cell(None if row.harmonic is None else table_round(row.harmonic)),
            ]
        )
    _write_csv(
        path,
        [
            "threshold", "precision", "improvement", "harmonic",
            "precision_2dp", "improvement_2dp", "harmonic_2dp",
        ],
        rows,
    )
    return path


def render_sensitivity(report: SensitivityReport) -> str:
    """Plain-text table for the terminal."""
    lines = [f"profiles: {report.profile_count}"]
    lines.append(f"{'threshold':>10} {'precision':>10} {'improvement':>12} {'harmonic':>9}")
    for row in report.rows:
        improvement = "-" if row.improvement is None else f"{table_round(row.improvement):.2f}"
        mean = "-" if row.harmonic is None else f"{table_round(row.harmonic):.2f}"
        lines.append(
            f"{row.label:>10} {table_round(row.precision):>10.2f} {improvement:>12} {mean:>9}"
        )
    return "\n".join(lines)
