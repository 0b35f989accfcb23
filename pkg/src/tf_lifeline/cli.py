"""Command-line entry points.

``tf-lifeline analyze`` runs the batch pipeline over a project list and
writes deterministic report files. ``tf-lifeline sensitivity`` sweeps the
abandonment-threshold grid. ``tf-lifeline tf`` answers the single-shot
question: who is the truck factor of this repository right now (or at a given
date).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from .authorship import build_authorship_table
from .config import DEFAULT_CONFIG, AnalysisConfig, load_config, with_overrides
from .history import EMPTY_RULES, ingest_repository, load_rules
from .identity import resolve_aliases
from .report import (
    emit_report,
    emit_sensitivity,
    load_project_list,
    render_sensitivity,
    run_corpus,
    run_sensitivity,
)
from .timeutil import format_instant, parse_duration, parse_instant
from .truckfactor import TFUndefinedError, compute_tf

logger = logging.getLogger(__name__)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="TOML config file")
    parser.add_argument("--offline", action="store_true", help="never call the lookup service")
    parser.add_argument(
        "--abandon-threshold",
        metavar="DURATION",
        help="silence that counts as gone, e.g. 1y, 6m, 548d",
    )
    parser.add_argument("--jobs", type=int, default=None, help="worker pool size")


def _load_config(args: argparse.Namespace) -> AnalysisConfig:
    config = load_config(args.config) if args.config else DEFAULT_CONFIG
    threshold = parse_duration(args.abandon_threshold) if args.abandon_threshold else None
    return with_overrides(config, offline=args.offline or None, abandon_threshold=threshold)


def _cmd_analyze(args: argparse.Namespace) -> int:
    config = _load_config(args)
    projects = load_project_list(args.projects)
    report = run_corpus(projects, config, jobs=args.jobs)
    written = emit_report(report, args.out)
    for path in written:
        print(path)
    failed = report.failed
    for result in failed:
        print(f"FAILED {result.repo_id}: {result.error}", file=sys.stderr)
    return 1 if failed else 0


def _cmd_sensitivity(args: argparse.Namespace) -> int:
    config = _load_config(args)
    if args.grid:
        grid = tuple(parse_duration(part) for part in args.grid.split(","))
        config = dataclasses.replace(config, grid=grid)
    projects = load_project_list(args.projects)
    report = run_sensitivity(projects, config, jobs=args.jobs)
    print(render_sensitivity(report))
    if args.out:
        print(emit_sensitivity(report, args.out))
    return 0


def _cmd_tf(args: argparse.Namespace) -> int:
    config = _load_config(args)
    history = ingest_repository(args.repo)
    as_of = parse_instant(args.as_of) if args.as_of else history.head_at
    rules = load_rules(config.rules_path) if config.rules_path else EMPTY_RULES
    resolved, _report = resolve_aliases(history)
    table = build_authorship_table(resolved, as_of, rules, config.doa)
    try:
        snapshot = compute_tf(table)
    except TFUndefinedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(
        json.dumps(
            {
                "repo_id": history.repo_id,
                "as_of": format_instant(as_of),
                "tf": snapshot.tf,
                "developers": sorted(snapshot.tf_developers),
                "coverage_at_stop": round(snapshot.coverage_at_stop, 6),
                "removal_order": list(snapshot.removal_order),
            },
            indent=2,
            sort_keys=True,
        )
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tf-lifeline")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="batch-analyze a corpus of repositories")
    analyze.add_argument("--projects", type=Path, required=True, help="file listing one source per line")
    analyze.add_argument("--out", type=Path, required=True, help="report output directory")
    _add_common(analyze)
    analyze.set_defaults(func=_cmd_analyze)

    sensitivity = sub.add_parser("sensitivity", help="abandonment-threshold sweep")
    sensitivity.add_argument("--projects", type=Path, required=True)
    sensitivity.add_argument("--grid", help="comma-separated thresholds, e.g. 3m,6m,1y,1.5y,2y")
    sensitivity.add_argument("--out", type=Path, help="also write sensitivity.csv here")
    _add_common(sensitivity)
    sensitivity.set_defaults(func=_cmd_sensitivity)

    tf = sub.add_parser("tf", help="truck factor of one repository")
    tf.add_argument("--repo", type=Path, required=True, help="git directory or normalized log file")
    tf.add_argument("--as-of", help="ISO date; defaults to the last commit")
    _add_common(tf)
    tf.set_defaults(func=_cmd_tf)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except Exception as exc:
        logger.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
