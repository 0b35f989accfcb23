"""Analysis configuration: one TOML file covering every tunable constant."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from datetime import timedelta
from pathlib import Path

try:
    import tomllib
except ImportError:  # Python 3.10
    import tomli as tomllib

from .authorship import DoaModel
from .history import LONGEVITY_MINIMUM, MIGRATION_COMMIT_WINDOW, MIGRATION_FRACTION
from .lifecycle import ANCHOR_HEAD, ANCHOR_SNAPSHOT, AbandonmentPolicy
from .sensitivity import DEFAULT_GRID
from .timeutil import parse_duration

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class AnalysisConfig:
    doa: DoaModel = DoaModel()
    abandon: AbandonmentPolicy = AbandonmentPolicy()
    cadence_days: float | None = None  # None = calendar years
    longevity_minimum: timedelta = LONGEVITY_MINIMUM
    migration_commit_window: int = MIGRATION_COMMIT_WINDOW
    migration_fraction: float = MIGRATION_FRACTION
    grid: tuple[timedelta, ...] = DEFAULT_GRID
    rules_path: Path | None = None
    mapping_path: Path | None = None
    cache_path: Path | None = None
    offline: bool = False


DEFAULT_CONFIG = AnalysisConfig()


def _duration(table: dict, key: str, default: timedelta, where: str) -> timedelta:
    raw = table.get(key)
    if raw is None:
        return default
    try:
        return parse_duration(str(raw))
    except ValueError as exc:
        raise ConfigError(f"{where}.{key}: {exc}") from exc


def _resolve(base: Path, table: dict, key: str) -> Path | None:
    raw = table.get(key)
    if raw is None:
        return None
    return (base / str(raw)).resolve()


def parse_config(raw: dict, base_dir: Path) -> AnalysisConfig:
    doa_raw = raw.get("doa", {})
    doa = DoaModel(
        base=float(doa_raw.get("base", 3.293)),
        fa_weight=float(doa_raw.get("fa", 1.098)),
        dl_weight=float(doa_raw.get("dl", 0.164)),
        ac_weight=float(doa_raw.get("ac", 0.321)),
        norm_threshold=float(doa_raw.get("norm_threshold", 0.75)),
        abs_threshold=float(doa_raw.get("abs_threshold", 3.293)),
        require_abs_gate=bool(doa_raw.get("require_abs_gate", True)),
    )
    abandon_raw = raw.get("abandon", {})
    anchor = str(abandon_raw.get("anchor", ANCHOR_HEAD))
    if anchor not in (ANCHOR_HEAD, ANCHOR_SNAPSHOT):
        raise ConfigError(f"abandon.anchor must be {ANCHOR_HEAD!r} or {ANCHOR_SNAPSHOT!r}")
    abandon = AbandonmentPolicy(
        threshold=_duration(abandon_raw, "threshold", AbandonmentPolicy().threshold, "abandon"),
        anchor=anchor,
    )
    snapshots_raw = raw.get("snapshots", {})
    cadence = snapshots_raw.get("cadence", "yearly")
    if cadence == "yearly":
        cadence_days: float | None = None
    else:
        cadence_days = parse_duration(str(cadence)) / timedelta(days=1)
    filters_raw = raw.get("filters", {})
    sensitivity_raw = raw.get("sensitivity", {})
    grid_raw = sensitivity_raw.get("grid")
    if grid_raw is None:
        grid = DEFAULT_GRID
    else:
        grid = tuple(parse_duration(str(item)) for item in grid_raw)
    paths_raw = raw.get("paths", {})
    return AnalysisConfig(
        doa=doa,
        abandon=abandon,
        cadence_days=cadence_days,
        longevity_minimum=_duration(filters_raw, "longevity_minimum", LONGEVITY_MINIMUM, "filters"),
        migration_commit_window=int(filters_raw.get("migration_commit_window", MIGRATION_COMMIT_WINDOW)),
        migration_fraction=float(filters_raw.get("migration_fraction", MIGRATION_FRACTION)),
        grid=grid,
        rules_path=_resolve(base_dir, paths_raw, "rules"),
        mapping_path=_resolve(base_dir, paths_raw, "mapping"),
        cache_path=_resolve(base_dir, paths_raw, "cache"),
        offline=bool(raw.get("offline", False)),
    )


def load_config(path: str | Path) -> AnalysisConfig:
    """Parse a TOML config; missing keys fall back to the model defaults.

    Relative paths in the ``[paths]`` section resolve against the config
    file's own directory.

    Raises:
        ConfigError: unreadable file or an out-of-range value.
    """
    src = Path(path)
    try:
        with open(src, "rb") as handle:
            raw = tomllib.load(handle)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {src}: {exc}") from exc
    try:
        return parse_config(raw, src.parent)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"config {src}: {exc}") from exc


def with_overrides(
    config: AnalysisConfig,
    offline: bool | None = None,
    abandon_threshold: timedelta | None = None,
) -> AnalysisConfig:
    """CLI flags win over file values."""
    updated = config
    if offline is not None:
        updated = replace(updated, offline=offline)
    if abandon_threshold is not None:
        updated = replace(
            updated, abandon=replace(updated.abandon, threshold=abandon_threshold)
        )
    return updated
