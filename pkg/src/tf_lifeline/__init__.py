"""Truck-factor lifelines: who carries a repository, when they leave, and
whether the project attracts replacements."""

from .authorship import (
    AuthorshipFactors,
    AuthorshipTable,
    DoaModel,
    build_authorship_table,
    compute_doa,
    compute_factors,
    main_authors_of,
)
from .config import AnalysisConfig, ConfigError, load_config
from .history import (
    EMPTY_RULES,
    ChangeKind,
    CommitRecord,
    EmptyHistoryError,
    FileChange,
    FileSnapshot,
    HistoryError,
    MalformedLogError,
    RepositoryHistory,
    RuleSet,
    filter_corrupted_migration,
    filter_longevity,
    ingest_log_file,
    ingest_repository,
    load_rules,
    parse_log_line,
    parse_rules,
    select_source_files,
    snapshot_files,
)
from .identity import (
    AliasReport,
    CanonicalDeveloper,
    LookupClient,
    MappingError,
    RawIdentity,
    load_mapping,
    resolve_aliases,
)
from .lifecycle import (
    AbandonmentPolicy,
    ContributorKind,
    LifecycleTimeline,
    PostTFDDMetrics,
    ProjectState,
    TFDDEvent,
    build_timeline,
    classify_survival,
    detect_tfdd,
    is_abandoner,
    post_tfdd_metrics,
    yearly_snapshots,
)
from .report import (
    CorpusReport,
    ProjectResult,
    emit_report,
    emit_sensitivity,
    load_project_list,
    render_sensitivity,
    run_corpus,
    run_project,
    run_sensitivity,
)
from .sensitivity import (
    InterCommitProfile,
    SensitivityReport,
    SensitivityRow,
    build_report,
    harmonic,
    improvement_of,
    precision_of,
    profile_developers,
    table_round,
)
from .stats import (
    EffectSize,
    Magnitude,
    Sided,
    TestResult,
    benjamini_hochberg,
    cliffs_delta,
    mann_whitney,
)
from .truckfactor import TFSnapshot, TFUndefinedError, compute_tf, coverage

__version__ = "0.1.0"

__all__ = [
    "AbandonmentPolicy",
    "AliasReport",
    "AnalysisConfig",
    "AuthorshipFactors",
    "AuthorshipTable",
    "CanonicalDeveloper",
    "ChangeKind",
    "CommitRecord",
    "ConfigError",
    "ContributorKind",
    "CorpusReport",
    "DoaModel",
    "EMPTY_RULES",
    "EffectSize",
    "EmptyHistoryError",
    "FileChange",
    "FileSnapshot",
    "HistoryError",
    "InterCommitProfile",
    "LifecycleTimeline",
    "LookupClient",
    "Magnitude",
    "MalformedLogError",
    "MappingError",
    "PostTFDDMetrics",
    "ProjectResult",
    "ProjectState",
    "RawIdentity",
    "RepositoryHistory",
    "RuleSet",
    "SensitivityReport",
    "SensitivityRow",
    "Sided",
    "TFDDEvent",
    "TFSnapshot",
    "TFUndefinedError",
    "TestResult",
    "benjamini_hochberg",
    "build_authorship_table",
    "build_report",
    "build_timeline",
    "classify_survival",
    "cliffs_delta",
    "compute_doa",
    "compute_factors",
    "compute_tf",
    "coverage",
    "detect_tfdd",
    "emit_report",
    "emit_sensitivity",
    "filter_corrupted_migration",
    "filter_longevity",
    "harmonic",
    "improvement_of",
    "ingest_log_file",
    "ingest_repository",
    "is_abandoner",
    "load_config",
    "load_mapping",
    "load_project_list",
    "load_rules",
    "main_authors_of",
    "mann_whitney",
    "parse_log_line",
    "parse_rules",
    "post_tfdd_metrics",
    "precision_of",
    "profile_developers",
    "render_sensitivity",
    "resolve_aliases",
    "run_corpus",
    "run_project",
    "run_sensitivity",
    "select_source_files",
    "snapshot_files",
    "table_round",
    "yearly_snapshots",
]
