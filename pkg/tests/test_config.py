"""Config parsing, defaults, overrides, and the duration/instant helpers."""

from __future__ import annotations

from datetime import timedelta, timezone

import pytest

from tf_lifeline.config import (
    DEFAULT_CONFIG,
    AnalysisConfig,
    ConfigError,
    load_config,
    with_overrides,
)
from tf_lifeline.timeutil import (
    DAY,
    MONTH,
    YEAR,
    add_calendar_years,
    format_duration,
    format_instant,
    parse_duration,
    parse_instant,
)

from conftest import ts


class TestDurations:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("30d", 30 * DAY),
            ("6m", 6 * MONTH),
            ("1y", YEAR),
            ("1.5y", 1.5 * YEAR),
            (" 2 Y ", 2 * YEAR),
            ("0.5m", 0.5 * MONTH),
        ],
    )
    def test_parse(self, text, expected):
        assert parse_duration(text) == expected

    @pytest.mark.parametrize("text", ["", "y", "10", "10w", "-3d", "1..5y"])
    def test_parse_rejects(self, text):
        with pytest.raises(ValueError):
            parse_duration(text)

    @pytest.mark.parametrize(
        "delta,expected",
        [
            (YEAR, "1y"),
            (1.5 * YEAR, "1.5y"),
            (6 * MONTH, "6m"),
            (3 * MONTH, "3m"),
            (timedelta(days=10), "10d"),
            (2 * YEAR, "2y"),
        ],
    )
    def test_format(self, delta, expected):
        assert format_duration(delta) == expected

    def test_round_trip(self):
        for text in ["3m", "6m", "1y", "1.5y", "2y", "45d"]:
            assert format_duration(parse_duration(text)) == text


class TestInstants:
    def test_z_suffix(self):
        moment = parse_instant("2020-06-01T12:30:00Z")
        assert moment.tzinfo is timezone.utc
        assert moment.hour == 12

    def test_naive_is_utc(self):
        assert parse_instant("2020-06-01T12:30:00") == parse_instant(
            "2020-06-01T12:30:00Z"
        )

    def test_offset_normalized(self):
        assert parse_instant("2020-06-01T14:30:00+02:00") == parse_instant(
            "2020-06-01T12:30:00Z"
        )

    def test_format_round_trip(self):
        text = "2020-06-01T12:30:00Z"
        assert format_instant(parse_instant(text)) == text

    def test_add_calendar_years_plain(self):
        assert add_calendar_years(ts("2020-03-10"), 2) == ts("2022-03-10")

    def test_add_calendar_years_leap_clamp(self):
        assert add_calendar_years(ts("2020-02-29"), 1) == ts("2021-02-28")
        assert add_calendar_years(ts("2020-02-29"), 4) == ts("2024-02-29")


class TestConfigFile:
    def test_defaults_from_empty_file(self, tmp_path):
        path = tmp_path / "c.toml"
        path.write_text("")
        assert load_config(path) == DEFAULT_CONFIG

    def test_full_file(self, tmp_path):
        (tmp_path / "r.txt").write_text("include:*.py\n")
        (tmp_path / "m.json").write_text("{}")
        path = tmp_path / "c.toml"
        path.write_text(
            """
[doa]
base = 3.0
fa = 1.0
dl = 0.2
ac = 0.3
norm_threshold = 0.8
abs_threshold = 3.1
require_abs_gate = false

[abandon]
threshold = "6m"
anchor = "snapshot"

[snapshots]
cadence = "180d"

[filters]
longevity_minimum = "1y"
migration_commit_window = 10
migration_fraction = 0.4

[sensitivity]
grid = ["1m", "2m", "3m"]

[paths]
rules = "r.txt"
mapping = "m.json"
cache = "cache.jsonl"
"""
        )
        config = load_config(path)
        assert config.doa.base == 3.0
        assert config.doa.require_abs_gate is False
        assert config.abandon.threshold == 6 * MONTH
        assert config.abandon.anchor == "snapshot"
        assert config.cadence_days == 180.0
        assert config.longevity_minimum == YEAR
        assert config.migration_commit_window == 10
        assert config.migration_fraction == 0.4
        assert config.grid == (MONTH, 2 * MONTH, 3 * MONTH)
        assert config.rules_path == (tmp_path / "r.txt").resolve()
        assert config.mapping_path == (tmp_path / "m.json").resolve()
        assert config.cache_path == (tmp_path / "cache.jsonl").resolve()

    def test_bad_anchor(self, tmp_path):
        path = tmp_path / "c.toml"
        path.write_text('[abandon]\nanchor = "sideways"\n')
        with pytest.raises(ConfigError):
            load_config(path)

    def test_bad_duration(self, tmp_path):
        path = tmp_path / "c.toml"
        path.write_text('[abandon]\nthreshold = "soon"\n')
        with pytest.raises(ConfigError):
            load_config(path)

    def test_bad_toml(self, tmp_path):
        path = tmp_path / "c.toml"
        path.write_text("[unclosed\n")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "absent.toml")

    def test_bad_grid_entry(self, tmp_path):
        path = tmp_path / "c.toml"
        path.write_text('[sensitivity]\ngrid = ["3m", "soon"]\n')
        with pytest.raises(ConfigError):
            load_config(path)


class TestOverrides:
    def test_offline_flag(self):
        config = AnalysisConfig()
        assert with_overrides(config, offline=True).offline is True
        assert with_overrides(config, offline=None).offline is False

    def test_abandon_threshold(self):
        config = AnalysisConfig()
        updated = with_overrides(config, abandon_threshold=2 * YEAR)
        assert updated.abandon.threshold == 2 * YEAR
        assert updated.abandon.anchor == config.abandon.anchor
        # the original is untouched
        assert config.abandon.threshold == YEAR
