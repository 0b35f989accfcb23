"""Yearly snapshots, detachment events, episode handling, and survival."""

from __future__ import annotations

import random
from datetime import timedelta

import pytest

from tf_lifeline.lifecycle import (
    ANCHOR_SNAPSHOT,
    AbandonmentPolicy,
    ContributorKind,
    ProjectState,
    SnapshotPoint,
    attraction_delay_years,
    build_timeline,
    classify_survival,
    detect_tfdd,
    developer_activity,
    is_abandoner,
    post_tfdd_metrics,
    snapshot_instants,
    yearly_snapshots,
)
from tf_lifeline.timeutil import DAY, YEAR
from tf_lifeline.truckfactor import TFSnapshot

from conftest import commit, history, ts
from oracles import tfdd_survival_oracle


def point(when, devs) -> SnapshotPoint:
    """Snapshot with a synthetic TF result (or a gap when devs is None)."""
    at = ts(when)
    if devs is None:
        return SnapshotPoint(as_of=at, tf=None)
    devs = frozenset(devs)
    return SnapshotPoint(
        as_of=at,
        tf=TFSnapshot(
            as_of=at,
            tf=len(devs),
            tf_developers=devs,
            coverage_at_stop=0.0,
            removal_order=tuple(sorted(devs)),
        ),
    )


class TestAbandonment:
    def test_threshold_against_head(self):
        hist = history(
            commit("a", "2020-01-01", ("A", "f.rb")),
            commit("b", "2021-06-01", ("M", "f.rb")),
        )
        assert is_abandoner("a", hist)  # 517 days of silence
        assert not is_abandoner("b", hist)

    def test_exact_threshold_counts_as_gone(self):
        start = ts("2020-01-01")
        hist = history(
            commit("a", start, ("A", "f.rb")),
            commit("b", start + YEAR, ("M", "f.rb")),
        )
        assert is_abandoner("a", hist)

    def test_just_under_threshold_is_active(self):
        start = ts("2020-01-01")
        hist = history(
            commit("a", start, ("A", "f.rb")),
            commit("b", start + YEAR - DAY, ("M", "f.rb")),
        )
        assert not is_abandoner("a", hist)

    def test_snapshot_anchor(self):
        hist = history(
            commit("a", "2020-01-01", ("A", "f.rb")),
            commit("b", "2024-01-01", ("M", "f.rb")),
        )
        policy = AbandonmentPolicy(anchor=ANCHOR_SNAPSHOT)
        assert not is_abandoner("a", hist, policy, at=ts("2020-06-01"))
        assert is_abandoner("a", hist, policy, at=ts("2021-06-01"))

    def test_snapshot_anchor_requires_instant(self):
        hist = history(commit("a", "2020-01-01", ("A", "f.rb")))
        with pytest.raises(ValueError):
            is_abandoner("a", hist, AbandonmentPolicy(anchor=ANCHOR_SNAPSHOT))

    def test_unknown_developer(self):
        hist = history(commit("a", "2020-01-01", ("A", "f.rb")))
        with pytest.raises(ValueError):
            is_abandoner("nobody", hist)

    def test_custom_threshold(self):
        start = ts("2020-01-01")
        hist = history(
            commit("a", start, ("A", "f.rb")),
            commit("b", start + DAY * 100, ("M", "f.rb")),
        )
        assert is_abandoner("a", hist, AbandonmentPolicy(threshold=DAY * 50))
        assert not is_abandoner("a", hist, AbandonmentPolicy(threshold=DAY * 200))


class TestSnapshotInstants:
    def test_calendar_years(self):
        hist = history(
            commit("a", "2020-03-10", ("A", "f.rb")),
            commit("a", "2023-05-01", ("M", "f.rb")),
        )
        assert snapshot_instants(hist) == [
            ts("2021-03-10"),
            ts("2022-03-10"),
            ts("2023-03-10"),
        ]

    def test_partial_final_year_dropped(self):
        hist = history(
            commit("a", "2020-03-10", ("A", "f.rb")),
            commit("a", "2022-03-09", ("M", "f.rb")),
        )
        assert snapshot_instants(hist) == [ts("2021-03-10")]

    def test_leap_day_creation(self):
        hist = history(
            commit("a", "2020-02-29", ("A", "f.rb")),
            commit("a", "2024-06-01", ("M", "f.rb")),
        )
        instants = snapshot_instants(hist)
        assert instants[0] == ts("2021-02-28")
        assert instants[3] == ts("2024-02-29")  # the leap day comes back

    def test_fixed_cadence(self):
        hist = history(
            commit("a", "2020-01-01", ("A", "f.rb")),
            commit("a", "2020-12-31", ("M", "f.rb")),
        )
        instants = snapshot_instants(hist, cadence_days=100.0)
        assert instants == [
            ts("2020-01-01") + timedelta(days=100),
            ts("2020-01-01") + timedelta(days=200),
            ts("2020-01-01") + timedelta(days=300),
        ]

    def test_sub_year_history_has_no_snapshots(self):
        hist = history(
            commit("a", "2020-01-01", ("A", "f.rb")),
            commit("a", "2020-06-01", ("M", "f.rb")),
        )
        assert snapshot_instants(hist) == []


class TestYearlySnapshots:
    def test_gap_when_no_file_qualifies(self):
        # the only live file at year one has no main author (inherited file,
        # every score below the absolute gate); year two has a real file
        commits = [
            commit(f"d{i}", ts("2020-01-01") + DAY * i, ("M", "shared.rb"))
            for i in range(9)
        ]
        commits.append(commit("a", "2021-06-01", ("A", "own.rb")))
        commits.append(commit("a", "2022-02-01", ("M", "own.rb")))
        hist = history(*commits)
        points = yearly_snapshots(hist)
        assert points[0].tf is None
        assert points[1].tf is not None
        assert points[1].tf.tf_developers == frozenset({"a"})

    def test_snapshot_tf_values(self, simple_history):
        # single year of history: no snapshot at all
        assert yearly_snapshots(simple_history) == ()


class TestDetection:
    def make_history(self):
        """a leaves early, b stays active till head."""
        return history(
            commit("a", "2020-01-01", ("A", "f.rb")),
            commit("a", "2020-06-01", ("M", "f.rb")),
            commit("b", "2023-01-01", ("M", "f.rb")),
        )

    def test_single_event(self):
        hist = self.make_history()
        snaps = (point("2021-01-01", {"a"}), point("2022-01-01", {"a"}))
        events = detect_tfdd(snaps, hist)
        assert len(events) == 1
        event = events[0]
        assert event.detected_at == ts("2021-01-01")
        assert event.occurred_at == ts("2020-06-01")
        assert event.detached == frozenset({"a"})
        assert event.tf_at_event == 1

    def test_active_developer_blocks_event(self):
        hist = self.make_history()
        snaps = (point("2021-01-01", {"a", "b"}),)
        assert detect_tfdd(snaps, hist) == ()

    def test_departed_but_not_abandoner(self):
        # c's last commit precedes the snapshot by months, yet c commits
        # again within a year of head, so the set is not detached
        hist = history(
            commit("c", "2020-01-01", ("A", "f.rb")),
            commit("c", "2022-06-01", ("M", "f.rb")),
            commit("z", "2023-01-01", ("M", "f.rb")),
        )
        snaps = (point("2021-01-01", {"c"}),)
        assert detect_tfdd(snaps, hist) == ()

    def test_episode_collapse_even_when_sets_differ(self):
        # both snapshots detached with different TF sets and no active
        # snapshot between them: one episode, one event
        hist = history(
            commit("a", "2020-01-01", ("A", "f.rb")),
            commit("b", "2020-03-01", ("M", "f.rb")),
            commit("z", "2024-01-01", ("M", "f.rb")),
        )
        snaps = (
            point("2021-01-01", {"a"}),
            point("2022-01-01", {"b"}),
        )
        events = detect_tfdd(snaps, hist)
        assert len(events) == 1
        assert events[0].detached == frozenset({"a"})

    def test_recovery_then_second_event(self):
        hist = history(
            commit("a", "2019-01-01", ("A", "f.rb")),
            commit("a", "2019-06-01", ("M", "f.rb")),
            commit("b", "2021-06-01", ("M", "f.rb")),
            commit("b", "2021-08-01", ("M", "f.rb")),
            commit("z", "2024-06-01", ("M", "f.rb")),
        )
        snaps = (
            point("2020-01-01", {"a"}),  # a gone -> event 1
            point("2021-01-01", {"a"}),  # same episode
            point("2022-01-01", {"b"}),  # b was active within a year of head? no
        )
        # b's last commit 2021-08-01; head 2024-06-01: b is an abandoner too,
        # so the episode never ends and a second event never fires
        events = detect_tfdd(snaps, hist)
        assert len(events) == 1

        # push b's activity close to head: now the episode ends at 2022 and a
        # third, detached snapshot opens a second event
        hist2 = history(
            commit("a", "2019-01-01", ("A", "f.rb")),
            commit("a", "2019-06-01", ("M", "f.rb")),
            commit("b", "2023-09-01", ("M", "f.rb")),
            commit("z", "2024-06-01", ("M", "f.rb")),
        )
        snaps2 = (
            point("2020-01-01", {"a"}),
            point("2022-01-01", {"b"}),  # b not an abandoner: active again
            point("2024-02-01", {"a"}),  # detached again: second event
        )
        events2 = detect_tfdd(snaps2, hist2)
        assert len(events2) == 2
        assert events2[1].detected_at == ts("2024-02-01")

    def test_gap_carries_state(self):
        hist = self.make_history()
        snaps = (
            point("2021-01-01", {"a"}),
            point("2022-01-01", None),
            point("2023-01-01", {"a"}),
        )
        events = detect_tfdd(snaps, hist)
        assert len(events) == 1  # the gap neither ends nor restarts the episode


class TestStates:
    def test_states_parallel_snapshots(self):
        hist = history(
            commit("a", "2020-01-01", ("A", "f.rb")),
            commit("a", "2020-06-01", ("M", "f.rb")),
            commit("b", "2022-06-01", ("M", "f.rb")),
            commit("b", "2023-06-01", ("M", "f.rb")),
        )
        snaps = (
            point("2021-01-01", {"a"}),
            point("2022-01-01", None),
            point("2023-01-01", {"b"}),
        )
        from tf_lifeline.lifecycle import _Walk

        events, states = _Walk(hist, AbandonmentPolicy()).run(snaps)
        assert states == [
            ProjectState.INACTIVE,
            ProjectState.INACTIVE,  # gap keeps the previous state
            ProjectState.ACTIVE,
        ]
        assert len(events) == 1


class TestSurvival:
    def base_history(self):
        return history(
            commit("a", "2020-01-01", ("A", "f.rb")),
            commit("a", "2020-06-01", ("M", "f.rb")),
            commit("c", "2022-06-01", ("M", "f.rb")),
            commit("c", "2023-06-01", ("M", "f.rb")),
        )

    def test_newcomer_revival(self):
        hist = self.base_history()
        snaps = (
            point("2021-01-01", {"a"}),
            point("2023-01-01", {"c"}),
        )
        events = detect_tfdd(snaps, hist)
        survived, fresh, split, attracted = classify_survival(snaps, events, hist)
        assert survived is True
        assert fresh == frozenset({"c"})
        assert split == {"c": ContributorKind.NEWCOMER}
        assert attracted == ts("2023-01-01")

    def test_old_contributor_revival(self):
        # c existed before the detachment occurred, so c is no newcomer
        hist = history(
            commit("c", "2020-02-01", ("M", "g.rb")),
            commit("a", "2020-03-01", ("A", "f.rb")),
            commit("a", "2020-06-01", ("M", "f.rb")),
            commit("c", "2022-06-01", ("M", "f.rb")),
            commit("c", "2023-06-01", ("M", "f.rb")),
        )
        snaps = (
            point("2021-03-01", {"a"}),
            point("2023-03-01", {"c"}),
        )
        events = detect_tfdd(snaps, hist)
        survived, fresh, split, _ = classify_survival(snaps, events, hist)
        assert survived
        assert split == {"c": ContributorKind.OLD_CONTRIBUTOR}

    def test_detached_member_cannot_revive(self):
        hist = history(
            commit("a", "2020-01-01", ("A", "f.rb")),
            commit("a", "2020-06-01", ("M", "f.rb")),
            commit("z", "2024-06-01", ("M", "f.rb")),
        )
        snaps = (
            point("2021-01-01", {"a"}),
            point("2022-01-01", {"a"}),
        )
        events = detect_tfdd(snaps, hist)
        survived, fresh, split, attracted = classify_survival(snaps, events, hist)
        assert survived is False
        assert fresh == frozenset()
        assert attracted is None

    def test_requires_events(self):
        hist = self.base_history()
        with pytest.raises(ValueError):
            classify_survival((), (), hist)

    def test_mixed_split(self):
        hist = history(
            commit("old", "2020-01-01", ("M", "g.rb")),
            commit("a", "2020-02-01", ("A", "f.rb")),
            commit("a", "2020-06-01", ("M", "f.rb")),
            commit("old", "2022-06-01", ("M", "f.rb")),
            commit("new", "2022-07-01", ("M", "f.rb")),
            commit("old", "2023-06-01", ("M", "f.rb")),
            commit("new", "2023-07-01", ("M", "f.rb")),
        )
        snaps = (
            point("2021-02-01", {"a"}),
            point("2023-02-01", {"old", "new"}),
        )
        events = detect_tfdd(snaps, hist)
        survived, fresh, split, _ = classify_survival(snaps, events, hist)
        assert survived
        assert split["old"] is ContributorKind.OLD_CONTRIBUTOR
        assert split["new"] is ContributorKind.NEWCOMER


class TestAttractionDelay:
    def test_first_year_bucket(self):
        assert attraction_delay_years(ts("2020-01-01"), ts("2020-06-01")) == 1

    def test_later_buckets(self):
        assert attraction_delay_years(ts("2020-01-01"), ts("2021-06-01")) == 2
        assert attraction_delay_years(ts("2020-01-01"), ts("2023-01-01")) == 4


class TestPostMetrics:
    def test_counts_and_share(self):
        hist = history(
            commit("a", "2020-01-01", ("A", "f.rb"), ("A", "g.rb")),
            commit("a", "2020-06-01", ("M", "f.rb")),
            commit("c", "2022-06-01", ("A", "h.rb")),
            commit("c", "2023-06-01", ("M", "h.rb")),
        )
        snaps = (point("2021-01-01", {"a"}), point("2023-01-01", {"c"}))
        events = detect_tfdd(snaps, hist)
        metrics = post_tfdd_metrics(hist, events[-1], frozenset({"c"}))
        assert metrics.commits_after == 2
        assert metrics.pct_commits_after == pytest.approx(0.5)
        assert metrics.new_tf_file_share == pytest.approx(1 / 3)

    def test_share_zero_without_new_developers(self):
        hist = history(
            commit("a", "2020-01-01", ("A", "f.rb")),
            commit("a", "2020-06-01", ("M", "f.rb")),
            commit("z", "2024-06-01", ("M", "f.rb")),
        )
        snaps = (point("2021-01-01", {"a"}),)
        events = detect_tfdd(snaps, hist)
        metrics = post_tfdd_metrics(hist, events[-1], frozenset())
        assert metrics.new_tf_file_share == 0.0
        assert metrics.commits_after == 1


class TestEndToEndTimeline:
    def test_narrative_shape(self):
        """Founder leaves, successor joins, takes over, project survives."""
        commits = [commit("founder", "2018-01-10", ("A", "core.rb"), ("A", "io.rb"))]
        commits += [
            commit("founder", ts("2018-01-10") + DAY * 30 * i, ("M", "core.rb"))
            for i in range(1, 12)
        ]
        # founder's last commit just before the first anniversary
        commits.append(commit("founder", "2019-01-05", ("M", "io.rb")))
        # successor arrives late in year two and dominates from then on
        commits += [
            commit("heir", ts("2019-11-01") + DAY * 40 * i, ("A", f"n{i}.rb"))
            for i in range(6)
        ]
        commits += [
            commit("heir", ts("2020-08-01") + DAY * 40 * i, ("M", f"n{i}.rb"))
            for i in range(6)
        ]
        hist = history(*commits)
        timeline, metrics = build_timeline(hist)
        assert [s.tf is not None for s in timeline.snapshots].count(True) == len(
            timeline.snapshots
        )
        assert len(timeline.events) == 1
        event = timeline.events[0]
        assert event.detached == frozenset({"founder"})
        assert event.occurred_at == ts("2019-01-05")
        assert timeline.survived is True
        assert timeline.new_tf_developers == frozenset({"heir"})
        assert timeline.newcomer_split == {"heir": ContributorKind.NEWCOMER}
        assert metrics is not None
        assert metrics.new_tf_file_share > 0.5

    def test_no_event_yields_no_metrics(self, simple_history):
        timeline, metrics = build_timeline(simple_history)
        assert timeline.events == ()
        assert timeline.survived is None
        assert metrics is None


class TestOracleAgreement:
    def test_randomized_walks(self):
        rng = random.Random(20240819)
        compared = 0
        for trial in range(150):
            hist, snaps = random_scene(rng, trial)
            events = detect_tfdd(snaps, hist)
            activity = developer_activity(hist)
            ref_events, ref_survived, ref_new, ref_at = tfdd_survival_oracle(
                [(p.as_of, p.tf.tf_developers if p.tf else None) for p in snaps],
                activity,
                hist.head_at,
                YEAR,
            )
            assert [
                (e.detected_at, e.occurred_at, e.detached) for e in events
            ] == ref_events, trial
            if events:
                compared += 1
                survived, fresh, _split, attracted = classify_survival(
                    snaps, events, hist
                )
                assert survived == ref_survived, trial
                assert fresh == ref_new, trial
                assert attracted == ref_at, trial
        assert compared > 30  # the generator produced enough eventful scenes


def random_scene(rng: random.Random, trial: int):
    """A random small history plus synthetic snapshots over its span."""
    devs = [f"d{i}" for i in range(rng.randint(1, 6))]
    start = ts("2018-01-01")
    commits = []
    for i, dev in enumerate(devs):
        first = start + DAY * rng.randint(0, 600)
        last = first + DAY * rng.randint(0, 1500)
        commits.append(commit(dev, first, ("M", "f.rb"), cid=f"s{trial}d{i}a"))
        if last != first:
            commits.append(commit(dev, last, ("M", "f.rb"), cid=f"s{trial}d{i}b"))
    hist = history(*commits)
    snaps = []
    n_snaps = rng.randint(1, 6)
    for k in range(n_snaps):
        at = hist.created_at + DAY * rng.randint(1, 2200)
        if rng.random() < 0.15:
            snaps.append(point(at, None))
        else:
            eligible = [d for d in devs if developer_activity(hist)[d][0] <= at]
            if not eligible:
                snaps.append(point(at, None))
            else:
                snaps.append(
                    point(at, frozenset(rng.sample(eligible, rng.randint(1, len(eligible)))))
                )
    snaps.sort(key=lambda p: p.as_of)
    return hist, tuple(snaps)
