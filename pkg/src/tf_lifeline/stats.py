"""Rank statistics used by the corpus comparisons.

Self-contained on purpose: the exact small-sample path must agree with a
pairwise enumeration of group assignments to full precision, ties included,
which rules out delegating to a library with different tie conventions.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from enum import Enum

# Below this minimum group size the test enumerates the permutation null
# exactly; above it a normal approximation with tie correction is used.
EXACT_MIN_GROUP = 8

# Effect-size cut points: |delta| below each bound maps to the magnitude at
# the same position, anything above the last bound is large.
_DELTA_BOUNDS = (0.147, 0.33, 0.474)


class Sided(Enum):
    GREATER = "greater"  # first sample stochastically greater
    LESS = "less"
    TWO_SIDED = "two-sided"


class Magnitude(Enum):
    NEGLIGIBLE = "negligible"
    SMALL = "small"
    MEDIUM = "medium"
    LARGE = "large"


@dataclass(frozen=True)
class TestResult:
    statistic: float  # U statistic of the first sample
    p_value: float
    sided: Sided


@dataclass(frozen=True)
class EffectSize:
    delta: float
    magnitude: Magnitude


def _doubled_midranks(pooled: list[float]) -> dict[float, int]:
    """Map value -> 2 * midrank within the pooled sample (always an integer)."""
    ordered = sorted(pooled)
    ranks: dict[float, int] = {}
    for value in ordered:
        if value in ranks:
            continue
        less = bisect_left(ordered, value)
        equal = bisect_right(ordered, value) - less
        ranks[value] = 2 * less + equal + 1
    return ranks


def _exact_tail(a: list[float], b: list[float], doubled_u: int, sided: Sided) -> float:
    """Exact p over all C(n+m, n) assignments of the pooled values to group a.

    Counts subsets of the pooled doubled-midrank multiset by sum (a subset-sum
    DP equivalent to full enumeration), then reads off the tail containing the
    observed doubled U.
    """
    n, m = len(a), len(b)
    pooled = a + b
    ranks = _doubled_midranks(pooled)
    items = [ranks[v] for v in pooled]
    ways: list[dict[int, int]] = [{} for _ in range(n + 1)]
    ways[0][0] = 1
    for rank in items:
        for k in range(n, 0, -1):
            if not ways[k - 1]:
                continue
            target = ways[k]
            for total, count in ways[k - 1].items():
                key = total + rank
                target[key] = target.get(key, 0) + count
    offset = n * (n + 1)  # doubled U = doubled rank sum - offset
    total_arrangements = math.comb(n + m, n)
    center = n * m  # doubled U is symmetric around n*m
    hits = 0
    for rank_sum, count in ways[n].items():
        u2 = rank_sum - offset
        if sided is Sided.GREATER:
            if u2 >= doubled_u:
                hits += count
        elif sided is Sided.LESS:
            if u2 <= doubled_u:
                hits += count
        else:
            if abs(u2 - center) >= abs(doubled_u - center):
                hits += count
    return hits / total_arrangements


def _approx_tail(a: list[float], b: list[float], u: float, sided: Sided) -> float:
    """Normal approximation with tie correction and continuity correction."""
    n, m = len(a), len(b)
    total = n + m
    pooled = sorted(a + b)
    tie_term = 0
    index = 0
    while index < total:
        run = bisect_right(pooled, pooled[index]) - index
        tie_term += run**3 - run
        index += run
    mean = n * m / 2.0
    variance = n * m / 12.0 * ((total + 1) - tie_term / (total * (total - 1)))
    if variance <= 0:
        return 1.0
    sd = math.sqrt(variance)

    def upper(z: float) -> float:
        return 0.5 * math.erfc(z / math.sqrt(2))

    if sided is Sided.GREATER:
        return upper((u - mean - 0.5) / sd)
    if sided is Sided.LESS:
        return upper(-((u - mean + 0.5) / sd))
    z = max(abs(u - mean) - 0.5, 0.0) / sd
    return min(1.0, 2.0 * upper(z))


def mann_whitney(a: list[float], b: list[float], sided: Sided = Sided.TWO_SIDED) -> TestResult:
    """Rank-sum test of two independent samples with midrank tie handling.

    The statistic is U for sample ``a`` (number of (x, y) pairs with x > y,
    ties counting one half). Exact enumeration of the permutation null when
    the smaller group has at most 8 observations, normal approximation with
    tie and continuity corrections otherwise.

    Raises:
        ValueError: either sample is empty.
    """
    if not a or not b:
        raise ValueError("mann_whitney requires two non-empty samples")
    values_a = [float(x) for x in a]
    values_b = [float(y) for y in b]
    n = len(values_a)
    ranks = _doubled_midranks(values_a + values_b)
    doubled_rank_sum = sum(ranks[v] for v in values_a)
    doubled_u = doubled_rank_sum - n * (n + 1)
    u = doubled_u / 2.0
    if min(len(values_a), len(values_b)) <= EXACT_MIN_GROUP:
        p = _exact_tail(values_a, values_b, doubled_u, sided)
    else:
        p = _approx_tail(values_a, values_b, u, sided)
    return TestResult(statistic=u, p_value=p, sided=sided)


def cliffs_delta(a: list[float], b: list[float]) -> EffectSize:
    """Cliff's delta: P(x > y) - P(x < y) over all cross pairs.

    Raises:
        ValueError: either sample is empty.
    """
    if not a or not b:
        raise ValueError("cliffs_delta requires two non-empty samples")
    sorted_b = sorted(float(y) for y in b)
    m = len(sorted_b)
    wins = 0
    losses = 0
    for x in a:
        value = float(x)
        wins += bisect_left(sorted_b, value)
        losses += m - bisect_right(sorted_b, value)
    delta = (wins - losses) / (len(a) * m)
    magnitude = list(Magnitude)[bisect_right(_DELTA_BOUNDS, abs(delta))]
    return EffectSize(delta=delta, magnitude=magnitude)


def benjamini_hochberg(p_values: list[float]) -> list[float]:
    """Step-up false-discovery-rate adjustment, returned in input order.

    adjusted_i = min over j >= i (by ascending raw p) of p_(j) * m / j, capped
    at 1. Raw p-values outside [0, 1] are rejected.

    Raises:
        ValueError: any input outside [0, 1].
    """
    for p in p_values:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"p-value {p} outside [0, 1]")
    m = len(p_values)
    if m == 0:
        return []
    order = sorted(range(m), key=lambda i: p_values[i])
    adjusted = [0.0] * m
    running_min = 1.0
    for position in range(m - 1, -1, -1):
        index = order[position]
        scaled = p_values[index] * m / (position + 1)
        running_min = min(running_min, scaled)
        # in exact arithmetic the adjustment never drops below the raw value;
        # p * m / m can round one ulp under p, so restore the bound
        adjusted[index] = max(running_min, p_values[index])
    return adjusted
