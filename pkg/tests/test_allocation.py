import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kwagent.allocation import (
    DEEP_ONLY,
    FULL_ADAPTIVE,
    WIDE_ONLY,
    aggregate_group_kpi,
    assign_deeper_quotas,
    compute_split,
    fixed_growth,
    plan_step,
)
from kwagent.domain import Keyword, KeywordSet, KpiRecord, Origin, StepOutcome
from kwagent.errors import InvalidKpi, NoCategories, ValidationError


def largest_remainder(count, weights):
    """Independent apportionment: integer arithmetic only."""
    names = list(weights)
    total = sum(weights.values())
    if total == 0:
        base, extra = divmod(count, len(names))
        return {n: base + (i < extra) for i, n in enumerate(names)}
    floors = {n: weights[n] * count // total for n in names}
    rems = {n: weights[n] * count - floors[n] * total for n in names}
    order = sorted(names, key=lambda n: (-rems[n], n))
    left = count - sum(floors.values())
    return {n: floors[n] + (n in order[:left]) for n in names}


@pytest.mark.parametrize(
    "pw, pd, n, variant, expected",
    [
        (30, 70, 10, FULL_ADAPTIVE, (3, 7)),
        (50, 50, 7, FULL_ADAPTIVE, (3, 4)),
        (0, 0, 10, FULL_ADAPTIVE, (5, 5)),
        (0, 0, 7, FULL_ADAPTIVE, (3, 4)),
        (123, 456, 10, WIDE_ONLY, (10, 0)),
        (123, 456, 10, DEEP_ONLY, (0, 10)),
        (999, 1, 10, fixed_growth(0.5), (5, 5)),
        (1, 2, 10, FULL_ADAPTIVE, (3, 7)),
        (0.1, 0.2, 3, FULL_ADAPTIVE, (1, 2)),
    ],
)
def test_split_spot_values(pw, pd, n, variant, expected):
    plan = compute_split(pw, pd, n, variant)
    assert (plan.wider_count, plan.deeper_count) == expected


@pytest.mark.parametrize(
    "count, cats, expected",
    [
        (7, {"A": 70, "B": 30}, {"A": 5, "B": 2}),
        (4, {"A": 0, "B": 0}, {"A": 2, "B": 2}),
        (5, {"B": 0, "A": 0}, {"B": 3, "A": 2}),
        (10, {"A": 50, "B": 30, "C": 20}, {"A": 5, "B": 3, "C": 2}),
        (1, {"B": 1, "A": 1}, {"B": 0, "A": 1}),
        (0, {"A": 3}, {"A": 0}),
    ],
)
def test_quota_spot_values(count, cats, expected):
    assert assign_deeper_quotas(count, cats) == expected


def test_quota_without_categories():
    assert assign_deeper_quotas(0, {}) == {}
    with pytest.raises(NoCategories):
        assign_deeper_quotas(3, {})


@pytest.mark.parametrize("bad", [-1, float("nan"), float("inf"), "x", True])
def test_bad_kpis_rejected(bad):
    with pytest.raises(InvalidKpi):
        compute_split(bad, 1, 10)


@pytest.mark.parametrize("n", [0, -3, 2.5])
def test_bad_budget_rejected(n):
    with pytest.raises(ValidationError):
        compute_split(1, 1, n)


kpis = st.integers(min_value=0, max_value=10**9)


@settings(max_examples=300, deadline=None)
@given(kpis, kpis, st.integers(min_value=1, max_value=200), st.integers(min_value=1, max_value=1000))
def test_split_floor_law_and_scale_invariance(pw, pd, n, c):
    plan = compute_split(pw, pd, n)
    expected = pw * n // (pw + pd) if pw + pd else n // 2
    assert plan.wider_count == expected
    assert plan.wider_count + plan.deeper_count == n
    scaled = compute_split(c * pw, c * pd, n)
    assert (scaled.wider_count, scaled.deeper_count) == (plan.wider_count, plan.deeper_count)


@settings(max_examples=300, deadline=None)
@given(st.integers(min_value=0, max_value=60), st.dictionaries(st.text("ABCDEFG", min_size=1, max_size=3), st.integers(0, 10**6), min_size=1, max_size=8))
def test_quotas_match_integer_oracle(count, cats):
    quotas = assign_deeper_quotas(count, cats)
    assert quotas == largest_remainder(count, cats)
    assert sum(quotas.values()) == count
    total = sum(cats.values())
    if total:
        for name, q in quotas.items():
            ideal = cats[name] * count / total
            assert math.floor(ideal) <= q <= math.floor(ideal) + 1


def test_plan_step_combines_split_and_quotas():
    plan = plan_step(30, 70, 10, FULL_ADAPTIVE, {"A": 70, "B": 30})
    assert plan.wider_count == 3
    assert plan.deeper_quotas == {"A": 5, "B": 2}


def test_group_kpi_ignores_initial_keywords():
    kws = [
        Keyword("a", "X", Origin.WIDER, 1),
        Keyword("b", "Y", Origin.DEEPER, 1),
        Keyword("c", "Y", Origin.DEEPER, 1),
    ]
    kp = {"a": KpiRecord(clicks=3), "b": KpiRecord(clicks=4), "c": KpiRecord(clicks=5)}
    assert aggregate_group_kpi(StepOutcome(1, KeywordSet(1, kws), kp)) == (3, 9)
    init = StepOutcome(0, KeywordSet(0, [Keyword("z", "X")]), {"z": KpiRecord(clicks=100)})
    assert aggregate_group_kpi(init) == (0, 0)
