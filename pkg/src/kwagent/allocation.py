"""Wider/deeper budget split and per-category deeper quotas.

Each step has a fixed budget of ``n`` keywords. The wider share is the
fraction of last step's selected KPI earned by keywords that opened new
categories; the remainder goes to existing categories, apportioned by
their cumulative KPI. All arithmetic on ratios is exact (``Fraction``) so
floor boundaries never wobble with float rounding.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Dict, Mapping, Tuple

from .domain import (
    AllocationPlan,
    KpiMetric,
    Origin,
    PolicyVariant,
    StepOutcome,
    VariantKind,
    selected_kpi,
)
from .errors import InvalidKpi, NoCategories, ValidationError

__all__ = [
    "PolicyVariant",
    "VariantKind",
    "aggregate_group_kpi",
    "compute_split",
    "assign_deeper_quotas",
    "plan_step",
]

FULL_ADAPTIVE = PolicyVariant(VariantKind.FULL_ADAPTIVE)
WIDE_ONLY = PolicyVariant(VariantKind.WIDE_ONLY)
DEEP_ONLY = PolicyVariant(VariantKind.DEEP_ONLY)


def fixed_growth(ratio: float) -> PolicyVariant:
    return PolicyVariant(VariantKind.FIXED_GROWTH, ratio)


def _exact(value, name) -> Fraction:
    if isinstance(value, bool):
        raise InvalidKpi(f"{name} must be numeric, got {value!r}")
    if isinstance(value, float) and not math.isfinite(value):
        raise InvalidKpi(f"{name} must be finite, got {value!r}")
    try:
        frac = Fraction(value)
    except (TypeError, ValueError):
        raise InvalidKpi(f"{name} must be numeric, got {value!r}") from None
    if frac < 0:
        raise InvalidKpi(f"{name} must be >= 0, got {value!r}")
    return frac


def aggregate_group_kpi(previous: StepOutcome, metric=KpiMetric.CLICKS) -> Tuple[float, float]:
    """Sum last step's selected KPI separately over wider- and deeper-origin keywords.

    Initial keywords count toward neither group, so the first generation
    step always sees ``(0, 0)``.
    """
    wider = deeper = 0
    for kw in previous.keyword_set:
        value = selected_kpi(previous.observed_kpis[kw.normalized], metric)
        if kw.origin is Origin.WIDER:
            wider += value
        elif kw.origin is Origin.DEEPER:
            deeper += value
    return wider, deeper


def compute_split(pW_kpi, pD_kpi, n: int, variant: PolicyVariant = FULL_ADAPTIVE) -> AllocationPlan:
    """Split ``n`` keywords into wider and deeper counts.

    The returned plan has no quotas yet; pair it with
    :func:`assign_deeper_quotas` (or use :func:`plan_step`).
    """
    wider_kpi = _exact(pW_kpi, "pW_kpi")
    deeper_kpi = _exact(pD_kpi, "pD_kpi")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ValidationError(f"n must be an integer >= 1, got {n!r}")

    kind = variant.kind
    if kind is VariantKind.FULL_ADAPTIVE:
        total = wider_kpi + deeper_kpi
        share = wider_kpi / total if total > 0 else Fraction(1, 2)
    elif kind is VariantKind.FIXED_GROWTH:
        share = Fraction(variant.ratio)
    elif kind is VariantKind.WIDE_ONLY:
        share = Fraction(1)
    else:
        share = Fraction(0)

    wider_count = math.floor(share * n)
    p_wider = float(share)
    return AllocationPlan(n, wider_count, n - wider_count, p_wider, 1.0 - p_wider)


def assign_deeper_quotas(deeper_count: int, categories: Mapping[str, float]) -> Dict[str, int]:
    """Apportion ``deeper_count`` over categories by largest remainder.

    ``categories`` must be in creation order; that order decides who gets
    the leftover slots when every category has zero KPI. Otherwise
    remainders are ranked descending, ties going to the lexicographically
    smaller name.
    """
    if isinstance(deeper_count, bool) or not isinstance(deeper_count, int) or deeper_count < 0:
        raise ValidationError(f"deeper_count must be an integer >= 0, got {deeper_count!r}")
    names = list(categories)
    if not names:
        if deeper_count > 0:
            raise NoCategories("deeper keywords requested but no categories exist yet")
        return {}
    weights = [_exact(categories[name], f"KPI of category {name!r}") for name in names]
    total = sum(weights)

    if total == 0:
        base, extra = divmod(deeper_count, len(names))
        return {name: base + (1 if i < extra else 0) for i, name in enumerate(names)}

    ideal = [w * deeper_count / total for w in weights]
    quotas = {name: math.floor(share) for name, share in zip(names, ideal)}
    leftover = deeper_count - sum(quotas.values())
    ranked = sorted(range(len(names)), key=lambda i: (-(ideal[i] - math.floor(ideal[i])), names[i]))
    for i in ranked[:leftover]:
        quotas[names[i]] += 1
    return quotas


def plan_step(pW_kpi, pD_kpi, n: int, variant: PolicyVariant, categories: Mapping[str, float]) -> AllocationPlan:
    """Split plus quotas, validated as a complete :class:`AllocationPlan`."""
    split = compute_split(pW_kpi, pD_kpi, n, variant)
    quotas = assign_deeper_quotas(split.deeper_count, categories)
    return AllocationPlan(split.n, split.wider_count, split.deeper_count, split.p_wider, split.p_deeper, quotas)
