"""Core value types: keywords, KPI records, campaign configuration and state."""

from __future__ import annotations

import enum
import math
import re
import unicodedata
from dataclasses import dataclass, field
from datetime import datetime
from typing import Dict, List, Mapping, Optional, Tuple

from .errors import InvalidKeyword, InvalidKpi, ValidationError

_WS = re.compile(r"\s+")


def clean_surface(raw: str) -> str:
    """Trim and collapse internal whitespace, keeping case and width."""
    if not isinstance(raw, str):
        raise InvalidKeyword(f"keyword must be a string, got {type(raw).__name__}")
    text = _WS.sub(" ", raw).strip()
    if not text:
        raise InvalidKeyword(f"keyword is empty after trimming: {raw!r}")
    return text


def normalize_keyword(raw: str) -> str:
    """Identity key of a keyword: NFKC, lowercased, whitespace collapsed.

    >>> normalize_keyword("  Sony  Bank ")
    'sony bank'
    """
    text = unicodedata.normalize("NFKC", clean_surface(raw)).lower()
    # NFKC can turn exotic spaces into plain ones, so collapse again
    text = _WS.sub(" ", text).strip()
    if not text:
        raise InvalidKeyword(f"keyword is empty after normalization: {raw!r}")
    return text


class Origin(str, enum.Enum):
    INITIAL = "initial"
    WIDER = "wider"
    DEEPER = "deeper"


class KpiMetric(str, enum.Enum):
    CLICKS = "clicks"
    CONVERSIONS = "conversions"


class VariantKind(str, enum.Enum):
    FULL_ADAPTIVE = "full_adaptive"
    FIXED_GROWTH = "fixed_growth"
    WIDE_ONLY = "wide_only"
    DEEP_ONLY = "deep_only"


@dataclass(frozen=True)
class PolicyVariant:
    """Allocation policy. ``ratio`` is the fixed wider share and exists only for fixed growth."""

    kind: VariantKind = VariantKind.FULL_ADAPTIVE
    ratio: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", VariantKind(self.kind))
        if self.kind is VariantKind.FIXED_GROWTH:
            if self.ratio is None or not (0.0 <= float(self.ratio) <= 1.0):
                raise ValidationError(f"fixed_growth needs a ratio in [0, 1], got {self.ratio!r}")
            object.__setattr__(self, "ratio", float(self.ratio))
        elif self.ratio is not None:
            raise ValidationError(f"{self.kind.value} does not take a ratio")

    @classmethod
    def parse(cls, text: str) -> "PolicyVariant":
        """Parse ``full``, ``full_adaptive``, ``fixed:0.5``, ``wide_only``, ``deep_only``."""
        text = text.strip().lower()
        aliases = {
            "full": "full_adaptive",
            "full_adaptive": "full_adaptive",
            "wide": "wide_only",
            "wide_only": "wide_only",
            "deep": "deep_only",
            "deep_only": "deep_only",
        }
        if text in aliases:
            return cls(VariantKind(aliases[text]))
        head, sep, tail = text.partition(":")
        if sep and head in ("fixed", "fixed_growth"):
            try:
                ratio = float(tail)
            except ValueError:
                raise ValidationError(f"bad fixed-growth ratio: {tail!r}") from None
            return cls(VariantKind.FIXED_GROWTH, ratio)
        raise ValidationError(f"unknown policy variant: {text!r}")

    @property
    def label(self) -> str:
        if self.kind is VariantKind.FIXED_GROWTH:
            return f"fixed_growth:{self.ratio:g}"
        return self.kind.value


@dataclass(frozen=True)
class Keyword:
    surface: str
    category: str
    origin: Origin = Origin.INITIAL
    step_introduced: int = 0
    normalized: str = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "surface", clean_surface(self.surface))
        object.__setattr__(self, "normalized", normalize_keyword(self.surface))
        category = _WS.sub(" ", str(self.category)).strip()
        if not category:
            raise InvalidKeyword(f"keyword {self.surface!r} has an empty category")
        object.__setattr__(self, "category", category)
        object.__setattr__(self, "origin", Origin(self.origin))
        if not isinstance(self.step_introduced, int) or self.step_introduced < 0:
            raise InvalidKeyword(f"step_introduced must be a non-negative int, got {self.step_introduced!r}")
        if (self.step_introduced == 0) != (self.origin is Origin.INITIAL):
            raise InvalidKeyword(
                f"{self.surface!r}: step 0 keywords must be initial and initial keywords must be step 0"
            )

    def to_dict(self) -> dict:
        return {"surface": self.surface, "category": self.category, "origin": self.origin.value}


def _check_count(name, value):
    if isinstance(value, bool) or value is None:
        raise InvalidKpi(f"{name} must be a number, got {value!r}")
    if isinstance(value, float):
        if not math.isfinite(value) or not value.is_integer():
            raise InvalidKpi(f"{name} must be a whole count, got {value!r}")
        value = int(value)
    if value < 0:
        raise InvalidKpi(f"{name} must be >= 0, got {value!r}")
    return int(value)


@dataclass(frozen=True)
class KpiRecord:
    clicks: int = 0
    search_volume: int = 0
    cpc: float = 0.0
    competitor_score: float = 0.0
    conversions: int = 0

    def __post_init__(self):
        object.__setattr__(self, "clicks", _check_count("clicks", self.clicks))
        object.__setattr__(self, "search_volume", _check_count("search_volume", self.search_volume))
        object.__setattr__(self, "conversions", _check_count("conversions", self.conversions))
        cpc = float(self.cpc)
        if not math.isfinite(cpc) or cpc < 0:
            raise InvalidKpi(f"cpc must be >= 0, got {self.cpc!r}")
        score = float(self.competitor_score)
        if not math.isfinite(score) or not 0.0 <= score <= 100.0:
            raise InvalidKpi(f"competitor_score must be in [0, 100], got {self.competitor_score!r}")
        object.__setattr__(self, "cpc", cpc)
        object.__setattr__(self, "competitor_score", score)

    def to_dict(self) -> dict:
        return {
            "clicks": self.clicks,
            "search_volume": self.search_volume,
            "cpc": self.cpc,
            "competitor_score": self.competitor_score,
        }


ZERO_KPI = KpiRecord()


def selected_kpi(record: KpiRecord, metric=KpiMetric.CLICKS):
    """Project a record onto the configured optimisation metric."""
    metric = KpiMetric(metric)
    if metric is KpiMetric.CLICKS:
        return record.clicks
    return record.conversions


@dataclass(frozen=True)
class KeywordSet:
    step: int
    keywords: Tuple[Keyword, ...] = ()

    def __post_init__(self):
        if self.step < 0:
            raise ValidationError(f"step must be >= 0, got {self.step}")
        object.__setattr__(self, "keywords", tuple(self.keywords))
        seen = set()
        for kw in self.keywords:
            if kw.normalized in seen:
                raise InvalidKeyword(f"duplicate keyword in set: {kw.surface!r}")
            seen.add(kw.normalized)

    def __len__(self):
        return len(self.keywords)

    def __iter__(self):
        return iter(self.keywords)


@dataclass(frozen=True)
class CampaignConfig:
    product: str
    horizon_T: int = 3
    per_step_n: int = 10
    initial_count: int = 3
    kpi_metric: KpiMetric = KpiMetric.CLICKS
    temperature: float = 0.1
    retry_limit: int = 3
    seed: int = 0
    variant: PolicyVariant = field(default_factory=PolicyVariant)
    memory_k: int = 20
    search_results: int = 5

    def __post_init__(self):
        if not str(self.product).strip():
            raise ValidationError("product: must be a non-empty descriptor")
        for name in ("horizon_T", "per_step_n", "initial_count", "memory_k", "search_results"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ValidationError(f"{name}: must be an integer >= 1, got {value!r}")
        if isinstance(self.retry_limit, bool) or not isinstance(self.retry_limit, int) or self.retry_limit < 0:
            raise ValidationError(f"retry_limit: must be an integer >= 0, got {self.retry_limit!r}")
        if not isinstance(self.seed, int) or not -(2**63) <= self.seed < 2**64:
            raise ValidationError(f"seed: must be a 64-bit integer, got {self.seed!r}")
        if float(self.temperature) < 0:
            raise ValidationError(f"temperature: must be >= 0, got {self.temperature!r}")
        try:
            object.__setattr__(self, "kpi_metric", KpiMetric(self.kpi_metric))
        except ValueError:
            raise ValidationError(f"kpi_metric: unknown metric {self.kpi_metric!r}") from None
        object.__setattr__(self, "temperature", float(self.temperature))

    def to_dict(self) -> dict:
        return {
            "product": self.product,
            "horizon_T": self.horizon_T,
            "per_step_n": self.per_step_n,
            "initial_count": self.initial_count,
            "kpi_metric": self.kpi_metric.value,
            "temperature": self.temperature,
            "retry_limit": self.retry_limit,
            "seed": self.seed,
            "variant": self.variant.label,
            "memory_k": self.memory_k,
            "search_results": self.search_results,
        }


@dataclass(frozen=True)
class Snippet:
    source_id: str
    text: str
    retrieved_at: datetime

    def __post_init__(self):
        if not str(self.text).strip():
            raise ValidationError(f"snippet {self.source_id!r} has empty text")


@dataclass(frozen=True)
class SearchContext:
    query: str
    snippets: Tuple[Snippet, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "snippets", tuple(self.snippets))


@dataclass(frozen=True)
class AllocationPlan:
    n: int
    wider_count: int
    deeper_count: int
    p_wider: float
    p_deeper: float
    deeper_quotas: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.wider_count < 0 or self.deeper_count < 0:
            raise ValidationError("allocation counts must be non-negative")
        if self.wider_count + self.deeper_count != self.n:
            raise ValidationError(
                f"wider ({self.wider_count}) + deeper ({self.deeper_count}) != n ({self.n})"
            )
        if abs(self.p_wider + self.p_deeper - 1.0) > 1e-12:
            raise ValidationError("p_wider + p_deeper must equal 1")
        quotas = dict(self.deeper_quotas)
        if any(q < 0 for q in quotas.values()):
            raise ValidationError("deeper quotas must be non-negative")
        if quotas and sum(quotas.values()) != self.deeper_count:
            raise ValidationError(
                f"deeper quotas sum to {sum(quotas.values())}, expected {self.deeper_count}"
            )
        object.__setattr__(self, "deeper_quotas", quotas)

    def with_quotas(self, quotas: Mapping[str, int]) -> "AllocationPlan":
        return AllocationPlan(self.n, self.wider_count, self.deeper_count, self.p_wider, self.p_deeper, quotas)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "wider_count": self.wider_count,
            "deeper_count": self.deeper_count,
            "p_wider": self.p_wider,
            "p_deeper": self.p_deeper,
            "deeper_quotas": dict(self.deeper_quotas),
        }


@dataclass(frozen=True)
class StepOutcome:
    step: int
    keyword_set: KeywordSet
    observed_kpis: Mapping[str, KpiRecord]
    group_kpi_wider: float = 0
    group_kpi_deeper: float = 0
    allocation: Optional[AllocationPlan] = None
    warnings: Tuple[str, ...] = ()

    def __post_init__(self):
        missing = [kw.surface for kw in self.keyword_set if kw.normalized not in self.observed_kpis]
        if missing:
            raise ValidationError(f"step {self.step}: no KPI record for {missing}")
        if self.group_kpi_wider < 0 or self.group_kpi_deeper < 0:
            raise ValidationError("group KPIs must be non-negative")
        object.__setattr__(self, "warnings", tuple(self.warnings))

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "allocation": self.allocation.to_dict() if self.allocation is not None else None,
            "keywords": [kw.to_dict() for kw in self.keyword_set],
            "kpis": {kw.normalized: self.observed_kpis[kw.normalized].to_dict() for kw in self.keyword_set},
            "group_kpi_wider": self.group_kpi_wider,
            "group_kpi_deeper": self.group_kpi_deeper,
            "warnings": list(self.warnings),
        }


@dataclass
class CategoryStats:
    members: List[str] = field(default_factory=list)
    kpi_total: float = 0


@dataclass
class CampaignState:
    """Mutable campaign ledger. Exactly one orchestrator loop may write to it."""

    config: CampaignConfig
    cumulative: Dict[str, Keyword] = field(default_factory=dict)
    categories: Dict[str, CategoryStats] = field(default_factory=dict)
    history: List[StepOutcome] = field(default_factory=list)
    t: int = 0

    def record_outcome(self, outcome: StepOutcome) -> None:
        """Fold a step's keywords and KPIs into the ledger. Rejects known keywords."""
        for kw in outcome.keyword_set:
            if kw.normalized in self.cumulative:
                raise InvalidKeyword(f"keyword already in campaign: {kw.surface!r}")
        metric = self.config.kpi_metric
        for kw in outcome.keyword_set:
            self.cumulative[kw.normalized] = kw
            stats = self.categories.setdefault(kw.category, CategoryStats())
            stats.members.append(kw.normalized)
            stats.kpi_total += selected_kpi(outcome.observed_kpis[kw.normalized], metric)
        self.history.append(outcome)

    def category_kpis(self) -> Dict[str, float]:
        return {name: stats.kpi_total for name, stats in self.categories.items()}

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "t": self.t,
            "cumulative": [
                {**kw.to_dict(), "step_introduced": kw.step_introduced} for kw in self.cumulative.values()
            ],
            "categories": {
                name: {"members": list(s.members), "kpi_total": s.kpi_total}
                for name, s in self.categories.items()
            },
            "history": [o.to_dict() for o in self.history],
        }
