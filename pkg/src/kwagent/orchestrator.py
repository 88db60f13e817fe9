"""The closed keyword-generation loop.

One campaign runs an initialization step followed by ``horizon_T``
generation steps. Each generation step searches for fresh context,
recalls related keywords from memory, splits the keyword budget between
new and existing categories, asks the model for keywords, enforces the
split, observes KPIs and writes everything back to memory.
"""

from __future__ import annotations

import copy
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .allocation import aggregate_group_kpi, plan_step
from .domain import (
    AllocationPlan,
    CampaignConfig,
    CampaignState,
    Keyword,
    KeywordSet,
    Origin,
    StepOutcome,
    normalize_keyword,
    selected_kpi,
)
from .errors import GenerationFailure, InvalidKeyword, ParseError, SchemaError, ToolFailure, ValidationError
from .memory import MemoryRecord, MemoryStore
from .prompts import (
    ParsedGeneration,
    build_generation_prompt,
    build_initial_prompt,
    deficit_notice,
    parse_generation_response,
)
from .tools.base import ChatModel, Embedder, KpiSource, SearchProvider

logger = logging.getLogger(__name__)

SEARCH_TOP_KEYWORDS = 3


@dataclass
class Toolbox:
    model: ChatModel
    search: SearchProvider
    embedder: Embedder
    memory: MemoryStore
    kpi_source: KpiSource

    def audit_log(self) -> List[dict]:
        entries = []
        for name in ("model", "search", "embedder"):
            for item in getattr(getattr(self, name), "audit", None) or []:
                entries.append({"tool": name, **item})
        return entries


def _pick_initial(parsed: ParsedGeneration, count: int) -> List[Tuple[str, str]]:
    """Round-robin over categories so truncation keeps the categories distinct."""
    seen = set()
    columns: Dict[str, List[str]] = {}
    for category, keywords in parsed.by_category.items():
        for surface in keywords:
            key = normalize_keyword(surface)
            if key not in seen:
                seen.add(key)
                columns.setdefault(category, []).append(surface)
    chosen: Dict[str, List[str]] = {}
    taken = depth = 0
    while taken < count and any(depth < len(v) for v in columns.values()):
        for category, keywords in columns.items():
            if taken < count and depth < len(keywords):
                chosen.setdefault(category, []).append(keywords[depth])
                taken += 1
        depth += 1
    return [(cat, kw) for cat in columns if cat in chosen for kw in chosen[cat]]


def init_keywords(config: CampaignConfig, model: ChatModel, search: SearchProvider) -> KeywordSet:
    """Ask the model for the seed keywords spanning distinct product attributes."""
    context = search.search(config.product, config.search_results)
    prompt = build_initial_prompt(config.product, context, config.initial_count)
    problem = "no attempt made"
    for attempt in range(config.retry_limit + 1):
        text = model.complete(prompt if attempt == 0 else prompt + f"\n## Correction\n{problem}\n", config.temperature)
        try:
            parsed = parse_generation_response(text)
        except (ParseError, SchemaError) as exc:
            problem = f"The previous answer was unusable: {exc}."
            continue
        picked = _pick_initial(parsed, config.initial_count)
        categories = {cat for cat, _ in picked}
        if len(picked) < config.initial_count:
            problem = f"The previous answer held {len(picked)} distinct keywords; {config.initial_count} are needed."
        elif config.initial_count >= 2 and len(categories) < 2:
            problem = "The previous answer used a single category; use at least two."
        else:
            return KeywordSet(0, [Keyword(kw, cat, Origin.INITIAL, 0) for cat, kw in picked])
        logger.warning("initial keywords rejected (attempt %d): %s", attempt + 1, problem)
    raise GenerationFailure(f"no usable initial keyword set after {config.retry_limit + 1} attempts: {problem}")


def enforce_plan(parsed: ParsedGeneration, plan: AllocationPlan, state: CampaignState, accepted: Sequence[Keyword] = ()) -> Tuple[List[Keyword], int]:
    """Tag, deduplicate and trim a parsed reply to fit the allocation plan.

    ``accepted`` holds keywords already taken earlier in the same step (on
    a retry); they count against the budget and as duplicates. Returns the
    newly accepted keywords and the remaining deficit against ``plan.n``.
    """
    step = state.t + 1
    existing = {normalize_keyword(name): name for name in state.categories}
    opened = {normalize_keyword(kw.category): kw.category for kw in accepted if kw.origin is Origin.WIDER}
    seen = set(state.cumulative) | {kw.normalized for kw in accepted}
    wider_left = plan.wider_count - sum(1 for kw in accepted if kw.origin is Origin.WIDER)
    deeper_used = Counter(kw.category for kw in accepted if kw.origin is Origin.DEEPER)
    quota_left = {name: q - deeper_used[name] for name, q in plan.deeper_quotas.items()}

    fresh: List[Keyword] = []
    for raw_category, surfaces in parsed.by_category.items():
        key = normalize_keyword(raw_category)
        if key in existing:
            category, origin = existing[key], Origin.DEEPER
        else:
            category = opened.setdefault(key, raw_category)
            origin = Origin.WIDER
        for surface in surfaces:
            try:
                kw = Keyword(surface, category, origin, step)
            except InvalidKeyword:
                continue
            if kw.normalized in seen:
                continue
            if origin is Origin.DEEPER:
                if quota_left.get(category, 0) <= 0:
                    break
                quota_left[category] -= 1
            else:
                if wider_left <= 0:
                    break
                wider_left -= 1
            seen.add(kw.normalized)
            fresh.append(kw)
    deficit = plan.n - len(accepted) - len(fresh)
    return fresh, max(deficit, 0)


def search_query(config: CampaignConfig, memory: MemoryStore) -> str:
    """Product descriptor followed by the best-performing remembered keywords."""
    ranked = sorted(
        enumerate(memory.records),
        key=lambda item: (-selected_kpi(item[1].kpis, config.kpi_metric), item[0]),
    )
    top = [rec.keyword.surface for _, rec in ranked[:SEARCH_TOP_KEYWORDS]]
    return ", ".join([config.product] + top)


def _observe(kpi_source: KpiSource, keywords: Sequence[Keyword]):
    kpis = dict(kpi_source.observe(list(keywords)))
    missing = [kw.surface for kw in keywords if kw.normalized not in kpis]
    if missing:
        raise ToolFailure(f"KPI source returned no record for {missing}")
    return {kw.normalized: kpis[kw.normalized] for kw in keywords}


def _memory_records(tools: Toolbox, keywords: Sequence[Keyword], kpis, step: int) -> List[MemoryRecord]:
    if not keywords:
        return []
    vectors = tools.embedder.embed([kw.surface for kw in keywords])
    return [MemoryRecord(kw, kpis[kw.normalized], step, vec) for kw, vec in zip(keywords, vectors)]


def initialize_state(config: CampaignConfig, tools: Toolbox) -> CampaignState:
    """Create the step-0 state: seed keywords, their KPIs, and memory entries."""
    keyword_set = init_keywords(config, tools.model, tools.search)
    kpis = _observe(tools.kpi_source, keyword_set.keywords)
    records = _memory_records(tools, keyword_set.keywords, kpis, 0)
    state = CampaignState(config)
    state.record_outcome(StepOutcome(0, keyword_set, kpis, 0, 0))
    for rec in records:
        tools.memory.add(rec)
    return state


def run_step(state: CampaignState, tools: Toolbox) -> Tuple[CampaignState, StepOutcome]:
    """Advance the campaign by one step.

    The input state is never modified; a new state is returned. Any tool
    failure propagates before memory or state is touched, so a failed step
    leaves both exactly as they were.
    """
    config = state.config
    if not state.history:
        raise ValidationError("campaign has not been initialized")
    if state.t >= config.horizon_T:
        raise ValidationError(f"campaign already reached its horizon ({config.horizon_T})")
    step = state.t + 1
    metric = config.kpi_metric

    context = tools.search.search(search_query(config, tools.memory), config.search_results)
    query_vec = tools.embedder.embed([config.product])[0]
    memory_hits = tools.memory.query_top_k(query_vec, config.memory_k)

    wider_kpi, deeper_kpi = aggregate_group_kpi(state.history[-1], metric)
    plan = plan_step(wider_kpi, deeper_kpi, config.per_step_n, config.variant, state.category_kpis())
    prompt = build_generation_prompt(state, context, memory_hits, plan).render()

    accepted: List[Keyword] = []
    warnings: List[str] = []
    deficit = plan.n
    for attempt in range(config.retry_limit + 1):
        text = tools.model.complete(prompt if attempt == 0 else prompt + deficit_notice(deficit, accepted), config.temperature)
        try:
            parsed = parse_generation_response(text)
        except (ParseError, SchemaError) as exc:
            warnings.append(f"attempt {attempt + 1}: unusable reply ({exc})")
            continue
        fresh, deficit = enforce_plan(parsed, plan, state, accepted)
        accepted.extend(fresh)
        if deficit == 0:
            break
    if deficit:
        warnings.append(f"accepted {len(accepted)} of {plan.n} keywords after {config.retry_limit + 1} attempt(s)")
        logger.warning("step %d: %s", step, warnings[-1])

    kpis = _observe(tools.kpi_source, accepted)
    records = _memory_records(tools, accepted, kpis, step)

    wider = sum(selected_kpi(kpis[kw.normalized], metric) for kw in accepted if kw.origin is Origin.WIDER)
    deeper = sum(selected_kpi(kpis[kw.normalized], metric) for kw in accepted if kw.origin is Origin.DEEPER)
    outcome = StepOutcome(step, KeywordSet(step, accepted), kpis, wider, deeper, plan, tuple(warnings))

    new_state = copy.deepcopy(state)
    new_state.record_outcome(outcome)
    new_state.t = step
    for rec in records:
        tools.memory.add(rec)
    return new_state, outcome


@dataclass
class CampaignReport:
    state: Optional[CampaignState]
    complete: bool = True
    audit: List[dict] = field(default_factory=list)

    @property
    def outcomes(self) -> List[StepOutcome]:
        return list(self.state.history) if self.state else []

    @property
    def objective_total(self):
        """Sum of the selected KPI over every generated (non-initial) keyword."""
        return sum(o.group_kpi_wider + o.group_kpi_deeper for o in self.outcomes if o.step >= 1)

    def category_counts(self) -> List[int]:
        """Number of categories after each step, step 0 first."""
        counts, seen = [], set()
        for outcome in self.outcomes:
            seen.update(kw.category for kw in outcome.keyword_set)
            counts.append(len(seen))
        return counts

    def to_dict(self) -> dict:
        data = {
            "config": self.state.config.to_dict() if self.state else None,
            "steps": [o.to_dict() for o in self.outcomes],
            "objective_total": self.objective_total,
            "complete": self.complete,
        }
        if self.audit:
            data["audit"] = self.audit
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2) + "\n"


def run_campaign(config: CampaignConfig, tools: Toolbox) -> CampaignReport:
    """Initialize, then run ``horizon_T`` steps. A tool failure carries the partial report."""
    state: Optional[CampaignState] = None
    try:
        state = initialize_state(config, tools)
        while state.t < config.horizon_T:
            state, _ = run_step(state, tools)
    except ToolFailure as exc:
        exc.report = CampaignReport(state, complete=False, audit=tools.audit_log())
        raise
    return CampaignReport(state, audit=tools.audit_log())
