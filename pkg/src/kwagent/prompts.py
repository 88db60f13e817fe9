"""Prompt rendering and model-response parsing for keyword generation."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

from .domain import AllocationPlan, CampaignState, SearchContext, clean_surface
from .errors import ParseError, SchemaError, ValidationError

# Machine-readable lines inside the prompt. Offline models key off these.
INITIAL_COUNT_MARKER = "initial_keyword_count: "
WIDER_COUNT_MARKER = "wider_keyword_count: "
DEEPER_COUNT_MARKER = "deeper_keyword_count: "
DEEPER_QUOTAS_MARKER = "deeper_quotas: "
CURRENT_KEYWORDS_MARKER = "current_keywords: "

PREAMBLE_TEMPLATE = "You are an expert at choosing Japanese sponsored search advertising keywords for {product}."

PLAN_PHASES = (
    "1. Market scan: read the live search results below and note current prices, discounts, product attributes and how people phrase their searches.",
    "2. Practice check: compare against keyword strategies that work for similar products; favour specific, relevant phrasing over generic terms.",
    "3. Performance review: study the current keywords grouped by category together with their observed performance and the related records from memory.",
    "4. Budget: respect the keyword counts in the allocation section exactly, both for new categories and for each existing category.",
    "5. Generation: write the new keywords. Do not repeat any keyword that already exists in the campaign.",
)

OUTPUT_INSTRUCTIONS = (
    "Answer with a single JSON object and nothing else. Each key is a category name and each value is an array "
    'of keyword strings, for example {"Category A": ["keyword 1", "keyword 2"]}. Use the exact names of '
    "existing categories when adding to them and new names for new categories."
)


@dataclass(frozen=True)
class GenerationPrompt:
    system_preamble: str
    plan_phases: Tuple[str, ...]
    context_block: str
    memory_block: str
    performance_block: str
    allocation_block: str
    output_schema_instructions: str = OUTPUT_INSTRUCTIONS

    def __post_init__(self):
        if len(self.plan_phases) != 5:
            raise ValidationError("a generation prompt has exactly five plan phases")

    def render(self) -> str:
        sections = [
            self.system_preamble,
            "Work through these phases in order:\n" + "\n".join(self.plan_phases),
            "## Live search results\n" + self.context_block,
            "## Current keywords and performance\n" + self.performance_block,
            "## Related records from memory\n" + self.memory_block,
            "## Allocation\n" + self.allocation_block,
            "## Output format\n" + self.output_schema_instructions,
        ]
        return "\n\n".join(sections) + "\n"


def _num(value) -> str:
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return repr(value) if isinstance(value, float) else str(value)


def render_context(context: SearchContext) -> str:
    if not context.snippets:
        return f"No live search results were found for the query: {context.query}"
    lines = [f"Query: {context.query}"]
    for snip in context.snippets:
        lines.append(f"- [{snip.source_id}] {' '.join(snip.text.split())}")
    return "\n".join(lines)


def render_memory(memory_hits: Sequence) -> str:
    """``memory_hits`` is a list of ``(MemoryRecord, cosine)``, most relevant first."""
    if not memory_hits:
        return "Memory is empty."
    lines = []
    for rank, (record, score) in enumerate(memory_hits, 1):
        k = record.kpis
        lines.append(
            f"{rank}. {record.keyword.surface} [{record.keyword.category}] step={record.step} "
            f"clicks={k.clicks} search_volume={k.search_volume} cpc={_num(k.cpc)} "
            f"competitor_score={_num(k.competitor_score)} similarity={score:.4f}"
        )
    return "\n".join(lines)


def render_performance(state: CampaignState) -> str:
    summary = {
        name: {
            "kpi": stats.kpi_total,
            "keywords": [state.cumulative[key].surface for key in stats.members],
        }
        for name, stats in state.categories.items()
    }
    metric = state.config.kpi_metric.value
    header = f"Per-category cumulative {metric} and member keywords:"
    return header + "\n" + CURRENT_KEYWORDS_MARKER + json.dumps(summary, ensure_ascii=False)


def render_allocation(plan: AllocationPlan) -> str:
    lines = [
        f"Keyword budget for this step: exactly {plan.n} new keywords.",
        f"{WIDER_COUNT_MARKER}{plan.wider_count}",
        f"{DEEPER_COUNT_MARKER}{plan.deeper_count}",
        DEEPER_QUOTAS_MARKER + json.dumps(dict(plan.deeper_quotas), ensure_ascii=False),
    ]
    if plan.wider_count:
        lines.append(
            f"- Wider: open categories that do not exist yet and give them {plan.wider_count} keywords in total."
        )
    else:
        lines.append("- Wider: do not open any new category in this step.")
    for name, quota in plan.deeper_quotas.items():
        if quota:
            lines.append(f'- Deeper: add exactly {quota} new keywords to the existing category "{name}".')
    return "\n".join(lines)


def build_generation_prompt(state: CampaignState, context: SearchContext, memory_hits: Sequence, plan: AllocationPlan) -> GenerationPrompt:
    """Assemble the step prompt. Pure: equal inputs give byte-identical renders."""
    return GenerationPrompt(
        system_preamble=PREAMBLE_TEMPLATE.format(product=state.config.product),
        plan_phases=PLAN_PHASES,
        context_block=render_context(context),
        memory_block=render_memory(memory_hits),
        performance_block=render_performance(state),
        allocation_block=render_allocation(plan),
    )


def build_initial_prompt(product: str, context: SearchContext, count: int) -> str:
    parts = [
        PREAMBLE_TEMPLATE.format(product=product),
        "Propose the first keywords for a new campaign. Group them into categories that each reflect a "
        "distinct product attribute or customer segment, using at least two categories when more than one "
        "keyword is requested.",
        "## Live search results\n" + render_context(context),
        "## Allocation\n" + f"{INITIAL_COUNT_MARKER}{count}\n- Propose exactly {count} keywords in total.",
        "## Output format\n" + OUTPUT_INSTRUCTIONS,
    ]
    return "\n\n".join(parts) + "\n"


def deficit_notice(deficit: int, accepted: Sequence) -> str:
    listed = ", ".join(f"{kw.surface} [{kw.category}]" for kw in accepted) or "none"
    return (
        f"\n## Correction\nThe previous answer fell {deficit} keywords short of the allocation after removing "
        f"duplicates and surplus entries. Already accepted this step: {listed}. Provide {deficit} further "
        "keywords that follow the remaining allocation and repeat nothing.\n"
    )


@dataclass(frozen=True)
class ParsedGeneration:
    by_category: Dict[str, List[str]] = field(default_factory=dict)

    def keyword_count(self) -> int:
        return sum(len(v) for v in self.by_category.values())


_DECODER = json.JSONDecoder()


def parse_generation_response(text: str) -> ParsedGeneration:
    """Pull the first JSON object out of a model reply and validate its shape.

    Surrounding prose and markdown fences are ignored. Keyword strings are
    trimmed; blank ones are dropped.
    """
    obj = None
    for match in re.finditer(r"\{", text):
        try:
            obj, _ = _DECODER.raw_decode(text, match.start())
        except json.JSONDecodeError:
            continue
        break
    if obj is None:
        raise ParseError("no JSON object found in model response")

    by_category: Dict[str, List[str]] = {}
    for name, values in obj.items():
        category = " ".join(name.split())
        if not category:
            raise SchemaError("category names must be non-empty")
        if not isinstance(values, list) or not all(isinstance(v, str) for v in values):
            raise SchemaError(f"category {name!r} must map to an array of strings")
        keywords = []
        for value in values:
            try:
                keywords.append(clean_surface(value))
            except ValidationError:
                continue
        by_category.setdefault(category, []).extend(keywords)
    return ParsedGeneration(by_category)
