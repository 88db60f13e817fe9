"""Closed-loop keyword generation for sponsored search campaigns.

The loop observes per-keyword KPIs each step, splits a fixed keyword
budget between new categories (wider) and proven ones (deeper), and
prompts a language model for the next keywords. A dataset replay KPI
source and evaluation metrics make the whole loop runnable offline.
"""

from .allocation import aggregate_group_kpi, assign_deeper_quotas, compute_split, plan_step
from .domain import (
    AllocationPlan,
    CampaignConfig,
    CampaignState,
    Keyword,
    KeywordSet,
    KpiMetric,
    KpiRecord,
    Origin,
    PolicyVariant,
    SearchContext,
    Snippet,
    StepOutcome,
    VariantKind,
    normalize_keyword,
    selected_kpi,
)
from .memory import MemoryRecord, MemoryStore
from .orchestrator import CampaignReport, Toolbox, enforce_plan, init_keywords, run_campaign, run_step
from .prompts import build_generation_prompt, parse_generation_response
from .simulator import ReplayKpiSource, load_dataset, match_keyword, normalize_kpi_table

__version__ = "0.1.0"
