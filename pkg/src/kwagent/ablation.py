"""Run one campaign per allocation policy on identical fixtures and compare."""

from __future__ import annotations

import logging
from typing import List, Sequence

from .config import RunConfig, build_embedder, build_toolbox
from .domain import Origin, PolicyVariant
from .errors import ValidationError
from .evaluation import similarity_to_offline
from .orchestrator import run_campaign
from .simulator import load_dataset

logger = logging.getLogger(__name__)

DEFAULT_VARIANTS = ("full_adaptive", "fixed_growth:0.5", "wide_only", "deep_only")


def dedupe_variants(variants: Sequence[PolicyVariant]) -> List[PolicyVariant]:
    out: List[PolicyVariant] = []
    for v in variants:
        if v in out:
            logger.warning("variant %s listed more than once; running it once", v.label)
            continue
        out.append(v)
    return out


def run_ablation(run: RunConfig, variants: Sequence[PolicyVariant]) -> dict:
    """Cumulative KPI and final offline similarity per variant.

    Every variant gets fresh tools built from the same config and seed,
    so the policy is the only difference between runs.
    """
    variants = dedupe_variants(variants)
    if len(variants) < 2:
        raise ValidationError("ablation needs at least two distinct variants")
    embedder = build_embedder(run)
    offline = [r.keyword for r in load_dataset(run.dataset, run.product_filter)]
    results = []
    for variant in variants:
        report = run_campaign(run.with_overrides(variant=variant).campaign, build_toolbox(run, embedder))
        generated = [kw.surface for o in report.outcomes for kw in o.keyword_set if kw.origin is not Origin.INITIAL]
        entry = {
            "variant": variant.label,
            "objective_total": report.objective_total,
            "keywords": len(generated),
            "categories": report.category_counts(),
        }
        if generated:
            entry.update(similarity_to_offline(generated, offline, embedder))
        results.append(entry)
    ranking = sorted(range(len(results)), key=lambda i: (-results[i]["objective_total"], i))
    return {
        "kpi_metric": run.campaign.kpi_metric.value,
        "variants": results,
        "ranking": [results[i]["variant"] for i in ranking],
    }


def render_ablation(data: dict) -> str:
    header = ["Variant", f"Total {data['kpi_metric']}", "Keywords", "BERTScore", "Jaccard", "Cosine"]
    rows = []
    for r in data["variants"]:
        rows.append([
            r["variant"],
            f"{r['objective_total']:g}",
            str(r["keywords"]),
            *(f"{r[k]:.2f}" if k in r else "-" for k in ("offline_bertscore", "jaccard", "cosine")),
        ])
    widths = [max(len(row[j]) for row in [header] + rows) for j in range(len(header))]
    lines = ["  ".join(c.ljust(widths[0]) if j == 0 else c.rjust(widths[j]) for j, c in enumerate(row)) for row in [header] + rows]
    lines.append("ranking: " + " > ".join(data["ranking"]))
    return "\n".join(lines)
