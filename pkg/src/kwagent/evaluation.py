"""Evaluation pipelines shared by the command line and library users."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence

from .errors import InvalidInput, ValidationError
from .metrics import MethodReport, comparison_json, evaluate_keywords, jaccard, set_cosine, greedy_embed_f1
from .simulator import DatasetRow, ReplayKpiSource, aggregate_kpis, normalize_kpi_table


def read_generated(path) -> Dict[str, List[str]]:
    """Read generated keywords as ``{method: [keywords]}``.

    Accepts a JSON object of method name to keyword array, a JSON array
    (method named after the file stem), or plain text with one keyword
    per line.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    stem = path.stem
    if path.suffix.lower() == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON ({exc})") from None
        if isinstance(data, list):
            data = {stem: data}
        if not isinstance(data, dict):
            raise ValidationError(f"{path}: expected a JSON object or array")
        methods = {}
        for name, kws in data.items():
            if not isinstance(kws, list) or not all(isinstance(k, str) for k in kws):
                raise ValidationError(f"{path}: {name!r} must map to an array of strings")
            methods[name] = [k.strip() for k in kws if k.strip()]
    else:
        methods = {stem: [line.strip() for line in text.splitlines() if line.strip()]}
    if not methods:
        raise ValidationError(f"{path}: no methods found")
    for name, kws in methods.items():
        if not kws:
            raise ValidationError(f"{path}: keyword list for {name!r} is empty")
    return methods


def evaluate_methods(methods: Mapping[str, Sequence[str]], rows: Sequence[DatasetRow], embedder, reference_text: Optional[str] = None) -> dict:
    """KPI, relevance and offline-similarity tables for each method.

    KPIs are the mean over keywords that found a dataset match; unmatched
    keywords are left out and counted under ``matched``.
    """
    if not methods:
        raise InvalidInput("no methods to evaluate")
    source = ReplayKpiSource(rows, embedder)
    offline = [r.keyword for r in rows]
    groups, matched, reports = {}, {}, []
    for name, keywords in methods.items():
        hits = [source.match(kw) for kw in keywords]
        records = [hit[0].kpis for hit in hits if hit is not None]
        groups[name] = aggregate_kpis(records)
        matched[name] = len(records)
        reports.append(evaluate_keywords(name, keywords, embedder, reference_text=reference_text, offline_keywords=offline))
    return {
        "kpi": normalize_kpi_table(groups),
        "kpi_raw": groups,
        "matched": matched,
        "comparison": comparison_json(reports),
    }


def reports_from_json(comparison: dict) -> List[MethodReport]:
    metrics = comparison["metrics"]
    return [
        MethodReport(method, **{name: values[i] for name, values in metrics.items()})
        for i, method in enumerate(comparison["methods"])
    ]


def similarity_to_offline(keywords: Sequence[str], offline: Sequence[str], embedder) -> dict:
    return {
        "offline_bertscore": greedy_embed_f1(list(keywords), list(offline), embedder)[2],
        "jaccard": jaccard(keywords, offline),
        "cosine": set_cosine(list(keywords), list(offline), embedder),
    }
