"""Keyword-list evaluation: BLEU-2, ROUGE-1, greedy embedding F1, Jaccard, set cosine."""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .domain import normalize_keyword
from .errors import InvalidInput, InvalidKeyword

_CJK = "぀-ヿㇰ-ㇿ㐀-䶿一-鿿豈-﫿가-힯ｦ-ﾟ"
_PIECES = re.compile(f"[{_CJK}]|[^{_CJK}]+")


def tokenize(text: str) -> List[str]:
    """Normalize, split on whitespace, and split CJK runs into single characters."""
    try:
        norm = normalize_keyword(text)
    except InvalidKeyword:
        return []
    tokens = []
    for word in norm.split(" "):
        tokens.extend(_PIECES.findall(word))
    return tokens


def linearize(keywords: Iterable[str]) -> List[str]:
    """Keyword list to one token sequence, in list order."""
    out: List[str] = []
    for kw in keywords:
        out.extend(tokenize(kw))
    return out


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu2(candidate: Sequence[str], reference: Sequence[str]) -> float:
    """Sentence BLEU with up to bigrams, uniform weights and brevity penalty.

    A zero bigram match count is smoothed to ``1 / (bigrams + 1)``. A
    one-token candidate has no bigrams and is scored on unigram precision
    and brevity penalty alone.
    """
    if not candidate or not reference:
        raise InvalidInput("bleu2 needs non-empty candidate and reference")
    c, r = len(candidate), len(reference)
    brevity = 1.0 if c > r else math.exp(1.0 - r / c)

    cand1, ref1 = _ngrams(candidate, 1), _ngrams(reference, 1)
    p1 = sum(min(k, ref1[g]) for g, k in cand1.items()) / c
    if p1 == 0.0:
        return 0.0
    if c == 1:
        return brevity * p1

    cand2, ref2 = _ngrams(candidate, 2), _ngrams(reference, 2)
    total2 = c - 1
    match2 = sum(min(k, ref2[g]) for g, k in cand2.items())
    p2 = match2 / total2 if match2 else 1.0 / (total2 + 1)
    return brevity * math.sqrt(p1 * p2)


def rouge1_recall(candidate: Sequence[str], reference: Sequence[str]) -> float:
    """Clipped unigram overlap divided by reference length."""
    if not reference:
        raise InvalidInput("rouge1_recall needs a non-empty reference")
    cand, ref = Counter(candidate), Counter(reference)
    return sum(min(k, cand[g]) for g, k in ref.items()) / len(reference)


def _unit_rows(texts: Sequence[str], embedder) -> np.ndarray:
    return np.vstack(embedder.embed(list(texts)))


def greedy_embed_f1(candidates: Sequence[str], references: Sequence[str], embedder) -> Tuple[float, float, float]:
    """Greedy-match precision, recall and F1 over token (or keyword) embeddings.

    No baseline rescaling. F1 is 0 when precision + recall <= 0.
    """
    if not candidates or not references:
        raise InvalidInput("greedy_embed_f1 needs non-empty candidate and reference lists")
    sims = _unit_rows(candidates, embedder) @ _unit_rows(references, embedder).T
    precision = float(sims.max(axis=1).mean())
    recall = float(sims.max(axis=0).mean())
    denom = precision + recall
    f1 = 2 * precision * recall / denom if denom > 0 else 0.0
    return precision, recall, f1


def _keyword_set(items: Iterable[str]) -> set:
    out = set()
    for item in items:
        try:
            out.add(normalize_keyword(item))
        except InvalidKeyword:
            continue
    return out


def jaccard(a: Iterable[str], b: Iterable[str]) -> float:
    sa, sb = _keyword_set(a), _keyword_set(b)
    if not sa and not sb:
        return 1.0
    return len(sa & sb) / len(sa | sb)


def set_cosine(a: Sequence[str], b: Sequence[str], embedder) -> float:
    """Cosine between the normalized mean embeddings of two keyword sets."""
    if not a or not b:
        raise InvalidInput("set_cosine needs two non-empty keyword sets")
    ma = _unit_rows(a, embedder).mean(axis=0)
    mb = _unit_rows(b, embedder).mean(axis=0)
    na, nb = np.linalg.norm(ma), np.linalg.norm(mb)
    if na == 0 or nb == 0:
        return 0.0
    return float(np.clip((ma / na) @ (mb / nb), -1.0, 1.0))


RELEVANCE_COLUMNS = ("relevance_bertscore", "bleu2", "rouge1")
SIMILARITY_COLUMNS = ("offline_bertscore", "jaccard", "cosine")
COLUMN_TITLES = {
    "relevance_bertscore": "BERTScore",
    "bleu2": "BLEU-2",
    "rouge1": "ROUGE-1",
    "offline_bertscore": "BERTScore",
    "jaccard": "Jaccard",
    "cosine": "Cosine",
}


@dataclass(frozen=True)
class MethodReport:
    """Metric values of one keyword-generation method."""

    method: str
    relevance_bertscore: Optional[float] = None
    bleu2: Optional[float] = None
    rouge1: Optional[float] = None
    offline_bertscore: Optional[float] = None
    jaccard: Optional[float] = None
    cosine: Optional[float] = None


def evaluate_keywords(method: str, keywords: Sequence[str], embedder, *, reference_text: Optional[str] = None, offline_keywords: Optional[Sequence[str]] = None) -> MethodReport:
    """Score a keyword list against search-result text and/or offline keywords."""
    if not keywords:
        raise InvalidInput(f"{method}: keyword list is empty")
    values: Dict[str, float] = {}
    if reference_text is not None:
        cand, ref = linearize(keywords), tokenize(reference_text)
        if not cand or not ref:
            raise InvalidInput(f"{method}: nothing to compare after tokenization")
        values["relevance_bertscore"] = greedy_embed_f1(cand, ref, embedder)[2]
        values["bleu2"] = bleu2(cand, ref)
        values["rouge1"] = rouge1_recall(cand, ref)
    if offline_keywords is not None:
        if not offline_keywords:
            raise InvalidInput("offline keyword list is empty")
        values["offline_bertscore"] = greedy_embed_f1(list(keywords), list(offline_keywords), embedder)[2]
        values["jaccard"] = jaccard(keywords, offline_keywords)
        values["cosine"] = set_cosine(list(keywords), list(offline_keywords), embedder)
    return MethodReport(method, **values)


def round_half_even(value: float, places: int = 2) -> str:
    return str(Decimal(repr(value)).quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_EVEN))


def comparison_json(reports: Sequence[MethodReport]) -> dict:
    """Machine form: ``{"methods": [...], "metrics": {name: [values]}}`` with raw values."""
    if not reports:
        raise InvalidInput("no reports to compare")
    columns = [c for c in RELEVANCE_COLUMNS + SIMILARITY_COLUMNS if any(getattr(r, c) is not None for r in reports)]
    return {
        "methods": [r.method for r in reports],
        "metrics": {c: [getattr(r, c) for r in reports] for c in columns},
    }


def render_comparison(reports: Sequence[MethodReport]) -> str:
    """Aligned text table; rows in input order, values rounded half-even to 2 places."""
    data = comparison_json(reports)
    relevance = [c for c in RELEVANCE_COLUMNS if c in data["metrics"]]
    similarity = [c for c in SIMILARITY_COLUMNS if c in data["metrics"]]
    header = ["Method"]
    groups = []
    if relevance:
        header += [COLUMN_TITLES[c] for c in relevance]
        groups.append(("Relevance / Coverage", len(relevance)))
    if similarity:
        header += [COLUMN_TITLES[c] for c in similarity]
        groups.append(("Offline similarity", len(similarity)))
    rows = []
    for i, method in enumerate(data["methods"]):
        row = [method]
        for c in relevance + similarity:
            value = data["metrics"][c][i]
            row.append("-" if value is None else round_half_even(value))
        rows.append(row)
    widths = [max(len(str(r[j])) for r in [header] + rows) for j in range(len(header))]
    fmt = lambda cells: "  ".join(str(cell).ljust(widths[0]) if j == 0 else str(cell).rjust(widths[j]) for j, cell in enumerate(cells))
    lines = [" | ".join(f"{title} ({count} cols)" for title, count in groups), fmt(header), fmt(["-" * w for w in widths])]
    lines += [fmt(r) for r in rows]
    return "\n".join(lines)


def render_kpi_table(table: Mapping[str, Mapping[str, float]]) -> str:
    header = ["Method", "N.Click", "N.SrchVol", "N.CPC", "CompScore"]
    rows = [
        [name, round_half_even(v["clicks"], 1), round_half_even(v["search_volume"], 1), round_half_even(v["cpc"]), round_half_even(v["competitor_score"], 0)]
        for name, v in table.items()
    ]
    widths = [max(len(r[j]) for r in [header] + rows) for j in range(len(header))]
    return "\n".join(
        "  ".join(cell.ljust(widths[0]) if j == 0 else cell.rjust(widths[j]) for j, cell in enumerate(r))
        for r in [header] + rows
    )


def dumps(data) -> str:
    return json.dumps(data, ensure_ascii=False, indent=2)
