"""Dataset-backed KPI source: nearest real keyword by embedding cosine.

A generated keyword inherits the KPIs of the most similar keyword in the
offline dataset, provided the cosine clears a strict threshold. Anything
below the threshold draws the zero record.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .domain import ZERO_KPI, Keyword, KpiRecord, normalize_keyword
from .errors import ValidationError

logger = logging.getLogger(__name__)

COLUMNS = ("product", "keyword", "search_volume", "clicks", "cpc", "competitor_score")
OPTIONAL_COLUMNS = ("conversions",)
MATCH_THRESHOLD = 0.6


@dataclass(frozen=True)
class DatasetRow:
    product: str
    keyword: str
    search_volume: int
    clicks: int
    cpc: float
    competitor_score: float
    conversions: int = 0

    @property
    def kpis(self) -> KpiRecord:
        return KpiRecord(self.clicks, self.search_volume, self.cpc, self.competitor_score, self.conversions)


def _parse_count(raw: str, name: str) -> int:
    value = float(raw)
    if not math.isfinite(value) or not value.is_integer():
        raise ValueError(f"{name} must be a whole number, got {raw!r}")
    if value < 0:
        raise ValueError(f"{name} must be >= 0, got {raw!r}")
    return int(value)


def _parse_real(raw: str, name: str, upper: Optional[float] = None) -> float:
    value = float(raw)
    if not math.isfinite(value) or value < 0:
        raise ValueError(f"{name} must be >= 0, got {raw!r}")
    if upper is not None and value > upper:
        raise ValueError(f"{name} must be <= {upper:g}, got {raw!r}")
    return value


def validate_dataset(path, column_map: Optional[Mapping[str, str]] = None) -> Tuple[List[DatasetRow], List[Tuple[int, str]]]:
    """Parse a dataset CSV, returning good rows and ``(line, message)`` issues.

    Without ``column_map`` the header must be exactly the canonical columns
    (optionally followed by ``conversions``). ``column_map`` maps canonical
    names to the file's own headers; extra columns are then ignored.
    """
    path = Path(path)
    issues: List[Tuple[int, str]] = []
    rows: List[DatasetRow] = []
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return [], [(1, "file is empty")]
        header = [h.strip() for h in header]
        if column_map:
            source = {name: column_map.get(name, name) for name in COLUMNS + OPTIONAL_COLUMNS}
            missing = [source[c] for c in COLUMNS if source[c] not in header]
        else:
            source = {name: name for name in COLUMNS + OPTIONAL_COLUMNS}
            allowed = (list(COLUMNS), list(COLUMNS) + list(OPTIONAL_COLUMNS))
            missing = [c for c in COLUMNS if c not in header]
            if not missing and header not in allowed:
                return [], [(1, f"header must be exactly {','.join(COLUMNS)}; got {','.join(header)}")]
        if missing:
            return [], [(1, f"missing column(s): {', '.join(missing)}")]
        index = {name: header.index(col) for name, col in source.items() if col in header}

        seen: Dict[Tuple[str, str], int] = {}
        for lineno, raw in enumerate(reader, 2):
            if not raw or all(not cell.strip() for cell in raw):
                continue
            if len(raw) != len(header):
                issues.append((lineno, f"expected {len(header)} fields, found {len(raw)}"))
                continue
            cell = {name: raw[i].strip() for name, i in index.items()}
            try:
                if not cell["keyword"]:
                    raise ValueError("keyword is empty")
                row = DatasetRow(
                    product=cell["product"],
                    keyword=cell["keyword"],
                    search_volume=_parse_count(cell["search_volume"], "search_volume"),
                    clicks=_parse_count(cell["clicks"], "clicks"),
                    cpc=_parse_real(cell["cpc"], "cpc"),
                    competitor_score=_parse_real(cell["competitor_score"], "competitor_score", 100.0),
                    conversions=_parse_count(cell["conversions"], "conversions") if cell.get("conversions") else 0,
                )
            except ValueError as exc:
                issues.append((lineno, str(exc)))
                continue
            key = (normalize_keyword(row.product) if row.product.strip() else "", normalize_keyword(row.keyword))
            if key in seen:
                issues.append((lineno, f"duplicate keyword {row.keyword!r} for product {row.product!r} (first on line {seen[key]})"))
                continue
            seen[key] = lineno
            rows.append(row)
    return rows, issues


def load_dataset(path, product_filter: Optional[str] = None, column_map: Optional[Mapping[str, str]] = None) -> List[DatasetRow]:
    """Load and validate a dataset; any bad row aborts with :class:`ValidationError`."""
    rows, issues = validate_dataset(path, column_map)
    if issues:
        line, message = issues[0]
        raise ValidationError(f"{path}:{line}: {message}", issues)
    if product_filter is not None:
        wanted = normalize_keyword(product_filter)
        rows = [r for r in rows if r.product.strip() and normalize_keyword(r.product) == wanted]
    return rows


def match_keyword(kw, rows: Sequence[DatasetRow], embedder, *, row_vectors=None, threshold: float = MATCH_THRESHOLD):
    """Best dataset row for ``kw`` as ``(row, cosine)``, or ``None`` below threshold.

    ``kw`` may be a :class:`Keyword` or a plain string. Ties go to the
    earlier row.
    """
    if not rows:
        raise ValidationError("match_keyword needs at least one dataset row")
    text = kw.surface if isinstance(kw, Keyword) else kw
    if row_vectors is None:
        row_vectors = np.vstack(embedder.embed([r.keyword for r in rows]))
    query = embedder.embed([text])[0]
    scores = row_vectors @ query
    best = int(np.argmax(scores))  # first maximum
    cosine = float(scores[best])
    if cosine > threshold:
        return rows[best], cosine
    return None


class ReplayKpiSource:
    """Replays dataset KPIs as if they came from a live ad platform.

    Optional seeded log-normal noise (``noise_sigma > 0``) scales clicks,
    search volume and CPC multiplicatively; it is off by default.
    """

    def __init__(self, rows: Sequence[DatasetRow], embedder, *, threshold: float = MATCH_THRESHOLD, noise_sigma: float = 0.0, seed: int = 0):
        if not rows:
            raise ValidationError("replay source needs a non-empty dataset")
        self.rows = list(rows)
        self.embedder = embedder
        self.threshold = threshold
        self.row_vectors = np.vstack(embedder.embed([r.keyword for r in self.rows]))
        self.row_vectors.setflags(write=False)
        self.noise_sigma = noise_sigma
        self._rng = np.random.default_rng(seed) if noise_sigma > 0 else None

    def match(self, kw):
        return match_keyword(kw, self.rows, self.embedder, row_vectors=self.row_vectors, threshold=self.threshold)

    def observe(self, keywords: Sequence[Keyword]) -> Dict[str, KpiRecord]:
        out: Dict[str, KpiRecord] = {}
        for kw in keywords:
            hit = self.match(kw)
            record = ZERO_KPI if hit is None else hit[0].kpis
            if self._rng is not None and hit is not None:
                record = self._perturb(record)
            out[kw.normalized] = record
        return out

    def _perturb(self, record: KpiRecord) -> KpiRecord:
        f_clicks, f_volume, f_cpc = np.exp(self._rng.normal(0.0, self.noise_sigma, size=3))
        return KpiRecord(
            clicks=int(round(record.clicks * f_clicks)),
            search_volume=int(round(record.search_volume * f_volume)),
            cpc=record.cpc * float(f_cpc),
            competitor_score=record.competitor_score,
            conversions=record.conversions,
        )


class LivePlatformKpiSource:
    """Integration point for a real ads platform. Not wired to any service.

    A working adapter must, for each step:

    1. upload the accepted keywords to the campaign's ad group (keyword
       create/mutate call of the platform API);
    2. wait for the delivery window to close;
    3. run a keyword performance report for the window, requesting clicks,
       impressions/search volume, average CPC and competition index;
    4. return one :class:`KpiRecord` per keyword, zero for keywords with
       no delivery.

    Credentials belong in the environment of the deployment, never in
    this repository.
    """

    def observe(self, keywords: Sequence[Keyword]) -> Dict[str, KpiRecord]:
        raise NotImplementedError("connect a platform client; see the class docstring for the required calls")


NORMALIZED_SCALES = {"clicks": 100.0, "search_volume": 100.0, "cpc": 1.0}


def aggregate_kpis(records: Sequence[KpiRecord]) -> Dict[str, float]:
    """Mean of each KPI over ``records`` (all zeros for an empty list)."""
    if not records:
        return {"clicks": 0.0, "search_volume": 0.0, "cpc": 0.0, "competitor_score": 0.0}
    n = len(records)
    return {
        "clicks": sum(r.clicks for r in records) / n,
        "search_volume": sum(r.search_volume for r in records) / n,
        "cpc": sum(r.cpc for r in records) / n,
        "competitor_score": sum(r.competitor_score for r in records) / n,
    }


def _field(record, name):
    return record[name] if isinstance(record, Mapping) else getattr(record, name)


def normalize_kpi_table(groups: Mapping[str, object]) -> Dict[str, Dict[str, float]]:
    """Max-scale clicks and volume to 0..100 and CPC to 0..1 across groups.

    Groups may be :class:`KpiRecord` objects or mappings with the KPI
    field names. Competitor score passes through unscaled. A column whose
    values are all zero stays zero.
    """
    if not groups:
        raise ValidationError("normalize_kpi_table needs at least one group")
    table: Dict[str, Dict[str, float]] = {name: {} for name in groups}
    for column, scale in NORMALIZED_SCALES.items():
        values = {name: float(_field(rec, column)) for name, rec in groups.items()}
        top = max(values.values())
        for name, value in values.items():
            # divide first: value / top is exactly 1.0 at the max, so the bound holds
            table[name][column] = value / top * scale if top > 0 else 0.0
    for name, rec in groups.items():
        table[name]["competitor_score"] = float(_field(rec, "competitor_score"))
    return table
