"""Long-term keyword memory: exact cosine retrieval plus JSON-lines snapshots."""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple

import numpy as np

from .domain import Keyword, KpiRecord, Origin
from .errors import CorruptSnapshot, DimensionError, SnapshotVersionError, ValidationError

SNAPSHOT_VERSION = 1
UNIT_NORM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class MemoryRecord:
    keyword: Keyword
    kpis: KpiRecord
    step: int
    embedding: np.ndarray

    def __post_init__(self):
        vec = np.array(self.embedding, dtype=np.float64)
        if vec.ndim != 1:
            raise DimensionError("embedding must be a 1-D vector")
        if abs(float(np.linalg.norm(vec)) - 1.0) > UNIT_NORM_TOL:
            raise ValidationError("embedding must have unit L2 norm")
        vec.setflags(write=False)
        object.__setattr__(self, "embedding", vec)

    def to_json(self, record_id: int) -> dict:
        kw = self.keyword
        return {
            "id": record_id,
            "keyword": {
                "surface": kw.surface,
                "category": kw.category,
                "origin": kw.origin.value,
                "step_introduced": kw.step_introduced,
            },
            "kpis": {**self.kpis.to_dict(), "conversions": self.kpis.conversions},
            "step": self.step,
            # repr floats round-trip float64 exactly
            "embedding": [float(x) for x in self.embedding],
        }

    @classmethod
    def from_json(cls, data: dict) -> "MemoryRecord":
        kw = data["keyword"]
        return cls(
            Keyword(kw["surface"], kw["category"], Origin(kw["origin"]), int(kw["step_introduced"])),
            KpiRecord(**data["kpis"]),
            int(data["step"]),
            np.asarray(data["embedding"], dtype=np.float64),
        )


class MemoryStore:
    """Flat, exact vector store.

    Record ids are insertion indices. Reads may run concurrently; writes
    are serialized by an internal lock.
    """

    def __init__(self, dim: int):
        if dim < 1:
            raise DimensionError(f"dimension must be positive, got {dim}")
        self.dim = dim
        self._records: List[MemoryRecord] = []
        self._matrix = np.zeros((0, dim))
        self._lock = threading.Lock()

    def __len__(self):
        return len(self._records)

    @property
    def records(self) -> Tuple[MemoryRecord, ...]:
        return tuple(self._records)

    def add(self, record: MemoryRecord) -> int:
        if record.embedding.shape != (self.dim,):
            raise DimensionError(f"record has dimension {record.embedding.shape[0]}, store expects {self.dim}")
        with self._lock:
            n = len(self._records)
            if n == self._matrix.shape[0]:
                grown = np.zeros((max(16, 2 * n), self.dim))
                grown[:n] = self._matrix[:n]
                self._matrix = grown
            self._matrix[n] = record.embedding
            self._records.append(record)
            return n

    def query_top_k(self, query_vector, k: int) -> List[Tuple[MemoryRecord, float]]:
        """Top ``k`` records by cosine, descending; equal scores keep insertion order."""
        if k < 1:
            raise ValidationError(f"k must be >= 1, got {k}")
        q = np.asarray(query_vector, dtype=np.float64)
        if q.shape != (self.dim,):
            raise DimensionError(f"query has shape {q.shape}, store expects ({self.dim},)")
        records = tuple(self._records)
        if not records:
            return []
        scores = self._matrix[: len(records)] @ q
        # lexsort: last key is primary
        order = np.lexsort((np.arange(len(records)), -scores))[:k]
        return [(records[i], float(scores[i])) for i in order]

    def snapshot(self, path) -> None:
        path = Path(path)
        lines = [json.dumps({"version": SNAPSHOT_VERSION, "dim": self.dim, "count": len(self._records)})]
        lines += [json.dumps(rec.to_json(i), ensure_ascii=False) for i, rec in enumerate(self._records)]
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text("\n".join(lines) + "\n", encoding="utf-8")
        tmp.replace(path)

    @classmethod
    def load(cls, path) -> "MemoryStore":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except UnicodeDecodeError as exc:
            raise CorruptSnapshot(f"{path}: not UTF-8 ({exc})") from None
        lines = text.split("\n")
        if not text.endswith("\n"):
            raise CorruptSnapshot(f"{path}: truncated (missing final newline)")
        lines = lines[:-1]
        if not lines:
            raise CorruptSnapshot(f"{path}: empty file")
        try:
            header = json.loads(lines[0])
        except json.JSONDecodeError:
            raise CorruptSnapshot(f"{path}: unreadable header") from None
        if not isinstance(header, dict) or "version" not in header or "dim" not in header:
            raise CorruptSnapshot(f"{path}: header lacks version/dim")
        if header["version"] != SNAPSHOT_VERSION:
            raise SnapshotVersionError(f"{path}: snapshot version {header['version']!r}, expected {SNAPSHOT_VERSION}")
        store = cls(int(header["dim"]))
        body = lines[1:]
        if "count" in header and header["count"] != len(body):
            raise CorruptSnapshot(f"{path}: header promises {header['count']} records, found {len(body)}")
        for lineno, line in enumerate(body, 2):
            try:
                data = json.loads(line)
                record = MemoryRecord.from_json(data)
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise CorruptSnapshot(f"{path}:{lineno}: bad record ({exc})") from None
            if data.get("id") != lineno - 2:
                raise CorruptSnapshot(f"{path}:{lineno}: id {data.get('id')!r} out of sequence")
            store.add(record)
        return store
