"""Long-term keyword memory: exact cosine recall and snapshots.

Run: python demos/02_memory.py
"""

import tempfile
from pathlib import Path

import numpy as np

from kwagent.domain import Keyword, KpiRecord, Origin
from kwagent.memory import MemoryRecord, MemoryStore
from kwagent.tools import HashEmbedder

# %% Store a handful of keywords with their observed KPIs.
embedder = HashEmbedder()
store = MemoryStore(embedder.dim)
history = [
    ("sony medical insurance", "Core Service", 0, 400),
    ("cancer insurance", "Illness Coverage", 1, 250),
    ("cancer insurance premium", "Illness Coverage", 2, 120),
    ("medical insurance online application", "Online Services", 2, 60),
    ("sony bank mortgage", "Other", 1, 5),
]
for surface, category, step, clicks in history:
    origin = Origin.INITIAL if step == 0 else Origin.WIDER
    vec = embedder.embed([surface])[0]
    store.add(MemoryRecord(Keyword(surface, category, origin, step), KpiRecord(clicks=clicks), step, vec))

# %% Recall the closest records for a new query.
query = embedder.embed(["insurance for cancer"])[0]
for record, score in store.query_top_k(query, 3):
    print(f"{score:.3f}  {record.keyword.surface:<40} clicks={record.kpis.clicks}")

# %% The search is a full scan, so it agrees with sorting every cosine by hand.
scores = np.array([r.embedding @ query for r in store.records])
print("brute-force order:", np.argsort(-scores, kind="stable")[:3].tolist())

# %% Snapshots are JSON lines and reload bit for bit.
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "memory.jsonl"
    store.snapshot(path)
    print(path.read_text().splitlines()[0])
    again = MemoryStore.load(path)
    same = all(np.array_equal(a.embedding, b.embedding) for a, b in zip(store.records, again.records))
    print("reloaded", len(again), "records, embeddings identical:", same)
