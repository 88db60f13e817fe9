import json

import numpy as np
import pytest

from kwagent.domain import Keyword, KpiRecord, Origin
from kwagent.errors import CorruptSnapshot, DimensionError, SnapshotVersionError, ValidationError
from kwagent.memory import MemoryRecord, MemoryStore


def unit(rng, d):
    v = rng.normal(size=d)
    return v / np.linalg.norm(v)


def make_record(i, vec, step=1):
    origin = Origin.INITIAL if step == 0 else Origin.WIDER
    return MemoryRecord(Keyword(f"kw {i}", f"cat {i % 3}", origin, step), KpiRecord(clicks=i, cpc=0.1 * i), step, vec)


def filled(n=50, d=16, seed=0):
    rng = np.random.default_rng(seed)
    store = MemoryStore(d)
    for i in range(n):
        store.add(make_record(i, unit(rng, d)))
    return store, rng


def brute_force(store, q, k):
    scored = [(float(rec.embedding @ q), i) for i, rec in enumerate(store.records)]
    scored.sort(key=lambda s: (-s[0], s[1]))
    return [i for _, i in scored[:k]]


@pytest.mark.parametrize("k", [1, 5, 50, 80])
def test_query_matches_brute_force(k):
    store, rng = filled()
    ids = {id(rec): i for i, rec in enumerate(store.records)}
    for _ in range(5):
        q = unit(rng, 16)
        got = [ids[id(rec)] for rec, _ in store.query_top_k(q, k)]
        assert got == brute_force(store, q, k)


def test_ties_keep_insertion_order():
    store = MemoryStore(2)
    v = np.array([1.0, 0.0])
    for i in range(4):
        store.add(make_record(i, v))
    assert [rec.kpis.clicks for rec, _ in store.query_top_k(v, 3)] == [0, 1, 2]


def test_empty_store_returns_nothing():
    assert MemoryStore(4).query_top_k(np.eye(4)[0], 3) == []


def test_dimension_checks():
    store = MemoryStore(4)
    with pytest.raises(DimensionError):
        store.add(make_record(0, np.eye(5)[0]))
    with pytest.raises(DimensionError):
        store.query_top_k(np.eye(3)[0], 1)
    with pytest.raises(ValidationError):
        store.query_top_k(np.eye(4)[0], 0)


def test_non_unit_embedding_rejected():
    with pytest.raises(ValidationError):
        make_record(0, np.array([1.0, 1.0]))


def test_snapshot_round_trip_is_exact(tmp_path):
    store, _ = filled(30)
    path = tmp_path / "mem.jsonl"
    store.snapshot(path)
    loaded = MemoryStore.load(path)
    assert loaded.dim == store.dim and len(loaded) == len(store)
    for a, b in zip(store.records, loaded.records):
        assert a.keyword == b.keyword and a.kpis == b.kpis and a.step == b.step
        assert np.array_equal(a.embedding, b.embedding)
    again = tmp_path / "again.jsonl"
    loaded.snapshot(again)
    assert again.read_bytes() == path.read_bytes()


def test_truncated_snapshot_is_corrupt(tmp_path):
    store, _ = filled(5)
    path = tmp_path / "mem.jsonl"
    store.snapshot(path)
    data = path.read_bytes()
    path.write_bytes(data[: len(data) // 2])
    with pytest.raises(CorruptSnapshot):
        MemoryStore.load(path)


def test_dropped_line_is_corrupt(tmp_path):
    store, _ = filled(5)
    path = tmp_path / "mem.jsonl"
    store.snapshot(path)
    lines = path.read_text().splitlines(keepends=True)
    path.write_text("".join(lines[:-1]))
    with pytest.raises(CorruptSnapshot):
        MemoryStore.load(path)


def test_unknown_version_rejected(tmp_path):
    path = tmp_path / "mem.jsonl"
    path.write_text(json.dumps({"version": 99, "dim": 4, "count": 0}) + "\n")
    with pytest.raises(SnapshotVersionError):
        MemoryStore.load(path)


def test_growth_keeps_all_rows():
    store, rng = filled(100, d=8)
    q = store.records[77].embedding
    rec, score = store.query_top_k(q, 1)[0]
    assert rec is store.records[77] and score == pytest.approx(1.0)
