import json

import httpx
import numpy as np
import pytest

from kwagent.errors import AuthError, InvalidInput, ToolFailure, ToolSchemaError, ToolTimeout
from kwagent.tools import CatalogChatModel, FixtureSearch, HashEmbedder, ScriptedChatModel
from kwagent.tools.embedding import hash_embed
from kwagent.tools.remote import RemoteChatModel, RemoteEmbedder, RemoteSearch, TokenBucket


def test_hash_embed_is_unit_and_deterministic():
    a = hash_embed("sony medical insurance")
    b = hash_embed("Sony  Medical Insurance")
    assert a.shape == (256,)
    assert np.linalg.norm(a) == pytest.approx(1.0, abs=1e-12)
    assert np.array_equal(a, b)


def test_hash_embed_similar_text_scores_higher():
    base = hash_embed("cancer insurance")
    assert base @ hash_embed("cancer insurance plan") > base @ hash_embed("tv wall mount")


@pytest.mark.parametrize("text", ["", "   "])
def test_hash_embed_rejects_empty(text):
    with pytest.raises(InvalidInput):
        hash_embed(text)


def test_hash_embedder_dim_and_cache():
    emb = HashEmbedder(64)
    first = emb.embed(["a b"])[0]
    assert first.shape == (64,)
    assert emb.embed(["a b"])[0] is first
    with pytest.raises(InvalidInput):
        HashEmbedder(4)


def test_scripted_model_runs_out():
    model = ScriptedChatModel(["one"])
    assert model.complete("p", 0.1) == "one"
    with pytest.raises(ToolFailure):
        model.complete("p", 0.1)
    assert model.transcript == ["p"]


def test_fixture_search_dedupes_and_caps():
    search = FixtureSearch({"sony": ["a", {"source_id": "x", "text": "b"}], "bank": [{"source_id": "x", "text": "b"}, "c"]})
    ctx = search.search("Sony, bank", 10)
    assert [s.text for s in ctx.snippets] == ["a", "b", "c"]
    assert len(search.search("sony bank", 2).snippets) == 2
    assert search.search("nothing", 5).snippets == ()


def test_catalog_model_follows_allocation():
    model = CatalogChatModel({"A": ["a1", "a2", "a3"], "N": ["n1", "n2", "n3", "n4"], "M": ["m1"]}, {"A": ["a0"]}, per_new_category=2)
    assert json.loads(model.complete("initial_keyword_count: 1\n", 0)) == {"A": ["a0"]}
    prompt = (
        "wider_keyword_count: 3\n"
        'deeper_quotas: {"A": 2}\n'
        'current_keywords: {"A": {"kpi": 1, "keywords": ["a0", "a1"]}}\n'
    )
    assert json.loads(model.complete(prompt, 0)) == {"A": ["a2", "a3"], "N": ["n1", "n2"], "M": ["m1"]}


# remote adapters, exercised against an in-process transport


class Recorder:
    def __init__(self, *responses):
        self.responses = list(responses)
        self.requests = []

    def __call__(self, request):
        self.requests.append(request)
        status, body = self.responses.pop(0)
        if isinstance(body, Exception):
            raise body
        content = body if isinstance(body, bytes) else json.dumps(body).encode()
        return httpx.Response(status, content=content)


def _client(recorder):
    return httpx.Client(transport=httpx.MockTransport(recorder))


def _kwargs(recorder, sleeps=None):
    sleeps = [] if sleeps is None else sleeps
    return {"client": _client(recorder), "sleep": sleeps.append, "bucket": TokenBucket(burst=100, sleep=sleeps.append)}


@pytest.fixture(autouse=True)
def keys(monkeypatch):
    for name in ("OKG_CHAT_API_KEY", "OKG_SEARCH_API_KEY", "OKG_EMBED_API_KEY"):
        monkeypatch.setenv(name, "test-key")


CHAT_OK = {"choices": [{"message": {"content": '{"A": ["x"]}'}}]}


def test_chat_golden_payload():
    rec = Recorder((200, CHAT_OK))
    model = RemoteChatModel("https://chat.test/v1", model="m1", **_kwargs(rec))
    assert model.complete("hello", 0.1) == '{"A": ["x"]}'
    req = rec.requests[0]
    assert req.headers["authorization"] == "Bearer test-key"
    assert json.loads(req.content) == {"model": "m1", "messages": [{"role": "user", "content": "hello"}], "temperature": 0.1}
    assert len(model.audit) == 1 and model.audit[0]["status"] == 200


def test_missing_key_is_auth_error(monkeypatch):
    monkeypatch.delenv("OKG_CHAT_API_KEY")
    with pytest.raises(AuthError):
        RemoteChatModel("https://chat.test/v1")


@pytest.mark.parametrize("status", [401, 403])
def test_auth_rejection_not_retried(status):
    rec = Recorder((status, {}), (200, CHAT_OK))
    with pytest.raises(AuthError):
        RemoteChatModel("https://chat.test", **_kwargs(rec)).complete("p", 0)
    assert len(rec.requests) == 1


def test_rate_limit_then_success():
    sleeps = []
    rec = Recorder((429, {}), (200, CHAT_OK))
    assert RemoteChatModel("https://chat.test", **_kwargs(rec, sleeps)).complete("p", 0)
    assert len(rec.requests) == 2
    assert sleeps == [0.5]


def test_retries_exhausted_with_backoff():
    sleeps = []
    rec = Recorder((503, {}), (500, {}), (502, {}))
    with pytest.raises(ToolFailure) as info:
        RemoteChatModel("https://chat.test", **_kwargs(rec, sleeps)).complete("p", 0)
    assert info.value.retriable and info.value.status == 502
    assert sleeps == [0.5, 1.0]


def test_timeout_is_retried():
    rec = Recorder((0, httpx.ReadTimeout("slow")), (0, httpx.ReadTimeout("slow")), (0, httpx.ReadTimeout("slow")))
    with pytest.raises(ToolTimeout):
        RemoteChatModel("https://chat.test", **_kwargs(rec)).complete("p", 0)
    assert len(rec.requests) == 3


def test_client_error_not_retried():
    rec = Recorder((400, {}))
    with pytest.raises(ToolFailure) as info:
        RemoteChatModel("https://chat.test", **_kwargs(rec)).complete("p", 0)
    assert not info.value.retriable


@pytest.mark.parametrize("body", [b"not json", {"choices": []}])
def test_chat_schema_errors(body):
    with pytest.raises(ToolSchemaError):
        RemoteChatModel("https://chat.test", **_kwargs(Recorder((200, body)))).complete("p", 0)


def test_remote_search_parses_results():
    rec = Recorder((200, {"results": [{"source_id": "u1", "text": "Sony TV"}, {"source_id": "u2", "text": " "}]}))
    ctx = RemoteSearch("https://search.test", **_kwargs(rec)).search("sony", 5)
    assert [(s.source_id, s.text) for s in ctx.snippets] == [("u1", "Sony TV")]
    assert json.loads(rec.requests[0].content) == {"query": "sony", "max_results": 5}


def test_remote_embedder_renormalizes_and_checks_dim():
    rec = Recorder((200, {"data": [{"embedding": [3.0, 4.0]}]}), (200, {"data": [{"embedding": [1.0, 0.0, 0.0]}]}))
    emb = RemoteEmbedder("https://embed.test", 2, **_kwargs(rec))
    assert np.allclose(emb.embed(["x"])[0], [0.6, 0.8])
    with pytest.raises(ToolSchemaError):
        emb.embed(["x"])


def test_token_bucket_waits_when_empty():
    now = [0.0]
    sleeps = []

    def sleep(dt):
        sleeps.append(dt)
        now[0] += dt

    bucket = TokenBucket(burst=2, rate=4.0, clock=lambda: now[0], sleep=sleep)
    for _ in range(3):
        bucket.acquire()
    assert sleeps == [pytest.approx(0.25)]
