"""Deterministic offline stand-ins for the chat model and search provider."""

from __future__ import annotations

import json
import re
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Mapping, Sequence

from ..domain import SearchContext, Snippet, normalize_keyword
from ..errors import ToolFailure, ValidationError
from ..prompts import (
    CURRENT_KEYWORDS_MARKER,
    DEEPER_QUOTAS_MARKER,
    INITIAL_COUNT_MARKER,
    WIDER_COUNT_MARKER,
)

EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)
_TOKEN_SPLIT = re.compile(r"[\s,、，;]+")


class ScriptedChatModel:
    """Replays a fixed list of responses in call order.

    Every prompt is kept in ``transcript`` so tests can inspect what was
    sent. Running past the end of the script is a non-retriable failure.
    """

    def __init__(self, responses: Sequence[str]):
        self.responses = list(responses)
        self.transcript: List[str] = []

    @classmethod
    def from_file(cls, path) -> "ScriptedChatModel":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(data, list) or not all(isinstance(r, str) for r in data):
            raise ValidationError(f"{path}: chat script must be a JSON array of strings")
        return cls(data)

    def complete(self, prompt: str, temperature: float) -> str:
        index = len(self.transcript)
        if index >= len(self.responses):
            raise ToolFailure(f"chat script exhausted after {len(self.responses)} responses")
        self.transcript.append(prompt)
        return self.responses[index]


def _json_after(marker: str, prompt: str):
    for line in prompt.splitlines():
        if line.startswith(marker):
            return json.loads(line[len(marker) :])
    return None


def _int_after(marker: str, prompt: str):
    value = _json_after(marker, prompt)
    return None if value is None else int(value)


class CatalogChatModel:
    """A plan-following model over a fixed catalog of categories.

    The catalog lists, per category, the keywords a perfectly obedient
    model would propose in order. The mock reads the allocation and the
    current keyword set from the prompt, so its answer is a pure function
    of the prompt: new categories are opened in catalog order with up to
    ``per_new_category`` keywords each, and each existing category
    receives its next unused keywords up to the quota.

    Catalog file shape::

        {"per_new_category": 3,
         "initial": {"Category": ["kw", ...], ...},
         "categories": {"Category": ["kw", ...], ...}}
    """

    def __init__(self, categories: Mapping[str, Sequence[str]], initial: Mapping[str, Sequence[str]], per_new_category: int = 3):
        if per_new_category < 1:
            raise ValidationError("per_new_category must be >= 1")
        self.categories = {name: list(kws) for name, kws in categories.items()}
        self.initial = {name: list(kws) for name, kws in initial.items()}
        self.per_new_category = per_new_category
        self.transcript: List[str] = []

    @classmethod
    def from_file(cls, path) -> "CatalogChatModel":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        try:
            return cls(data["categories"], data["initial"], int(data.get("per_new_category", 3)))
        except (KeyError, TypeError, AttributeError) as exc:
            raise ValidationError(f"{path}: malformed catalog ({exc})") from None

    def complete(self, prompt: str, temperature: float) -> str:
        self.transcript.append(prompt)
        initial_count = _int_after(INITIAL_COUNT_MARKER, prompt)
        if initial_count is not None:
            return json.dumps(self._initial(initial_count), ensure_ascii=False)

        wider = _int_after(WIDER_COUNT_MARKER, prompt) or 0
        quotas = _json_after(DEEPER_QUOTAS_MARKER, prompt) or {}
        current = _json_after(CURRENT_KEYWORDS_MARKER, prompt) or {}
        used = {normalize_keyword(kw) for entry in current.values() for kw in entry.get("keywords", [])}

        out: Dict[str, List[str]] = {}
        for name, quota in quotas.items():
            fresh = [kw for kw in self.categories.get(name, []) if normalize_keyword(kw) not in used]
            if quota and fresh[:quota]:
                out[name] = fresh[:quota]
        remaining = wider
        for name, kws in self.categories.items():
            if remaining <= 0:
                break
            if name in current:
                continue
            take = [kw for kw in kws if normalize_keyword(kw) not in used][: min(self.per_new_category, remaining)]
            if take:
                out[name] = take
                remaining -= len(take)
        return json.dumps(out, ensure_ascii=False)

    def _initial(self, count):
        out: Dict[str, List[str]] = {}
        taken = 0
        depth = 0
        longest = max((len(v) for v in self.initial.values()), default=0)
        while taken < count and depth < longest:
            for name, kws in self.initial.items():
                if taken < count and depth < len(kws):
                    out.setdefault(name, []).append(kws[depth])
                    taken += 1
            depth += 1
        return out


def query_tokens(query: str) -> List[str]:
    try:
        text = normalize_keyword(query)
    except ValidationError:
        return []
    return [tok for tok in _TOKEN_SPLIT.split(text) if tok]


class FixtureSearch:
    """Search over a JSON corpus keyed by query token.

    Snippets for each query token are returned in token order, then in
    corpus order, deduplicated by source id. Entries may be plain strings
    or ``{"source_id": ..., "text": ...}`` objects.
    """

    def __init__(self, corpus: Mapping[str, Sequence], retrieved_at: datetime = EPOCH):
        self.retrieved_at = retrieved_at
        self.corpus: Dict[str, List[Snippet]] = {}
        for token, entries in corpus.items():
            snippets = []
            for i, entry in enumerate(entries):
                if isinstance(entry, str):
                    entry = {"source_id": f"{token}#{i}", "text": entry}
                snippets.append(Snippet(str(entry["source_id"]), str(entry["text"]), retrieved_at))
            self.corpus[normalize_keyword(token)] = snippets
        self.queries: List[str] = []

    @classmethod
    def from_file(cls, path) -> "FixtureSearch":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(data, dict):
            raise ValidationError(f"{path}: search corpus must be a JSON object")
        return cls(data)

    def search(self, query: str, max_results: int) -> SearchContext:
        self.queries.append(query)
        seen = set()
        hits = []
        for token in query_tokens(query):
            for snippet in self.corpus.get(token, []):
                if snippet.source_id not in seen:
                    seen.add(snippet.source_id)
                    hits.append(snippet)
        return SearchContext(query, tuple(hits[:max_results]))
