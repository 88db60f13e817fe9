"""Structural interfaces every backend satisfies."""

from __future__ import annotations

from typing import List, Mapping, Protocol, Sequence, runtime_checkable

import numpy as np

from ..domain import Keyword, KpiRecord, SearchContext


@runtime_checkable
class ChatModel(Protocol):
    def complete(self, prompt: str, temperature: float) -> str: ...


@runtime_checkable
class SearchProvider(Protocol):
    def search(self, query: str, max_results: int) -> SearchContext: ...


@runtime_checkable
class Embedder(Protocol):
    """Returns unit-norm vectors of a fixed dimension ``dim``; same text, same vector."""

    dim: int

    def embed(self, texts: Sequence[str]) -> List[np.ndarray]: ...


@runtime_checkable
class KpiSource(Protocol):
    """Total mapping: every keyword passed in gets a record, keyed by normalized form."""

    def observe(self, keywords: Sequence[Keyword]) -> Mapping[str, KpiRecord]: ...
