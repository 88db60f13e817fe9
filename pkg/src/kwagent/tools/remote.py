"""Thin JSON-over-HTTP adapters for hosted chat, search and embedding services."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from datetime import datetime, timezone
from typing import Callable, List, Optional, Sequence

import httpx
import numpy as np

from ..domain import SearchContext, Snippet
from ..errors import AuthError, ToolFailure, ToolSchemaError, ToolTimeout

logger = logging.getLogger(__name__)

CHAT_KEY_ENV = "OKG_CHAT_API_KEY"
SEARCH_KEY_ENV = "OKG_SEARCH_API_KEY"
EMBED_KEY_ENV = "OKG_EMBED_API_KEY"


class TokenBucket:
    """Blocking token bucket: ``burst`` tokens, refilled at ``rate`` per second."""

    def __init__(self, burst: int = 5, rate: float = 1.0, clock: Callable[[], float] = time.monotonic, sleep: Callable[[float], None] = time.sleep):
        self.burst = burst
        self.rate = rate
        self._clock = clock
        self._sleep = sleep
        self._tokens = float(burst)
        self._last = clock()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = self._clock()
                self._tokens = min(self.burst, self._tokens + (now - self._last) * self.rate)
                self._last = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) / self.rate
            self._sleep(wait)


def _digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


class _HttpTool:
    def __init__(
        self,
        url: str,
        key_env: str,
        *,
        timeout: float = 30.0,
        attempts: int = 3,
        backoff: float = 0.5,
        client: Optional[httpx.Client] = None,
        sleep: Callable[[float], None] = time.sleep,
        bucket: Optional[TokenBucket] = None,
    ):
        api_key = os.environ.get(key_env)
        if not api_key:
            raise AuthError(f"{key_env} is not set")
        self.url = url
        self.attempts = attempts
        self.backoff = backoff
        self._headers = {"Authorization": f"Bearer {api_key}"}
        self._client = client or httpx.Client(timeout=timeout)
        self._sleep = sleep
        self._bucket = bucket or TokenBucket(sleep=sleep)
        self.audit: List[dict] = []

    def _post(self, payload: dict) -> dict:
        body = json.dumps(payload, ensure_ascii=False, sort_keys=True).encode("utf-8")
        last_error: ToolFailure = ToolFailure("no attempt made")
        for attempt in range(self.attempts):
            self._bucket.acquire()
            try:
                resp = self._client.post(self.url, content=body, headers={**self._headers, "Content-Type": "application/json"})
            except httpx.TimeoutException as exc:
                last_error = ToolTimeout(f"{self.url}: timed out ({exc})")
            except httpx.HTTPError as exc:
                last_error = ToolFailure(f"{self.url}: transport error ({exc})", retriable=True)
            else:
                self.audit.append({"request_sha256": _digest(body), "response_sha256": _digest(resp.content), "status": resp.status_code})
                status = resp.status_code
                if status in (401, 403):
                    raise AuthError(f"{self.url}: authentication rejected ({status})", status=status)
                if status == 429 or status >= 500:
                    last_error = ToolFailure(f"{self.url}: HTTP {status}", retriable=True, status=status)
                elif not 200 <= status < 300:
                    raise ToolFailure(f"{self.url}: HTTP {status}", retriable=False, status=status)
                else:
                    try:
                        return resp.json()
                    except ValueError:
                        raise ToolSchemaError(f"{self.url}: response is not JSON", status=status) from None
            if attempt + 1 < self.attempts:
                delay = self.backoff * (2**attempt)
                logger.warning("%s (attempt %d/%d), retrying in %.2fs", last_error, attempt + 1, self.attempts, delay)
                self._sleep(delay)
        raise last_error


class RemoteChatModel(_HttpTool):
    """Chat endpoint speaking the common ``messages``/``choices`` schema."""

    def __init__(self, url: str, model: str = "gpt-4", **kwargs):
        super().__init__(url, CHAT_KEY_ENV, **kwargs)
        self.model = model

    def complete(self, prompt: str, temperature: float) -> str:
        data = self._post({"model": self.model, "messages": [{"role": "user", "content": prompt}], "temperature": temperature})
        try:
            content = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            raise ToolSchemaError(f"{self.url}: no choices[0].message.content in reply") from None
        if not isinstance(content, str):
            raise ToolSchemaError(f"{self.url}: message content is not text")
        return content


class RemoteSearch(_HttpTool):
    """Search endpoint returning ``{"results": [{"source_id", "text"}, ...]}``."""

    def __init__(self, url: str, **kwargs):
        super().__init__(url, SEARCH_KEY_ENV, **kwargs)

    def search(self, query: str, max_results: int) -> SearchContext:
        data = self._post({"query": query, "max_results": max_results})
        results = data.get("results") if isinstance(data, dict) else None
        if not isinstance(results, list):
            raise ToolSchemaError(f"{self.url}: missing 'results' list")
        now = datetime.now(timezone.utc)
        snippets = []
        for i, item in enumerate(results[:max_results]):
            if not isinstance(item, dict):
                raise ToolSchemaError(f"{self.url}: result {i} is not an object")
            text = item.get("text") or item.get("snippet")
            if not isinstance(text, str) or not text.strip():
                continue
            snippets.append(Snippet(str(item.get("source_id") or item.get("link") or i), text, now))
        return SearchContext(query, tuple(snippets))


class RemoteEmbedder(_HttpTool):
    """Embedding endpoint returning ``{"data": [{"embedding": [...]}, ...]}``; vectors are re-normalized."""

    def __init__(self, url: str, dim: int, model: str = "text-embedding", **kwargs):
        super().__init__(url, EMBED_KEY_ENV, **kwargs)
        self.dim = dim
        self.model = model

    def embed(self, texts: Sequence[str]) -> List[np.ndarray]:
        if not texts:
            return []
        data = self._post({"model": self.model, "input": list(texts)})
        try:
            rows = [np.asarray(item["embedding"], dtype=np.float64) for item in data["data"]]
        except (KeyError, TypeError, ValueError):
            raise ToolSchemaError(f"{self.url}: malformed embedding payload") from None
        if len(rows) != len(texts) or any(r.shape != (self.dim,) for r in rows):
            raise ToolSchemaError(f"{self.url}: expected {len(texts)} vectors of dimension {self.dim}")
        out = []
        for r in rows:
            length = float(np.linalg.norm(r))
            if length == 0.0 or not np.isfinite(length):
                raise ToolSchemaError(f"{self.url}: zero or non-finite embedding")
            out.append(r / length)
        return out
