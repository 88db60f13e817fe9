"""Feature-hashed character n-gram embeddings (the offline embedder)."""

from __future__ import annotations

import hashlib
from typing import List, Sequence

import numpy as np

from ..domain import normalize_keyword
from ..errors import InvalidInput, InvalidKeyword

DEFAULT_DIM = 256
NGRAM_SIZES = (2, 3)


def _char_ngrams(text: str):
    # word-boundary markers so a single character still yields n-grams
    padded = f"<{text}>"
    for size in NGRAM_SIZES:
        for i in range(len(padded) - size + 1):
            yield padded[i : i + size]


def _bucket(gram: str, dim: int):
    digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
    value = int.from_bytes(digest, "little")
    sign = 1.0 if value >> 63 == 0 else -1.0
    return value % dim, sign


def hash_embed(text: str, d: int = DEFAULT_DIM) -> np.ndarray:
    """Signed feature hashing of character 2/3-grams, L2-normalized."""
    if isinstance(d, bool) or not isinstance(d, int) or d < 8:
        raise InvalidInput(f"embedding dimension must be an integer >= 8, got {d!r}")
    try:
        norm_text = normalize_keyword(text)
    except InvalidKeyword as exc:
        raise InvalidInput(str(exc)) from None
    vec = np.zeros(d, dtype=np.float64)
    for gram in _char_ngrams(norm_text):
        idx, sign = _bucket(gram, d)
        vec[idx] += sign
    length = float(np.sqrt(vec @ vec))
    if length == 0.0:
        raise InvalidInput(f"all n-gram features cancelled for {text!r}")
    return vec / length


class HashEmbedder:
    """Deterministic offline :class:`Embedder` backed by :func:`hash_embed`."""

    def __init__(self, dim: int = DEFAULT_DIM):
        if dim < 8:
            raise InvalidInput(f"embedding dimension must be >= 8, got {dim}")
        self.dim = dim
        self._cache = {}

    def embed(self, texts: Sequence[str]) -> List[np.ndarray]:
        out = []
        for text in texts:
            vec = self._cache.get(text)
            if vec is None:
                vec = hash_embed(text, self.dim)
                vec.setflags(write=False)
                self._cache[text] = vec
            out.append(vec)
        return out

    def embed_matrix(self, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, self.dim))
        return np.vstack(self.embed(texts))
