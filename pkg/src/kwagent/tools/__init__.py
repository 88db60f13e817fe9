"""Chat, search and embedding backends (offline mocks and HTTP adapters)."""

from .base import ChatModel, Embedder, KpiSource, SearchProvider
from .embedding import DEFAULT_DIM, HashEmbedder, hash_embed
from .mocks import CatalogChatModel, FixtureSearch, ScriptedChatModel
from .remote import RemoteChatModel, RemoteEmbedder, RemoteSearch, TokenBucket

__all__ = [
    "ChatModel",
    "Embedder",
    "KpiSource",
    "SearchProvider",
    "DEFAULT_DIM",
    "HashEmbedder",
    "hash_embed",
    "CatalogChatModel",
    "FixtureSearch",
    "ScriptedChatModel",
    "RemoteChatModel",
    "RemoteEmbedder",
    "RemoteSearch",
    "TokenBucket",
]
