"""Uniform access to the three external capabilities: LM, search, embeddings."""

from .base import Gateways, LanguageModel, SearchEngine, Embedder, WebResult, complete_checked
from .filtering import SourceFilter, canonical_url
from .scripted import ScriptedLM, ScriptedSearch, ScriptedEmbedder, load_scripted_gateways
from .config import GatewayConfig, build_gateways

__all__ = [
    "Gateways",
    "LanguageModel",
    "SearchEngine",
    "Embedder",
    "WebResult",
    "complete_checked",
    "SourceFilter",
    "canonical_url",
    "ScriptedLM",
    "ScriptedSearch",
    "ScriptedEmbedder",
    "load_scripted_gateways",
    "GatewayConfig",
    "build_gateways",
]
