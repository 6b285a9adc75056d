"""Gateway protocols plus the shared filtering, caching, and retry machinery.

Concrete gateways (scripted and live) implement the single-underscore raw
hooks; callers always go through the public methods, which enforce the
contracts: search filters and deduplicates, embed normalizes and caches,
complete retries once on empty output.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, TypeVar

from ..budget import BudgetCounter
from ..errors import GatewayError, TransportError
from ..prompts import PromptSpec
from ..vectors import Embedding, unit_normalize
from .filtering import SourceFilter, canonical_url

T = TypeVar("T")


@dataclass
class WebResult:
    """One search hit that passed source filtering."""

    url: str
    title: str
    snippets: list[str] = field(default_factory=list)
    trusted: bool = True

    def excerpt(self) -> str:
        return " ".join(s.strip() for s in self.snippets if s.strip())


class LanguageModel:
    """Completion gateway; subclasses implement _complete_raw."""

    def complete(self, spec: PromptSpec) -> str:
        spec.validate()
        text = self._attempt(spec)
        if not text.strip():
            text = self._attempt(spec)
        if not text.strip():
            raise GatewayError(
                f"empty completion for template {spec.template_id!r} after retry"
            )
        return text

    def _attempt(self, spec: PromptSpec) -> str:
        try:
            return self._complete_raw(spec)
        except TransportError:
            return self._complete_raw(spec)

    def _complete_raw(self, spec: PromptSpec) -> str:
        raise NotImplementedError


class ParseError(ValueError):
    """A completion could not be parsed into the caller's expected shape."""


def complete_checked(
    lm: LanguageModel,
    spec: PromptSpec,
    parse: Callable[[str], T],
    default: Callable[[], T] | None = None,
) -> T:
    """complete + parse with one retry on parse failure.

    After the retry, returns default() if given, else raises GatewayError.
    """
    for attempt in (0, 1):
        text = lm.complete(spec)
        try:
            return parse(text)
        except ParseError:
            if attempt == 1:
                break
    if default is not None:
        return default()
    raise GatewayError(
        f"unparseable completion for template {spec.template_id!r} after retry"
    )


class SearchEngine:
    """Search gateway; budget accounting, filtering, and dedup live here.

    Subclasses implement _search_raw returning unfiltered WebResults.
    """

    def __init__(self, source_filter: SourceFilter | None = None):
        self.source_filter = source_filter or SourceFilter()

    def search(self, query: str, budget: BudgetCounter) -> list[WebResult]:
        """One budgeted call: decrements budget by exactly 1, returns only
        trusted results, deduplicated by canonical URL."""
        if not query.strip():
            raise ValueError("search query must be nonempty")
        budget.consume()
        try:
            raw = self._search_raw(query)
        except TransportError:
            raw = self._search_raw(query)
        out: list[WebResult] = []
        seen: set[str] = set()
        for r in raw:
            if not r.url:
                continue
            canon = canonical_url(r.url)
            if canon in seen:
                continue
            if not self.source_filter.allows(r.url):
                continue
            seen.add(canon)
            out.append(WebResult(url=r.url, title=r.title, snippets=list(r.snippets), trusted=True))
        return out

    def _search_raw(self, query: str) -> list[WebResult]:
        raise NotImplementedError


class Embedder:
    """Embedding gateway with an exact-text cache and unit normalization.

    The cache guarantees identical text maps to a bitwise-identical vector
    within a gateway instance; it is unbounded for the session's lifetime.
    """

    def __init__(self):
        self._cache: dict[str, Embedding] = {}
        self._lock = threading.Lock()
        self._dim: int | None = None

    def embed(self, text: str) -> Embedding:
        if not text:
            raise ValueError("cannot embed empty text")
        with self._lock:
            hit = self._cache.get(text)
        if hit is not None:
            return hit
        emb = unit_normalize(self._embed_raw(text))
        with self._lock:
            if self._dim is None:
                self._dim = emb.dim
            elif emb.dim != self._dim:
                raise GatewayError(
                    f"embedding dim changed mid-session: {emb.dim} != {self._dim}"
                )
            return self._cache.setdefault(text, emb)

    def _embed_raw(self, text: str):
        raise NotImplementedError


@dataclass
class Gateways:
    """The bundle handed to the engine, agents, and mind map."""

    lm: LanguageModel
    search: SearchEngine
    embedder: Embedder
