"""HTTP-backed gateways: chat-completions LM, embeddings, and web search.

Auth comes from environment variables (LM_API_KEY, SEARCH_API_KEY); endpoints
and model names come from the gateway config file. The LM and embedding
clients speak the OpenAI-compatible wire format; the search client expects a
hits-style JSON response and is shaped for the You.com search API but works
with anything returning {hits: [{url, title, snippets}]}.
"""

from __future__ import annotations

import os

import httpx

from ..errors import GatewayError, TransportError
from ..prompts import PromptSpec
from .base import Embedder, LanguageModel, SearchEngine, WebResult
from .filtering import SourceFilter

_TIMEOUT = 60.0


def _post_json(url: str, headers: dict[str, str], payload: dict) -> dict:
    try:
        resp = httpx.post(url, headers=headers, json=payload, timeout=_TIMEOUT)
    except httpx.HTTPError as exc:
        raise TransportError(f"POST {url} failed: {exc}") from exc
    if resp.status_code >= 500:
        raise TransportError(f"POST {url} returned {resp.status_code}")
    if resp.status_code >= 400:
        raise GatewayError(f"POST {url} returned {resp.status_code}: {resp.text[:200]}")
    return resp.json()


class LiveLM(LanguageModel):
    def __init__(self, endpoint: str, model: str, temperature: float = 1.0, top_p: float = 0.9):
        self.endpoint = endpoint.rstrip("/")
        self.model = model
        self.temperature = temperature
        self.top_p = top_p

    def _complete_raw(self, spec: PromptSpec) -> str:
        api_key = os.environ.get("LM_API_KEY", "")
        if not api_key:
            raise GatewayError("LM_API_KEY is not set")
        tpl = spec.template()
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": spec.render()}],
            "temperature": self.temperature,
            "top_p": self.top_p,
            "max_tokens": spec.max_output_tokens or tpl.max_output_tokens,
        }
        data = _post_json(
            f"{self.endpoint}/chat/completions",
            {"Authorization": f"Bearer {api_key}"},
            payload,
        )
        try:
            return data["choices"][0]["message"]["content"] or ""
        except (KeyError, IndexError, TypeError) as exc:
            raise GatewayError(f"malformed completion response: {exc}") from exc


class LiveEmbedder(Embedder):
    def __init__(self, endpoint: str, model: str):
        super().__init__()
        self.endpoint = endpoint.rstrip("/")
        self.model = model

    def _embed_raw(self, text: str):
        api_key = os.environ.get("LM_API_KEY", "")
        if not api_key:
            raise GatewayError("LM_API_KEY is not set")
        data = _post_json(
            f"{self.endpoint}/embeddings",
            {"Authorization": f"Bearer {api_key}"},
            {"model": self.model, "input": text},
        )
        try:
            return data["data"][0]["embedding"]
        except (KeyError, IndexError, TypeError) as exc:
            raise GatewayError(f"malformed embedding response: {exc}") from exc


class LiveSearch(SearchEngine):
    def __init__(self, endpoint: str, count: int = 8, source_filter: SourceFilter | None = None):
        super().__init__(source_filter)
        self.endpoint = endpoint
        self.count = count

    def _search_raw(self, query: str) -> list[WebResult]:
        api_key = os.environ.get("SEARCH_API_KEY", "")
        if not api_key:
            raise GatewayError("SEARCH_API_KEY is not set")
        try:
            resp = httpx.get(
                self.endpoint,
                params={"query": query, "count": self.count},
                headers={"X-API-Key": api_key},
                timeout=_TIMEOUT,
            )
        except httpx.HTTPError as exc:
            raise TransportError(f"search request failed: {exc}") from exc
        if resp.status_code >= 500:
            raise TransportError(f"search returned {resp.status_code}")
        if resp.status_code >= 400:
            raise GatewayError(f"search returned {resp.status_code}: {resp.text[:200]}")
        data = resp.json()
        hits = data.get("hits") or data.get("results") or []
        out = []
        for hit in hits:
            url = hit.get("url") or ""
            if not url:
                continue
            snippets = hit.get("snippets")
            if snippets is None:
                snippets = [hit.get("snippet") or hit.get("description") or ""]
            out.append(
                WebResult(
                    url=url,
                    title=hit.get("title") or url,
                    snippets=[s for s in snippets if s],
                )
            )
        return out
