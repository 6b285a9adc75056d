"""Deterministic scripted gateways for offline runs and tests.

Fixture files (one directory, conventional names):

  lm.json     — list of entries, matched in order of specificity:
                  {"template_id", "field_hash", "completion"}   exact match
                  {"template_id", "completions": [...]}         per-template cycle
                  {"template_id", "completion"}                 constant
                A completion of the form "$field:NAME" echoes the prompt's
                NAME binding, so static fixtures can stay context-sensitive.
  search.json — {"results": {query: [{url, title, snippets}]},
                 "synthesize_missing": true|false}
  embed.json  — {"dim": N, "vectors": {text: [floats]}}

Unknown queries (when synthesize_missing) and unknown texts map to values
derived purely from the input string, so replays are bit-identical.
"""

from __future__ import annotations

import json
import hashlib
from pathlib import Path

from ..errors import GatewayError
from ..prompts import PromptSpec
from ..vectors import hash_vector, unit_normalize
from .base import Embedder, Gateways, LanguageModel, SearchEngine, WebResult
from .filtering import SourceFilter

_FIELD_DIRECTIVE = "$field:"

SCRIPTED_EMBED_DIM = 32


class ScriptedLM(LanguageModel):
    def __init__(
        self,
        exact: dict[tuple[str, str], str] | None = None,
        cycles: dict[str, list[str]] | None = None,
        constants: dict[str, str] | None = None,
    ):
        self.exact = dict(exact or {})
        self.cycles = {k: list(v) for k, v in (cycles or {}).items()}
        self.constants = dict(constants or {})
        self._cycle_pos: dict[str, int] = {}

    def _complete_raw(self, spec: PromptSpec) -> str:
        completion = self._lookup(spec)
        if completion is None:
            raise GatewayError(
                f"no scripted completion for template {spec.template_id!r} "
                f"(field_hash {spec.field_hash()})"
            )
        if completion.startswith(_FIELD_DIRECTIVE):
            name = completion[len(_FIELD_DIRECTIVE):]
            return str(spec.fields.get(name, ""))
        return completion

    def _lookup(self, spec: PromptSpec) -> str | None:
        key = (spec.template_id, spec.field_hash())
        if key in self.exact:
            return self.exact[key]
        cycle = self.cycles.get(spec.template_id)
        if cycle:
            pos = self._cycle_pos.get(spec.template_id, 0)
            self._cycle_pos[spec.template_id] = (pos + 1) % len(cycle)
            return cycle[pos]
        return self.constants.get(spec.template_id)

    @classmethod
    def from_entries(cls, entries: list[dict]) -> "ScriptedLM":
        exact: dict[tuple[str, str], str] = {}
        cycles: dict[str, list[str]] = {}
        constants: dict[str, str] = {}
        for entry in entries:
            tid = entry["template_id"]
            if "field_hash" in entry:
                exact[(tid, entry["field_hash"])] = entry["completion"]
            elif "completions" in entry:
                cycles[tid] = list(entry["completions"])
            else:
                constants[tid] = entry["completion"]
        return cls(exact=exact, cycles=cycles, constants=constants)


def synthesize_results(query: str, count: int = 3) -> list[WebResult]:
    """Deterministic placeholder results derived from the query string."""
    slug = "".join(c if c.isalnum() else "-" for c in query.lower()).strip("-")[:48]
    digest = hashlib.sha256(query.encode("utf-8")).hexdigest()[:8]
    out = []
    for k in range(count):
        out.append(
            WebResult(
                url=f"https://sources.example/{slug or 'q'}-{digest}/{k + 1}",
                title=f"Reference {k + 1} on {query}",
                snippets=[f"Collected notes ({k + 1}) about {query}."],
            )
        )
    return out


class ScriptedSearch(SearchEngine):
    def __init__(
        self,
        results: dict[str, list[WebResult]] | None = None,
        synthesize_missing: bool = True,
        source_filter: SourceFilter | None = None,
    ):
        super().__init__(source_filter)
        self.results = {k: list(v) for k, v in (results or {}).items()}
        self.synthesize_missing = synthesize_missing

    def _search_raw(self, query: str) -> list[WebResult]:
        if query in self.results:
            return [
                WebResult(url=r.url, title=r.title, snippets=list(r.snippets))
                for r in self.results[query]
            ]
        if self.synthesize_missing:
            return synthesize_results(query)
        raise GatewayError(f"no scripted results for query {query!r}")

    @classmethod
    def from_mapping(cls, data: dict, source_filter: SourceFilter | None = None) -> "ScriptedSearch":
        results = {
            query: [
                WebResult(
                    url=r["url"],
                    title=r.get("title", r["url"]),
                    snippets=list(r.get("snippets", [])),
                )
                for r in hits
            ]
            for query, hits in data.get("results", {}).items()
        }
        return cls(
            results=results,
            synthesize_missing=bool(data.get("synthesize_missing", True)),
            source_filter=source_filter,
        )


class ScriptedEmbedder(Embedder):
    def __init__(self, vectors: dict[str, list[float]] | None = None, dim: int = SCRIPTED_EMBED_DIM):
        super().__init__()
        self.dim = dim
        self.vectors = {k: list(v) for k, v in (vectors or {}).items()}
        for text, values in self.vectors.items():
            if len(values) != dim:
                raise ValueError(
                    f"fixture vector for {text!r} has dim {len(values)}, expected {dim}"
                )

    def _embed_raw(self, text: str):
        if text in self.vectors:
            return unit_normalize(self.vectors[text]).values
        return hash_vector(text, self.dim).values


def load_scripted_gateways(
    fixtures_dir: str | Path,
    source_filter: SourceFilter | None = None,
) -> Gateways:
    """Build the gateway bundle from a fixtures directory.

    Missing files fall back to empty scripts (search synthesizes, embeddings
    hash); a missing lm.json only works for flows that never call the LM.
    """
    root = Path(fixtures_dir)
    lm_path = root / "lm.json"
    search_path = root / "search.json"
    embed_path = root / "embed.json"

    lm = ScriptedLM.from_entries(
        json.loads(lm_path.read_text(encoding="utf-8")) if lm_path.exists() else []
    )
    search = ScriptedSearch.from_mapping(
        json.loads(search_path.read_text(encoding="utf-8")) if search_path.exists() else {},
        source_filter=source_filter,
    )
    if embed_path.exists():
        embed_data = json.loads(embed_path.read_text(encoding="utf-8"))
        embedder = ScriptedEmbedder(
            vectors=embed_data.get("vectors", {}),
            dim=int(embed_data.get("dim", SCRIPTED_EMBED_DIM)),
        )
    else:
        embedder = ScriptedEmbedder()
    return Gateways(lm=lm, search=search, embedder=embedder)
