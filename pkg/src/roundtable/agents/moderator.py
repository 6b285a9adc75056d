"""Moderator: rerank unused information, steer with a grounded question.

The rerank score prioritizes information that is on-topic yet does not
directly answer the question it was retrieved for:

    score(i) = cos(i, t)^alpha * (1 - cos(i, q))^(1 - alpha)

with both cosines clamped to [0, 1] before exponentiation, since fractional
powers of negative bases are undefined over the reals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from ..gateways.base import Gateways
from ..mindmap import InfoSnippet, render_structure
from ..prompts import spec
from ..vectors import Embedding, cosine
from .citations import citation_indices, strip_citation_markers
from .experts import Persona, generate_experts

if TYPE_CHECKING:
    from ..engine.session import SessionState

TOP_R = 10


def _clamp01(x: float) -> float:
    return 0.0 if x < 0.0 else 1.0 if x > 1.0 else x


def rerank_score(cos_topic: float, cos_question: float, alpha: float) -> float:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    a = _clamp01(cos_topic)
    b = 1.0 - _clamp01(cos_question)
    if a == b:
        # a^alpha * a^(1-alpha) == a; skipping the powers avoids float error
        return a
    return a**alpha * b ** (1.0 - alpha)


def moderator_rerank(
    snippets: list[InfoSnippet], topic_emb: Embedding, alpha: float
) -> list[tuple[str, float]]:
    """(snippet id, score) sorted by score descending; ties go to the earlier
    retrieval turn, then the smaller id."""
    scored = []
    for s in snippets:
        score = rerank_score(
            cosine(s.excerpt_embedding, topic_emb),
            cosine(s.excerpt_embedding, s.question_embedding),
            alpha,
        )
        scored.append((s.id, score, s.retrieved_at_turn))
    scored.sort(key=lambda item: (-item[1], item[2], item[0]))
    return [(sid, score) for sid, score, _turn in scored]


@dataclass
class ModeratorResult:
    question: str
    personas: list[Persona]
    inspired_by: list[str] = field(default_factory=list)
    degraded: bool = False
    warnings: list[dict] = field(default_factory=list)


def _last_moderator_turn(state: "SessionState") -> int:
    for utt in reversed(state.history):
        if utt.actor.kind == "moderator":
            return utt.turn_index
    return -1


def moderator_turn(state: "SessionState", gateways: Gateways) -> ModeratorResult:
    """Steering question from the unused-information pool, plus the updated
    expert list P'.

    The pool holds snippets never cited so far and retrieved after the
    previous Moderator turn, so each unused snippet is considered by at most
    one moderator turn. An empty pool degrades to a question from the map
    summary alone.
    """
    warnings: list[dict] = []
    since = _last_moderator_turn(state)
    pool = [
        s
        for s in state.mind_map.snippets.values()
        if not s.cited and s.retrieved_at_turn > since
    ]

    summary_prompt = spec(
        "kb_summary",
        topic=state.topic,
        structure=render_structure(state.mind_map) or "(empty)",
    )
    summary = gateways.lm.complete(summary_prompt).strip()

    inspired_by: list[str] = []
    degraded = not pool
    if degraded:
        warnings.append({"kind": "moderator_degraded", "reason": "no uncited snippets"})
        information = "None."
        top: list[InfoSnippet] = []
    else:
        topic_emb = gateways.embedder.embed(state.topic)
        ranking = moderator_rerank(pool, topic_emb, state.config.alpha)
        by_id = {s.id: s for s in pool}
        top = [by_id[sid] for sid, _score in ranking[:TOP_R]]
        information = "\n\n".join(
            f"[{k}] {s.excerpt}" for k, s in enumerate(top, start=1)
        )

    question_prompt = spec(
        "grounded_question",
        topic=state.topic,
        information=information,
        summary=summary,
        last_utterance=state.history[-1].text if state.history else "(none)",
    )
    raw = gateways.lm.complete(question_prompt).strip()
    for idx in citation_indices(raw):
        if 1 <= idx <= len(top) and top[idx - 1].id not in inspired_by:
            inspired_by.append(top[idx - 1].id)
    question = strip_citation_markers(raw)

    personas = generate_experts(
        state.topic,
        information if not degraded else [],
        state.config.n_experts,
        question,
        gateways,
    )
    return ModeratorResult(question, personas, inspired_by, degraded, warnings)
