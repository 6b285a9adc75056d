"""Perspective-guided expert agents.

An expert turn runs intent decision, then either the answering pipeline
(query generation, retrieval, grounded cited answer, style polish) or the
question pipeline (direct question from history, polish). All retrieved
snippets are returned to the engine, which owns map insertion.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable

from ..errors import BudgetExhausted
from ..gateways.base import Gateways, ParseError, WebResult, complete_checked
from ..gateways.filtering import canonical_url
from ..mindmap import InfoSnippet
from ..prompts import INSUFFICIENT_GROUNDING_HEDGE, spec
from .citations import (
    CitedText,
    citation_multiset,
    densify_citations,
    parse_cited_text,
    strip_citation_markers,
)
from ..turns import Actor, Intent, Utterance, format_history, parse_intent

if TYPE_CHECKING:
    from ..engine.session import SessionState

MAX_QUERIES = 5

EmitFn = Callable[[str, dict], None]


def _no_emit(event_type: str, payload: dict) -> None:
    return None


@dataclass(frozen=True)
class Persona:
    role: str
    description: str

    def __post_init__(self) -> None:
        if not self.role.strip():
            raise ValueError("persona role must be nonempty")

    def to_dict(self) -> dict:
        return {"role": self.role, "description": self.description}

    @classmethod
    def from_dict(cls, data: dict) -> "Persona":
        return cls(data["role"], data.get("description", ""))


_PERSONA_LINE_RE = re.compile(r"^\s*\d+\s*[.)]\s*(.+?)\s*$")


def _parse_personas(text: str, n: int) -> list[Persona]:
    personas: list[Persona] = []
    seen_roles: set[str] = set()
    for line in text.splitlines():
        m = _PERSONA_LINE_RE.match(line)
        if not m:
            continue
        body = m.group(1).strip().strip("[]").strip()
        if ":" in body:
            role, desc = body.split(":", 1)
        else:
            role, desc = body, ""
        role = role.strip().strip("*").strip()
        desc = desc.strip()
        if not role or role.lower() in seen_roles:
            continue
        seen_roles.add(role.lower())
        personas.append(Persona(role, desc))
    if len(personas) < n:
        raise ParseError(f"expected {n} personas, parsed {len(personas)}")
    return personas[:n]


def _format_background(background: list[WebResult] | str) -> str:
    if isinstance(background, str):
        return background or "None."
    if not background:
        return "None."
    blocks = []
    for r in background:
        blocks.append(f"{r.title} ({r.url})\n{r.excerpt()}")
    return "\n\n".join(blocks)


def generate_experts(
    topic: str,
    background: list[WebResult] | str,
    n: int,
    focus: str | None,
    gateways: Gateways,
) -> list[Persona]:
    """Exactly n personas with distinct roles, parsed from a numbered
    "role: description" list. Accepts raw search results or pre-formatted
    background text. Raises GatewayError when the LM cannot produce enough
    distinct personas after the retry."""
    if n < 1:
        raise ValueError("n must be >= 1")
    prompt = spec(
        "generate_experts_with_focus",
        topic=topic,
        background_info=_format_background(background),
        focus=focus or topic,
        top_n=str(n),
    )
    return complete_checked(gateways.lm, prompt, lambda text: _parse_personas(text, n))


def decide_intent(
    persona: Persona,
    history_window: str,
    topic: str,
    gateways: Gateways,
) -> Intent:
    """One of the four intents; PotentialAnswer when the LM output stays
    unparseable after the retry."""
    prompt = spec(
        "intent_decision",
        persona=f"{persona.role}: {persona.description}",
        history=history_window or "(the discourse has not started)",
        topic=topic,
    )

    def parse(text: str) -> Intent:
        intent = parse_intent(text)
        if intent is None:
            raise ParseError(f"no intent found in {text!r}")
        return intent

    return complete_checked(gateways.lm, prompt, parse, default=lambda: Intent.POTENTIAL_ANSWER)


_QUERY_LINE_RE = re.compile(r"^\s*(?:[-*]|\d+[.)])\s*(.+?)\s*$")


def _parse_queries(text: str) -> list[str]:
    queries: list[str] = []
    for line in text.splitlines():
        m = _QUERY_LINE_RE.match(line)
        if not m:
            continue
        q = m.group(1).strip().strip("'\"").strip()
        if q and q not in queries:
            queries.append(q)
    if not queries:
        raise ParseError(f"no query lines in {text!r}")
    return queries[:MAX_QUERIES]


def generate_queries(topic: str, question: str, gateways: Gateways) -> list[str]:
    """1..5 search queries in prompt order; the question itself when the LM
    output has no parseable query lines after the retry."""
    if not question.strip():
        raise ValueError("question must be nonempty")
    prompt = spec("question_to_query", topic=topic, question=question)
    return complete_checked(gateways.lm, prompt, _parse_queries, default=lambda: [question])


def format_numbered_snippets(snippets: list[InfoSnippet]) -> str:
    blocks = []
    for k, s in enumerate(snippets, start=1):
        blocks.append(f"[{k}] {s.title} ({s.url})\n{s.excerpt}")
    return "\n\n".join(blocks)


_HEDGE_SIGNAL_RE = re.compile(r"cannot\s+fully\s+address\s+the\s+question", re.IGNORECASE)


def _normalize_hedge(text: str) -> tuple[str, bool]:
    if not _HEDGE_SIGNAL_RE.search(text):
        return text, False
    if text.startswith(INSUFFICIENT_GROUNDING_HEDGE):
        return text, True
    sentence = re.compile(r"[^.?!\n]*cannot\s+fully\s+address\s+the\s+question[^.?!\n]*[.?!]?", re.IGNORECASE)
    rest = sentence.sub("", text, count=1)
    rest = re.sub(r"  +", " ", rest).strip()
    if rest:
        return f"{INSUFFICIENT_GROUNDING_HEDGE} {rest}", True
    return INSUFFICIENT_GROUNDING_HEDGE, True


def grounded_answer(
    topic: str,
    question: str,
    snippets: list[InfoSnippet],
    style: str,
    gateways: Gateways,
    *,
    emit: EmitFn = _no_emit,
) -> CitedText:
    """Cited answer over the given snippets only.

    Out-of-range indices are stripped and reported as a grounding-violation
    warning. When the LM signals insufficient grounding, the text starts with
    the verbatim hedge sentence, keeping whatever partial citations exist.
    """
    if not snippets:
        raise ValueError("grounded_answer requires at least one snippet")
    prompt = spec(
        "answer_question",
        topic=topic,
        question=question,
        style=style,
        info=format_numbered_snippets(snippets),
    )
    raw = gateways.lm.complete(prompt)
    raw, _hedged = _normalize_hedge(raw.strip())
    cited, stripped = parse_cited_text(raw, [s.id for s in snippets])
    if stripped:
        emit(
            "warning",
            {"kind": "grounding_violation", "stripped_indices": sorted(set(stripped))},
        )
    return cited


def polish_utterance(
    persona: Persona,
    action: str,
    prev_utterance: str,
    content: CitedText,
    gateways: Gateways,
    *,
    emit: EmitFn = _no_emit,
) -> CitedText:
    """Style pass that must preserve the citation-index multiset exactly;
    the unpolished content is kept (and a warning emitted) on any violation."""
    content.validate()
    prompt = spec(
        "convert_style",
        expert=f"{persona.role}: {persona.description}",
        action=action,
        prev=prev_utterance or "(none)",
        content=content.text,
    )
    try:
        polished = gateways.lm.complete(prompt).strip()
    except Exception:
        emit("warning", {"kind": "polish_failed"})
        return content
    if citation_multiset(polished) != citation_multiset(content.text):
        emit("warning", {"kind": "polish_citation_mismatch"})
        return content
    return CitedText(polished, dict(content.citation_map))


_ACTION_BY_INTENT = {
    Intent.ORIGINAL_QUESTION: "raise a new question for the group",
    Intent.INFORMATION_REQUEST: "ask for more information about the current thread",
    Intent.POTENTIAL_ANSWER: "share a potential answer grounded in the sources",
    Intent.FURTHER_DETAILS: "add further details to the ongoing answer",
}


@dataclass
class TurnOutput:
    utterance: Utterance
    snippets: list[InfoSnippet] = field(default_factory=list)
    warnings: list[dict] = field(default_factory=list)


def _latest_question(state: "SessionState") -> str:
    for utt in reversed(state.history):
        if utt.intent.is_question_asking:
            return utt.text
    return state.topic


def expert_turn(
    persona: Persona,
    state: "SessionState",
    gateways: Gateways,
    *,
    searcher: Callable[[str], list[WebResult]] | None = None,
    force_intent: Intent | None = None,
    expert_index: int | None = None,
) -> TurnOutput:
    """One complete expert utterance plus the snippets it retrieved.

    Budget exhaustion mid-retrieval degrades to the snippets gathered so far;
    with nothing gathered it propagates. The engine inserts the returned
    snippets into the mind map and logs the warnings.
    """
    if searcher is None:
        searcher = lambda q: gateways.search.search(q, state.budget)
    if expert_index is None:
        expert_index = state.personas.index(persona)
    warnings: list[dict] = []
    emit = lambda _type, payload: warnings.append(payload)
    window = format_history(state.history, state.config.history_window_words)
    turn_index = len(state.history)

    intent = force_intent or decide_intent(persona, window, state.topic, gateways)
    prev_text = state.history[-1].text if state.history else ""

    if intent.is_question_asking:
        prompt = spec(
            "direct_question",
            persona=f"{persona.role}: {persona.description}",
            history=window or "(the discourse has not started)",
            topic=state.topic,
        )
        raw = gateways.lm.complete(prompt).strip()
        question = strip_citation_markers(raw)
        polished = polish_utterance(
            persona, _ACTION_BY_INTENT[intent], prev_text, CitedText(question, {}), gateways, emit=emit
        )
        utterance = Utterance(
            turn_index=turn_index,
            actor=Actor.expert(expert_index),
            intent=intent,
            text=polished.text,
        )
        return TurnOutput(utterance, [], warnings)

    question = state.topic if force_intent is not None else _latest_question(state)
    queries = generate_queries(state.topic, question, gateways)
    question_emb = gateways.embedder.embed(question)

    gathered: list[InfoSnippet] = []
    seen_urls: set[str] = set()
    queries_done: list[str] = []
    for query in queries:
        try:
            results = searcher(query)
        except BudgetExhausted:
            if gathered:
                break
            raise
        queries_done.append(query)
        for result in results:
            key = canonical_url(result.url)
            if key in seen_urls:
                continue
            seen_urls.add(key)
            excerpt = result.excerpt()
            if not excerpt:
                continue
            gathered.append(
                InfoSnippet(
                    id=state.allocate_snippet_id(),
                    url=result.url,
                    title=result.title,
                    excerpt=excerpt,
                    question=question,
                    query=query,
                    question_embedding=question_emb,
                    excerpt_embedding=gateways.embedder.embed(excerpt),
                    retrieved_at_turn=turn_index,
                )
            )

    if not gathered:
        # nothing retrievable for this question; answer as a hedged statement
        warnings.append({"kind": "empty_retrieval", "question": question})
        utterance = Utterance(
            turn_index=turn_index,
            actor=Actor.expert(expert_index),
            intent=intent,
            text=INSUFFICIENT_GROUNDING_HEDGE,
            queries_issued=tuple(queries_done),
        )
        return TurnOutput(utterance, [], warnings)

    answer = grounded_answer(state.topic, question, gathered, persona.role, gateways, emit=emit)
    polished = polish_utterance(
        persona, _ACTION_BY_INTENT[intent], prev_text, answer, gateways, emit=emit
    )
    dense = densify_citations(polished)
    cited_ids = dense.cited_snippet_ids()
    for snippet in gathered:
        if snippet.id in cited_ids:
            snippet.cited = True
    utterance = Utterance(
        turn_index=turn_index,
        actor=Actor.expert(expert_index),
        intent=intent,
        text=dense.text,
        citations=tuple(cited_ids),
        queries_issued=tuple(queries_done),
    )
    return TurnOutput(utterance, gathered, warnings)
