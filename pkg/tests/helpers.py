"""Shared builders for scripted gateway bundles and quick utterances."""

from __future__ import annotations

from roundtable.gateways.base import Gateways, WebResult
from roundtable.gateways.scripted import ScriptedEmbedder, ScriptedLM, ScriptedSearch
from roundtable.turns import Actor, Intent, Utterance

# Enough of a script to drive a whole session; individual tests override the
# pieces they care about.
BASE_SCRIPT = {
    "question_to_query": "- alpha query\n- beta query",
    "answer_question": "Claim one [1]. Claim two [2].",
    "convert_style": "$field:content",
    "direct_question": "What remains unresolved here?",
    "insert_candidate_choice": "Best placement: [1]",
    "insert_navigate": "create: Findings",
    "kb_summary": "Summary of the discussion so far.",
    "grounded_question": "Where does this lead next [1]?",
    "generate_experts_with_focus": (
        "1. Analyst: watches the data\n"
        "2. Engineer: builds the systems\n"
        "3. Historian: tracks the context"
    ),
    "subtopic_split": "1. Methods\n2. Results",
    "section_write": "Collected finding for this section [1].",
    "simulated_user": "What should we look at next?",
    "rubric_grade": "4",
    "intent_decision": "Potential Answer",
}


def make_gateways(
    *,
    constants: dict[str, str] | None = None,
    cycles: dict[str, list[str]] | None = None,
    exact: dict | None = None,
    search_results: dict[str, list[WebResult]] | None = None,
    synthesize_missing: bool = True,
    vectors: dict[str, list[float]] | None = None,
    dim: int = 32,
) -> Gateways:
    script = dict(BASE_SCRIPT)
    if constants:
        script.update(constants)
    # templates routed through a cycle must not also resolve as constants
    for template_id in cycles or ():
        script.pop(template_id, None)
    return Gateways(
        lm=ScriptedLM(exact=exact, cycles=cycles, constants=script),
        search=ScriptedSearch(
            results=search_results, synthesize_missing=synthesize_missing
        ),
        embedder=ScriptedEmbedder(vectors=vectors, dim=dim),
    )


def utt(
    turn_index: int,
    actor: Actor,
    intent: Intent,
    text: str = "something",
    citations: tuple[str, ...] = (),
) -> Utterance:
    return Utterance(
        turn_index=turn_index, actor=actor, intent=intent, text=text, citations=citations
    )


def web_result(url: str, title: str = "", snippets: list[str] | None = None) -> WebResult:
    return WebResult(
        url=url,
        title=title or url,
        snippets=snippets if snippets is not None else [f"Notes about {url}."],
    )


def snip(
    sid: str,
    question: str,
    embedder,
    *,
    url: str = "",
    excerpt: str = "",
    turn: int = 0,
) -> "InfoSnippet":
    from roundtable.mindmap import InfoSnippet

    excerpt = excerpt or f"Notes about {question}"
    return InfoSnippet(
        id=sid,
        url=url or f"https://sources.example/{sid}",
        title=f"Title for {sid}",
        excerpt=excerpt,
        question=question,
        query=question,
        question_embedding=embedder.embed(question),
        excerpt_embedding=embedder.embed(excerpt),
        retrieved_at_turn=turn,
    )


def fresh_state(config=None, topic: str = "Topic"):
    """Bare steady-state session shell for exercising agents directly."""
    from roundtable.agents.experts import Persona
    from roundtable.budget import BudgetCounter
    from roundtable.engine.events import EventLog
    from roundtable.engine.session import SessionState
    from roundtable.mindmap import MindMap
    from roundtable.turns import EngineConfig

    config = config or EngineConfig()
    return SessionState(
        topic=topic,
        goal=None,
        config=config,
        personas=[
            Persona(f"Role {i + 1}", f"watches angle {i + 1}")
            for i in range(config.n_experts)
        ],
        mind_map=MindMap(topic),
        budget=BudgetCounter(config.search_budget),
        event_log=EventLog(),
    )
