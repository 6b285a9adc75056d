from .citations import (
    CitedText,
    citation_indices,
    densify_citations,
    parse_cited_text,
    strip_citation_markers,
)
from .experts import (
    Persona,
    TurnOutput,
    decide_intent,
    expert_turn,
    generate_experts,
    generate_queries,
    grounded_answer,
    polish_utterance,
)
from .moderator import ModeratorResult, moderator_rerank, moderator_turn, rerank_score

__all__ = [
    "CitedText",
    "ModeratorResult",
    "Persona",
    "TurnOutput",
    "citation_indices",
    "decide_intent",
    "densify_citations",
    "expert_turn",
    "generate_experts",
    "generate_queries",
    "grounded_answer",
    "moderator_rerank",
    "moderator_turn",
    "parse_cited_text",
    "polish_utterance",
    "rerank_score",
    "strip_citation_markers",
]
