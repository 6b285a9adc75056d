"""Value types for the discourse engine: intents, actors, utterances, config."""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from pathlib import Path


class Intent(enum.Enum):
    ORIGINAL_QUESTION = "OriginalQuestion"
    INFORMATION_REQUEST = "InformationRequest"
    POTENTIAL_ANSWER = "PotentialAnswer"
    FURTHER_DETAILS = "FurtherDetails"

    @property
    def is_question_asking(self) -> bool:
        return self in (Intent.ORIGINAL_QUESTION, Intent.INFORMATION_REQUEST)

    @property
    def is_question_answering(self) -> bool:
        return not self.is_question_asking


_INTENT_PATTERNS = [
    (re.compile(r"original\s*question", re.IGNORECASE), Intent.ORIGINAL_QUESTION),
    (re.compile(r"information\s*request", re.IGNORECASE), Intent.INFORMATION_REQUEST),
    (re.compile(r"potential\s*answer", re.IGNORECASE), Intent.POTENTIAL_ANSWER),
    (re.compile(r"further\s*details?", re.IGNORECASE), Intent.FURTHER_DETAILS),
]


def parse_intent(text: str) -> Intent | None:
    """Tolerant intent extraction from an LM completion; None when absent."""
    for pattern, intent in _INTENT_PATTERNS:
        if pattern.search(text):
            return intent
    return None


@dataclass(frozen=True)
class Actor:
    kind: str  # "user" | "expert" | "moderator"
    expert_index: int | None = None

    @classmethod
    def user(cls) -> "Actor":
        return cls("user")

    @classmethod
    def expert(cls, index: int) -> "Actor":
        if index < 0:
            raise ValueError("expert index must be nonnegative")
        return cls("expert", index)

    @classmethod
    def moderator(cls) -> "Actor":
        return cls("moderator")

    @property
    def is_expert(self) -> bool:
        return self.kind == "expert"

    def label(self) -> str:
        if self.kind == "expert":
            return f"Expert {self.expert_index + 1}"
        return self.kind.capitalize()

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.expert_index is not None:
            out["expert_index"] = self.expert_index
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Actor":
        return cls(data["kind"], data.get("expert_index"))


@dataclass(frozen=True)
class Utterance:
    turn_index: int
    actor: Actor
    intent: Intent
    text: str
    citations: tuple[str, ...] = ()
    queries_issued: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.citations and self.intent.is_question_asking:
            raise ValueError("citations are only allowed on question-answering intents")

    def to_dict(self) -> dict:
        return {
            "turn_index": self.turn_index,
            "actor": self.actor.to_dict(),
            "intent": self.intent.value,
            "text": self.text,
            "citations": list(self.citations),
            "queries_issued": list(self.queries_issued),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Utterance":
        return cls(
            turn_index=data["turn_index"],
            actor=Actor.from_dict(data["actor"]),
            intent=Intent(data["intent"]),
            text=data["text"],
            citations=tuple(data.get("citations", ())),
            queries_issued=tuple(data.get("queries_issued", ())),
        )


class Phase(enum.Enum):
    WARM_UP = "WarmUp"
    STEADY = "Steady"
    TERMINATED = "Terminated"


@dataclass(frozen=True)
class EngineConfig:
    n_experts: int = 3
    reorg_threshold_k: int = 10
    answer_run_l: int = 2
    alpha: float = 0.5
    insert_candidates_m: int = 5
    history_window_words: int = 2000
    search_budget: int = 30

    def __post_init__(self) -> None:
        if self.n_experts < 1:
            raise ValueError("n_experts must be >= 1")
        if self.reorg_threshold_k < 2:
            raise ValueError("reorg_threshold_k must be >= 2")
        if self.answer_run_l < 1:
            raise ValueError("answer_run_l must be >= 1")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.insert_candidates_m < 1:
            raise ValueError("insert_candidates_m must be >= 1")
        if self.history_window_words < 1:
            raise ValueError("history_window_words must be >= 1")
        if self.search_budget < 1:
            raise ValueError("search_budget must be >= 1")

    def to_dict(self) -> dict:
        return {
            "n_experts": self.n_experts,
            "reorg_threshold_k": self.reorg_threshold_k,
            "answer_run_l": self.answer_run_l,
            "alpha": self.alpha,
            "insert_candidates_m": self.insert_candidates_m,
            "history_window_words": self.history_window_words,
            "search_budget": self.search_budget,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EngineConfig":
        known = {f: data[f] for f in cls.__dataclass_fields__ if f in data}
        return cls(**known)

    @classmethod
    def from_file(cls, path: str | Path) -> "EngineConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class ActorAssignment:
    actor: Actor
    reason: str  # "user_preempt" | "warm_up" | "moderator_trigger" | "round_robin"


def speaker_line(utterance: Utterance) -> str:
    return f"{utterance.actor.label()}: {utterance.text}"


def format_history(history: list[Utterance] | tuple[Utterance, ...], window_words: int) -> str:
    """Render the discourse history, truncated to the last window_words words.

    Truncation works backward line by line; the line crossing the limit keeps
    only its trailing words, so the window always ends at the newest turn.
    """
    if window_words < 1:
        raise ValueError("window_words must be >= 1")
    lines = [speaker_line(u) for u in history]
    kept: list[str] = []
    remaining = window_words
    for line in reversed(lines):
        words = line.split()
        if len(words) <= remaining:
            kept.append(line)
            remaining -= len(words)
        else:
            if remaining > 0:
                kept.append(" ".join(words[-remaining:]))
            remaining = 0
        if remaining == 0:
            break
    return "\n".join(reversed(kept))
