"""Automatic metrics: information diversity, unique cited URLs, rubric grading."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from ..gateways.base import LanguageModel, ParseError, complete_checked
from ..prompts import spec
from ..vectors import Embedding

if TYPE_CHECKING:
    from .runner import TranscriptLog

GRADING_WINDOW_WORDS = 2000


def info_diversity(embs: list[Embedding]) -> float:
    """1 - (sum of pairwise cosines over ordered pairs) / (n(n-1)); in [0, 2]."""
    n = len(embs)
    if n < 2:
        raise ValueError("info_diversity needs at least two embeddings")
    matrix = np.array([e.values for e in embs], dtype=np.float64)
    gram = matrix @ matrix.T
    off_diagonal = float(gram.sum() - np.trace(gram))
    return 1.0 - off_diagonal / (n * (n - 1))


def unique_cited_urls(log: "TranscriptLog") -> int:
    """Distinct URLs cited across the question-answering utterances."""
    urls: set[str] = set()
    for utt in log.utterances:
        if not utt.intent.is_question_answering:
            continue
        for sid in utt.citations:
            url = log.snippet_urls.get(sid)
            if url:
                urls.add(url)
    return len(urls)


def truncate_words(text: str, limit: int) -> str:
    """Keep the last `limit` whitespace-delimited words."""
    words = text.split()
    if len(words) <= limit:
        return text.strip()
    return " ".join(words[-limit:])


@dataclass(frozen=True)
class Rubric:
    name: str
    criterion: str
    scores: tuple[str, str, str, str, str]

    def __post_init__(self) -> None:
        if len(self.scores) != 5:
            raise ValueError("a rubric needs exactly five score descriptions")

    @classmethod
    def from_dict(cls, data: dict) -> "Rubric":
        raw = data["scores"]
        scores = tuple(raw[str(k)] for k in range(1, 6))
        return cls(name=data["name"], criterion=data["criterion"], scores=scores)


def load_rubric_file(path: str | Path) -> list[Rubric]:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return [Rubric.from_dict(entry) for entry in data["rubrics"]]


def load_bundled_rubrics(name: str) -> list[Rubric]:
    """Bundled rubric sets: "report", "turn_answering", or "turn_asking"."""
    ref = resources.files("roundtable").joinpath(f"data/rubrics/{name}.json")
    with ref.open("r", encoding="utf-8") as fh:
        data = json.load(fh)
    return [Rubric.from_dict(entry) for entry in data["rubrics"]]


_SCORE_RE = re.compile(r"[1-5]")


def _parse_score(text: str) -> int:
    stripped = text.strip()
    m = re.fullmatch(r"\[?\s*([0-9]+)\s*\]?", stripped)
    if m is None:
        m = _SCORE_RE.search(stripped)
        if m is None:
            raise ParseError(f"no score in {text!r}")
        return int(m.group(0))
    value = int(m.group(1))
    if not 1 <= value <= 5:
        raise ParseError(f"score {value} out of range 1..5")
    return value


def rubric_grade(text: str, rubric: Rubric, evaluator: LanguageModel) -> int:
    """Integer 1..5 from the evaluator model; the graded text is truncated to
    its last 2000 words first. Out-of-range output after the retry is an
    error, never a clamped score."""
    prompt = spec(
        "rubric_grade",
        criterion=rubric.criterion,
        score_1=rubric.scores[0],
        score_2=rubric.scores[1],
        score_3=rubric.scores[2],
        score_4=rubric.scores[3],
        score_5=rubric.scores[4],
        text=truncate_words(text, GRADING_WINDOW_WORDS),
    )
    return complete_checked(evaluator, prompt, _parse_score)
