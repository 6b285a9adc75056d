"""Budgeted evaluation runs: simulated user, RAG baseline, session driver.

Both pipelines are driven until the shared search budget is spent, so their
transcripts are comparable at identical retrieval cost. Every search() call
counts against the budget, the initial background search included.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..agents.citations import CitedText
from ..agents.experts import grounded_answer
from ..budget import BudgetCounter
from ..engine.events import Event, EventLog
from ..engine.session import advance, inject_user_utterance, start_session
from ..errors import BudgetExhausted, EmptyMapError
from ..gateways.base import Gateways
from ..gateways.filtering import canonical_url
from ..mindmap import InfoSnippet
from ..prompts import INSUFFICIENT_GROUNDING_HEDGE, spec
from ..report import Report, generate_report
from ..turns import Actor, EngineConfig, Intent, Phase, Utterance, speaker_line
from ..vectors import Embedding
from .wildseek import SeekCase

RAG_STYLE = "a helpful research assistant"


@dataclass
class TranscriptLog:
    pipeline: str  # "costorm" | "rag"
    case: SeekCase
    utterances: list[Utterance] = field(default_factory=list)
    snippet_index: dict[str, InfoSnippet] = field(default_factory=dict)
    searches: int = 0
    events: list[Event] = field(default_factory=list)
    report: Report | None = None

    @property
    def snippet_urls(self) -> dict[str, str]:
        return {sid: s.url for sid, s in self.snippet_index.items()}

    def text(self) -> str:
        return "\n".join(speaker_line(u) for u in self.utterances)

    def cited_snippet_embeddings(self) -> list[Embedding]:
        """Excerpt embeddings of snippets cited by answering turns, each
        snippet once, in first-citation order."""
        seen: list[str] = []
        for utt in self.utterances:
            if not utt.intent.is_question_answering:
                continue
            for sid in utt.citations:
                if sid not in seen and sid in self.snippet_index:
                    seen.append(sid)
        return [self.snippet_index[sid].excerpt_embedding for sid in seen]

    def to_json(self) -> dict:
        return {
            "pipeline": self.pipeline,
            "case": self.case.to_dict(),
            "utterances": [u.to_dict() for u in self.utterances],
            "searches": self.searches,
            "snippets": {
                sid: {"url": s.url, "title": s.title} for sid, s in self.snippet_index.items()
            },
            "report": self.report.to_json() if self.report else None,
        }


def simulate_user(case: SeekCase, history: str, gateways: Gateways) -> str:
    """One follow-up question from the simulated user with the stated goal."""
    prompt = spec(
        "simulated_user",
        topic=case.topic,
        goal=case.goal,
        history=history or "(the discourse has not started)",
    )
    return gateways.lm.complete(prompt).strip()


@dataclass
class RagStep:
    question: str
    cited: CitedText
    snippets: list[InfoSnippet]


def rag_chatbot_step(
    question: str,
    gateways: Gateways,
    budget: BudgetCounter,
    *,
    topic: str = "",
    id_start: int = 0,
) -> RagStep:
    """One question, one search, one grounded answer. No mind map, no
    personas. Empty retrieval degrades to the hedge sentence."""
    if not question.strip():
        raise ValueError("question must be nonempty")
    results = gateways.search.search(question, budget)
    q_emb = gateways.embedder.embed(question)
    snippets: list[InfoSnippet] = []
    seen: set[str] = set()
    seq = id_start
    for result in results:
        key = canonical_url(result.url)
        if key in seen:
            continue
        seen.add(key)
        excerpt = result.excerpt()
        if not excerpt:
            continue
        seq += 1
        snippets.append(
            InfoSnippet(
                id=f"r{seq:04d}",
                url=result.url,
                title=result.title,
                excerpt=excerpt,
                question=question,
                query=question,
                question_embedding=q_emb,
                excerpt_embedding=gateways.embedder.embed(excerpt),
            )
        )
    if not snippets:
        return RagStep(question, CitedText(INSUFFICIENT_GROUNDING_HEDGE, {}), [])
    cited = grounded_answer(topic, question, snippets, RAG_STYLE, gateways)
    for snippet in snippets:
        snippet.cited = snippet.id in cited.citation_map.values()
    return RagStep(question, cited, snippets)


def _run_costorm(case: SeekCase, budget: int, gateways: Gateways, config: EngineConfig) -> TranscriptLog:
    state = start_session(case.topic, case.goal, config, gateways)
    experts_since_user = 0
    max_steps = budget * 8 + 32  # guards against scripts that never search
    steps = 0
    while state.phase is not Phase.TERMINATED and steps < max_steps:
        steps += 1
        if (
            state.phase is Phase.STEADY
            and experts_since_user >= config.n_experts
            and state.pending_user_text is None
        ):
            question = simulate_user(
                case, "\n".join(speaker_line(u) for u in state.history), gateways
            )
            inject_user_utterance(state, question)
        pre_phase = state.phase
        try:
            utterance = advance(state, gateways)
        except BudgetExhausted:
            break
        if utterance.actor.kind == "user":
            experts_since_user = 0
        elif utterance.actor.is_expert and pre_phase is Phase.STEADY:
            experts_since_user += 1
    report: Report | None = None
    try:
        report = generate_report(state.mind_map, state, gateways)
    except EmptyMapError:
        report = None
    return TranscriptLog(
        pipeline="costorm",
        case=case,
        utterances=list(state.history),
        snippet_index=dict(state.mind_map.snippets),
        searches=state.budget.spent,
        events=list(state.event_log.events),
        report=report,
    )


def _run_rag(case: SeekCase, budget: int, gateways: Gateways) -> TranscriptLog:
    counter = BudgetCounter(budget)
    log = EventLog()
    utterances: list[Utterance] = []
    snippet_index: dict[str, InfoSnippet] = {}
    while True:
        question = simulate_user(
            case, "\n".join(speaker_line(u) for u in utterances), gateways
        )
        try:
            step = rag_chatbot_step(
                question,
                gateways,
                counter,
                topic=case.topic,
                id_start=len(snippet_index),
            )
        except BudgetExhausted:
            log.append("terminate", {"reason": "budget_exhausted", "aborted_turn": True})
            break
        log.append(
            "search", {"query": question, "urls": [s.url for s in step.snippets]}
        )
        if not step.snippets:
            log.append("warning", {"kind": "empty_retrieval", "question": question})
        for snippet in step.snippets:
            snippet_index[snippet.id] = snippet
        utterances.append(
            Utterance(
                turn_index=len(utterances),
                actor=Actor.user(),
                intent=Intent.ORIGINAL_QUESTION,
                text=question,
            )
        )
        utterances.append(
            Utterance(
                turn_index=len(utterances),
                actor=Actor.expert(0),
                intent=Intent.POTENTIAL_ANSWER,
                text=step.cited.text,
                citations=tuple(step.cited.cited_snippet_ids()),
                queries_issued=(question,),
            )
        )
        if counter.exhausted:
            log.append("terminate", {"reason": "budget_exhausted", "aborted_turn": False})
            break
    return TranscriptLog(
        pipeline="rag",
        case=case,
        utterances=utterances,
        snippet_index=snippet_index,
        searches=counter.spent,
        events=list(log.events),
        report=None,
    )


def run_budgeted(
    pipeline: str,
    case: SeekCase,
    budget: int,
    gateways: Gateways,
    *,
    config: EngineConfig | None = None,
) -> TranscriptLog:
    """Drive one case until the search counter reaches the budget exactly;
    never issues search number budget+1."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if pipeline == "costorm":
        cfg = config or EngineConfig(search_budget=budget)
        if cfg.search_budget != budget:
            raise ValueError("config.search_budget must equal the requested budget")
        return _run_costorm(case, budget, gateways, cfg)
    if pipeline == "rag":
        return _run_rag(case, budget, gateways)
    raise ValueError(f"unknown pipeline {pipeline!r}")


def case_metrics(log: TranscriptLog) -> dict:
    from .metrics import info_diversity, unique_cited_urls

    embs = log.cited_snippet_embeddings()
    return {
        "pipeline": log.pipeline,
        "domain": log.case.domain,
        "topic": log.case.topic,
        "turns": len(log.utterances),
        "searches": log.searches,
        "unique_cited_urls": unique_cited_urls(log),
        "info_diversity": round(info_diversity(embs), 6) if len(embs) >= 2 else None,
        "report_sections": len(log.report.sections) if log.report else 0,
        "report_references": len(log.report.references) if log.report else 0,
    }


CSV_COLUMNS = [
    "pipeline",
    "domain",
    "topic",
    "turns",
    "searches",
    "unique_cited_urls",
    "info_diversity",
    "report_sections",
    "report_references",
]


def write_metrics_csv(rows: list[dict], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if row.get(k) is None else row.get(k)) for k in CSV_COLUMNS})


def summarize_metrics(rows: list[dict]) -> dict:
    """Per-pipeline means of the numeric columns."""
    summary: dict = {}
    for pipeline in sorted({r["pipeline"] for r in rows}):
        subset = [r for r in rows if r["pipeline"] == pipeline]
        agg: dict = {"cases": len(subset)}
        for key in ("turns", "searches", "unique_cited_urls", "info_diversity",
                    "report_sections", "report_references"):
            values = [r[key] for r in subset if r[key] is not None]
            agg[f"mean_{key}"] = round(sum(values) / len(values), 6) if values else None
        summary[pipeline] = agg
    return summary


def write_summary_json(summary: dict, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")
