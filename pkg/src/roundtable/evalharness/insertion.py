"""Controlled placement benchmark: put one snippet back into a fixed outline.

Each task carries a concept outline, a snippet, and the gold node path. Three
placement methods are compared: cosine argmax over concept paths, pure LM
navigation from the root, and the two-stage procedure the live map uses. A
placement is exact when it lands on the gold node and partial when it lands on
the gold node or one of its proper ancestors. Placements that stay malformed
after the retry count as misses.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..gateways.base import Embedder, Gateways
from ..mindmap import (
    DEFAULT_CANDIDATES,
    InfoSnippet,
    MindMap,
    _choose_among_candidates,
    _navigate,
    candidate_concepts,
)

METHODS = ("embedding_only", "lm_only", "hybrid")

METHOD_LABELS = {
    "embedding_only": "Embedding only",
    "lm_only": "Language Model only",
    "hybrid": "Two-stage insert",
}


def outline_from_nested(topic: str, nodes: list[dict]) -> MindMap:
    """Build a fixed outline from [{label, children: [...]}] nesting."""
    outline = MindMap(topic)

    def grow(parent: str, entries: list[dict]) -> None:
        for entry in entries:
            child = outline.create_child(parent, entry["label"])
            grow(child, entry.get("children", []))

    grow(outline.root, nodes)
    return outline


@dataclass(frozen=True, eq=False)
class InsertionTask:
    outline: MindMap
    snippet: InfoSnippet
    gold_path: tuple[str, ...]

    def __post_init__(self) -> None:
        if not (1 <= len(self.gold_path) <= 3):
            raise ValueError("gold_path must have one to three labels")
        self.gold_node_id()  # existence check

    def gold_node_id(self) -> str:
        current = self.outline.root
        for label in self.gold_path:
            want = label.strip().lower()
            for cid in self.outline.nodes[current].children:
                if self.outline.nodes[cid].label.lower() == want:
                    current = cid
                    break
            else:
                raise ValueError(f"gold_path {self.gold_path!r} not in outline")
        return current

    @property
    def level(self) -> int:
        return len(self.gold_path)


def task_from_dict(data: dict, embedder: Embedder, *, seq: int = 0) -> InsertionTask:
    outline = outline_from_nested(data.get("topic", "outline"), data["outline"])
    raw = data["snippet"]
    question = raw["question"]
    excerpt = raw["excerpt"]
    snippet = InfoSnippet(
        id=f"t{seq:04d}",
        url=raw["url"],
        title=raw.get("title", raw["url"]),
        excerpt=excerpt,
        question=question,
        query=raw.get("query", question),
        question_embedding=embedder.embed(question),
        excerpt_embedding=embedder.embed(excerpt),
    )
    return InsertionTask(
        outline=outline, snippet=snippet, gold_path=tuple(data["gold_path"])
    )


def load_insertion_tasks(path: str | Path, embedder: Embedder) -> list[InsertionTask]:
    """Tasks from JSONL: {topic?, outline: [...], snippet: {...}, gold_path: [...]}."""
    tasks: list[InsertionTask] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                tasks.append(task_from_dict(json.loads(line), embedder, seq=lineno))
            except (KeyError, ValueError, TypeError) as exc:
                raise ValueError(f"bad insertion task at line {lineno}: {exc}") from exc
    return tasks


def place(method: str, task: InsertionTask, gateways: Gateways) -> tuple[str, ...] | None:
    """Below-root label path chosen by the method, or None on a miss.

    Runs on copies, so the task outline never mutates and LM-created nodes
    stay local to the attempt.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    outline = task.outline.copy()
    snippet = task.snippet
    node: str | None = None
    if method == "embedding_only":
        ranked = candidate_concepts(
            outline, snippet.question_embedding, 1, gateways.embedder
        )
        node = ranked[0][0] if ranked else None
    elif method == "lm_only":
        node = _navigate(outline, snippet, gateways.lm, outline.root)
    else:  # hybrid: candidate shortlist first, navigation on explicit no-choice
        ranked = candidate_concepts(
            outline, snippet.question_embedding, DEFAULT_CANDIDATES, gateways.embedder
        )
        if ranked:
            outcome, chosen = _choose_among_candidates(
                outline, snippet, ranked, gateways.lm
            )
            if outcome == "node":
                node = chosen
            elif outcome == "none":
                node = _navigate(outline, snippet, gateways.lm, outline.root)
        else:
            node = _navigate(outline, snippet, gateways.lm, outline.root)
    if node is None or node == outline.root:
        return None
    return outline.path_labels(node)[1:]


def is_exact(chosen: tuple[str, ...] | None, gold: tuple[str, ...]) -> bool:
    return chosen == gold


def is_partial(chosen: tuple[str, ...] | None, gold: tuple[str, ...]) -> bool:
    """Exact placement, or a proper ancestor of the gold node."""
    if chosen is None:
        return False
    if chosen == gold:
        return True
    return len(chosen) < len(gold) and gold[: len(chosen)] == chosen


@dataclass
class LevelStats:
    tasks: int = 0
    exact: int = 0
    partial: int = 0

    @property
    def accuracy(self) -> float | None:
        return None if self.tasks == 0 else self.exact / self.tasks

    @property
    def partial_accuracy(self) -> float | None:
        return None if self.tasks == 0 else self.partial / self.tasks


@dataclass(frozen=True)
class TaskResult:
    level: int
    gold_path: tuple[str, ...]
    chosen_path: tuple[str, ...] | None
    exact: bool
    partial: bool


@dataclass
class AccuracyReport:
    method: str
    by_level: dict[int, LevelStats] = field(default_factory=dict)
    results: list[TaskResult] = field(default_factory=list)

    @property
    def total_tasks(self) -> int:
        return sum(s.tasks for s in self.by_level.values())

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "levels": {
                str(level): {
                    "tasks": s.tasks,
                    "exact": s.exact,
                    "partial": s.partial,
                    "accuracy": s.accuracy,
                    "partial_accuracy": s.partial_accuracy,
                }
                for level, s in sorted(self.by_level.items())
            },
            "total_tasks": self.total_tasks,
        }


def insertion_benchmark(
    tasks: list[InsertionTask], method: str, gateways: Gateways
) -> AccuracyReport:
    """Per-level exact and partial accuracy of one method over the tasks."""
    report = AccuracyReport(method=method)
    for task in tasks:
        chosen = place(method, task, gateways)
        exact = is_exact(chosen, task.gold_path)
        partial = is_partial(chosen, task.gold_path)
        stats = report.by_level.setdefault(task.level, LevelStats())
        stats.tasks += 1
        stats.exact += int(exact)
        stats.partial += int(partial)
        report.results.append(
            TaskResult(
                level=task.level,
                gold_path=task.gold_path,
                chosen_path=chosen,
                exact=exact,
                partial=partial,
            )
        )
    return report


def _pct(value: float | None) -> str:
    return "-" if value is None else f"{value * 100:.2f}"


def format_insertion_table(reports: list[AccuracyReport]) -> str:
    """Methods as rows; First-Level Acc., then Acc. + Partial Acc. for the
    second and third levels, as percentages."""
    header1 = f"{'':24}{'First-Level':>12}  {'Second-Level':>24}  {'Third-Level':>24}"
    header2 = (
        f"{'Method':24}{'Acc.':>12}  {'Acc.':>10} {'Partial Acc.':>13}"
        f"  {'Acc.':>10} {'Partial Acc.':>13}"
    )
    lines = [header1, header2, "-" * len(header2)]
    for report in reports:
        label = METHOD_LABELS.get(report.method, report.method)
        l1 = report.by_level.get(1, LevelStats())
        l2 = report.by_level.get(2, LevelStats())
        l3 = report.by_level.get(3, LevelStats())
        lines.append(
            f"{label:24}{_pct(l1.accuracy):>12}"
            f"  {_pct(l2.accuracy):>10} {_pct(l2.partial_accuracy):>13}"
            f"  {_pct(l3.accuracy):>10} {_pct(l3.partial_accuracy):>13}"
        )
    return "\n".join(lines)
