"""Dynamic tree of concepts organizing every retrieved snippet.

The map supports three operations: insert (embedding candidates first, then
layer-by-layer navigation as fallback), reorganize (split an overfull concept
into LM-proposed subtopics), and clean (bottom-up deletion of empty concepts
and collapse of snippetless single-child concepts, to a fixed point).

Structural rules enforced throughout: single-parent tree, labels unique among
siblings, the root never holds snippets directly, and no concept sits deeper
than MAX_DEPTH. Snippets are never dropped: an unplaceable snippet lands in
an "Uncategorized" child of the root.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable

from .errors import EmptyMapError
from .gateways.base import Embedder, Gateways, LanguageModel, ParseError, complete_checked
from .prompts import spec
from .vectors import Embedding, cosine

MAX_DEPTH = 3
DEFAULT_CANDIDATES = 5
UNCATEGORIZED_LABEL = "Uncategorized"

EmitFn = Callable[[str, dict], None]


def _no_emit(event_type: str, payload: dict) -> None:
    return None


@dataclass
class ConceptNode:
    id: str
    label: str
    children: list[str] = field(default_factory=list)
    snippet_ids: list[str] = field(default_factory=list)

    def copy(self) -> "ConceptNode":
        return ConceptNode(self.id, self.label, list(self.children), list(self.snippet_ids))


@dataclass
class InfoSnippet:
    """A retrieved passage tied to the discourse question that produced it."""

    id: str
    url: str
    title: str
    excerpt: str
    question: str
    query: str
    question_embedding: Embedding
    excerpt_embedding: Embedding
    cited: bool = False
    retrieved_at_turn: int = 0

    def copy(self) -> "InfoSnippet":
        return InfoSnippet(
            id=self.id,
            url=self.url,
            title=self.title,
            excerpt=self.excerpt,
            question=self.question,
            query=self.query,
            question_embedding=self.question_embedding,
            excerpt_embedding=self.excerpt_embedding,
            cited=self.cited,
            retrieved_at_turn=self.retrieved_at_turn,
        )


@dataclass
class Placement:
    snippet_id: str
    node_id: str
    path: tuple[str, ...]
    stage: str  # "candidates" | "navigation" | "fallback"
    degraded: bool = False


class MindMap:
    ROOT_ID = "root"

    def __init__(self, topic: str):
        self.root = self.ROOT_ID
        self.nodes: dict[str, ConceptNode] = {
            self.ROOT_ID: ConceptNode(self.ROOT_ID, topic)
        }
        self.snippets: dict[str, InfoSnippet] = {}
        self._node_seq = 0
        self.mutation_count = 0

    # -- structure helpers -------------------------------------------------

    @property
    def topic(self) -> str:
        return self.nodes[self.root].label

    def is_empty(self) -> bool:
        return not self.nodes[self.root].children

    def parent_of(self, node_id: str) -> str | None:
        for nid, node in self.nodes.items():
            if node_id in node.children:
                return nid
        return None

    def depth(self, node_id: str) -> int:
        depth = 0
        current = node_id
        while current != self.root:
            parent = self.parent_of(current)
            if parent is None:
                raise ValueError(f"node {node_id!r} is not attached to the tree")
            current = parent
            depth += 1
        return depth

    def path_labels(self, node_id: str) -> tuple[str, ...]:
        """Labels from the root down to the node, root included."""
        labels: list[str] = []
        current = node_id
        while True:
            labels.append(self.nodes[current].label)
            if current == self.root:
                break
            current = self.parent_of(current)  # type: ignore[assignment]
        return tuple(reversed(labels))

    def path_text(self, node_id: str) -> str:
        return " > ".join(self.path_labels(node_id))

    def walk(self, start: str | None = None) -> list[str]:
        """Depth-first node ids in child insertion order, start included."""
        start = start or self.root
        out: list[str] = []
        stack = [start]
        while stack:
            nid = stack.pop()
            out.append(nid)
            stack.extend(reversed(self.nodes[nid].children))
        return out

    def subtree_snippet_count(self, node_id: str) -> int:
        return sum(len(self.nodes[nid].snippet_ids) for nid in self.walk(node_id))

    def find_snippet_node(self, snippet_id: str) -> str | None:
        for nid in self.walk():
            if snippet_id in self.nodes[nid].snippet_ids:
                return nid
        return None

    # -- mutations ----------------------------------------------------------

    def create_child(self, parent_id: str, label: str) -> str:
        """New child concept; reuses an existing child when the label matches."""
        label = label.strip()
        if not label:
            raise ValueError("concept label must be nonempty")
        parent = self.nodes[parent_id]
        for cid in parent.children:
            if self.nodes[cid].label.lower() == label.lower():
                return cid
        if self.depth(parent_id) >= MAX_DEPTH:
            raise ValueError(f"cannot create a child below depth {MAX_DEPTH}")
        self._node_seq += 1
        nid = f"c{self._node_seq:04d}"
        self.nodes[nid] = ConceptNode(nid, label)
        parent.children.append(nid)
        self.mutation_count += 1
        return nid

    def attach_snippet(self, snippet: InfoSnippet, node_id: str) -> None:
        if node_id == self.root:
            raise ValueError("the root never holds snippets directly")
        self.snippets[snippet.id] = snippet
        self.nodes[node_id].snippet_ids.append(snippet.id)
        self.mutation_count += 1

    def move_snippet(self, snippet_id: str, node_id: str) -> None:
        if node_id == self.root:
            raise ValueError("the root never holds snippets directly")
        source = self.find_snippet_node(snippet_id)
        if source is None:
            raise ValueError(f"snippet {snippet_id!r} is not in the map")
        if source == node_id:
            return
        self.nodes[source].snippet_ids.remove(snippet_id)
        self.nodes[node_id].snippet_ids.append(snippet_id)
        self.mutation_count += 1

    def delete_node(self, node_id: str) -> None:
        """Remove a leafless, snippetless node from its parent."""
        node = self.nodes[node_id]
        if node.children or node.snippet_ids:
            raise ValueError("only empty nodes may be deleted")
        parent = self.parent_of(node_id)
        if parent is None:
            raise ValueError("cannot delete the root")
        self.nodes[parent].children.remove(node_id)
        del self.nodes[node_id]
        self.mutation_count += 1

    # -- copies and export ---------------------------------------------------

    def copy(self) -> "MindMap":
        dup = MindMap(self.topic)
        dup.nodes = {nid: node.copy() for nid, node in self.nodes.items()}
        dup.snippets = {sid: s.copy() for sid, s in self.snippets.items()}
        dup._node_seq = self._node_seq
        dup.mutation_count = self.mutation_count
        return dup

    def export(self) -> dict:
        """Snapshot consumed by the UI and the report generator."""
        return {
            "nodes": [
                {
                    "id": nid,
                    "label": self.nodes[nid].label,
                    "children": list(self.nodes[nid].children),
                    "snippet_ids": list(self.nodes[nid].snippet_ids),
                }
                for nid in self.walk()
            ],
            "snippets": [
                {
                    "id": s.id,
                    "url": s.url,
                    "title": s.title,
                    "excerpt": s.excerpt,
                    "question": s.question,
                    "cited": s.cited,
                }
                for s in self.snippets.values()
            ],
        }

    def validate(self) -> None:
        """Full structural check; raises AssertionError on any violation."""
        seen_parent: dict[str, str] = {}
        for nid, node in self.nodes.items():
            labels = [self.nodes[c].label.lower() for c in node.children]
            assert len(labels) == len(set(labels)), f"duplicate sibling labels under {nid}"
            for child in node.children:
                assert child in self.nodes, f"dangling child {child}"
                assert child not in seen_parent, f"{child} has two parents"
                seen_parent[child] = nid
        reachable = set(self.walk())
        assert reachable == set(self.nodes), "unreachable nodes present"
        assert len(self.nodes) == len(seen_parent) + 1, "node/edge count mismatch"
        placed: list[str] = []
        for nid, node in self.nodes.items():
            if nid == self.root:
                assert not node.snippet_ids, "root holds snippets"
            placed.extend(node.snippet_ids)
        assert len(placed) == len(set(placed)), "a snippet appears in two nodes"
        assert set(placed) == set(self.snippets), "snippet index out of sync"
        for nid in self.nodes:
            assert self.depth(nid) <= MAX_DEPTH, f"{nid} exceeds depth {MAX_DEPTH}"


# -- read-side operations ----------------------------------------------------


def candidate_concepts(
    map: MindMap, q_emb: Embedding, m: int, embedder: Embedder
) -> list[tuple[str, float]]:
    """Top-m concepts by cosine between the question embedding and the
    embedding of each concept's root-to-node label path; root excluded."""
    if m < 1:
        raise ValueError("m must be at least 1")
    scored: list[tuple[str, float]] = []
    for nid in map.walk():
        if nid == map.root:
            continue
        emb = embedder.embed(map.path_text(nid))
        scored.append((nid, cosine(q_emb, emb)))
    scored.sort(key=lambda item: -item[1])
    return scored[:m]


def render_structure(map: MindMap, start: str | None = None) -> str:
    """'#'-leveled depth-first listing of the concept tree, root excluded.

    Levels reflect absolute depth, so a rendered subtree keeps the same
    markers it has in the full listing.
    """
    base = start or map.root
    lines: list[str] = []

    def visit(node_id: str, level: int) -> None:
        if node_id != map.root:
            lines.append("#" * level + " " + map.nodes[node_id].label)
        for child in map.nodes[node_id].children:
            visit(child, level + 1)

    visit(base, 0 if base == map.root else map.depth(base))
    return "\n".join(lines)


def to_outline(map: MindMap) -> list[tuple[tuple[str, ...], list[str]]]:
    """Ordered (heading path, snippet ids) pairs covering every snippet once.

    Only concepts holding snippets directly produce an entry; pure branch
    concepts appear inside their descendants' heading paths.
    """
    if map.is_empty():
        raise EmptyMapError("the mind map has no concepts to outline")
    outline: list[tuple[tuple[str, ...], list[str]]] = []
    for nid in map.walk():
        if nid == map.root:
            continue
        node = map.nodes[nid]
        if node.snippet_ids:
            path = map.path_labels(nid)[1:]  # drop the root/topic label
            outline.append((path, list(node.snippet_ids)))
    return outline


# -- LM-guided placement -------------------------------------------------------

_BEST_PLACEMENT_RE = re.compile(r"best\s+placement\s*:?\s*\[?\s*(\d+)\s*\]?", re.IGNORECASE)
_NO_CHOICE_RE = re.compile(r"no\s+reasonable\s+choice", re.IGNORECASE)


def _parse_candidate_decision(text: str, n_choices: int):
    if _NO_CHOICE_RE.search(text):
        return None
    m = _BEST_PLACEMENT_RE.search(text)
    if not m:
        raise ParseError(f"unrecognized placement decision: {text!r}")
    index = int(m.group(1))
    if not 1 <= index <= n_choices:
        raise ParseError(f"placement index {index} out of range 1..{n_choices}")
    return index


def _parse_navigation_choice(text: str) -> tuple[str, str]:
    cleaned = text.strip().strip("'\"").strip()
    first_line = cleaned.splitlines()[0].strip() if cleaned else ""
    low = first_line.lower()
    if low == "insert" or low.startswith("insert"):
        return ("insert", "")
    for verb in ("step", "create"):
        if low.startswith(verb):
            rest = first_line[len(verb):].lstrip(" :").strip()
            rest = rest.strip("[]'\" ").strip()
            if rest:
                return (verb, rest)
    raise ParseError(f"unrecognized navigation choice: {text!r}")


def _snippet_intent(snippet: InfoSnippet) -> str:
    return f"{snippet.question} (query: {snippet.query})"


def _choose_among_candidates(
    map: MindMap,
    snippet: InfoSnippet,
    candidates: list[tuple[str, float]],
    lm: LanguageModel,
) -> tuple[str, str | None]:
    """Returns ("node", node_id), ("none", None) on an explicit no-choice,
    or ("malformed", None) after the retry."""
    choices_text = "\n".join(
        f"{i + 1}. {' -> '.join(map.path_labels(nid))}"
        for i, (nid, _score) in enumerate(candidates)
    )
    prompt = spec(
        "insert_candidate_choice",
        intent=_snippet_intent(snippet),
        choices=choices_text,
    )
    sentinel = object()
    decision = complete_checked(
        lm,
        prompt,
        lambda text: _parse_candidate_decision(text, len(candidates)),
        default=lambda: sentinel,
    )
    if decision is sentinel:
        return ("malformed", None)
    if decision is None:
        return ("none", None)
    return ("node", candidates[decision - 1][0])


def _navigate(
    map: MindMap,
    snippet: InfoSnippet,
    lm: LanguageModel,
    start: str,
) -> str | None:
    """Layer-by-layer placement from start; None when the LM output stays
    malformed after the per-layer retry."""
    current = start
    while True:
        depth = map.depth(current)
        if depth >= MAX_DEPTH:
            return current
        prompt = spec(
            "insert_navigate",
            intent=_snippet_intent(snippet),
            structure=render_structure(map, start=current) or map.nodes[current].label,
        )
        sentinel = ("malformed", "")
        verb, arg = complete_checked(
            lm, prompt, _parse_navigation_choice, default=lambda: sentinel
        )
        if (verb, arg) == sentinel:
            return None
        if verb == "insert":
            if current == map.root:
                # the root cannot hold snippets; treat as malformed
                return None
            return current
        if verb == "step":
            child = _child_by_label(map, current, arg)
            if child is None:
                return None
            current = child
            continue
        # create
        child = _child_by_label(map, current, arg)
        if child is None:
            child = map.create_child(current, arg)
        return child


def _child_by_label(map: MindMap, node_id: str, label: str) -> str | None:
    want = label.strip().lower()
    for cid in map.nodes[node_id].children:
        if map.nodes[cid].label.lower() == want:
            return cid
    return None


def insert(
    map: MindMap,
    snippet: InfoSnippet,
    gateways: Gateways,
    *,
    m: int = DEFAULT_CANDIDATES,
    k_threshold: int = 10,
    emit: EmitFn = _no_emit,
) -> Placement:
    """Two-stage placement of one snippet, then threshold-triggered reorganize.

    Stage 1 offers the top-m candidate concepts to the LM; stage 2 (on an
    explicit no-choice or an empty map) navigates from the root. A choice that
    stays malformed after the retry degrades to the root's Uncategorized child
    rather than dropping the snippet.
    """
    if not snippet.question:
        raise ValueError("snippet.question must be nonempty")
    q_emb = snippet.question_embedding
    candidates = [] if map.is_empty() else candidate_concepts(map, q_emb, m, gateways.embedder)

    node_id: str | None = None
    stage = "candidates"
    degraded = False
    if candidates:
        outcome, chosen = _choose_among_candidates(map, snippet, candidates, gateways.lm)
        if outcome == "node":
            node_id = chosen
        elif outcome == "none":
            stage = "navigation"
            node_id = _navigate(map, snippet, gateways.lm, map.root)
        else:
            node_id = None
    else:
        stage = "navigation"
        node_id = _navigate(map, snippet, gateways.lm, map.root)

    if node_id is None:
        stage = "fallback"
        degraded = True
        node_id = map.create_child(map.root, UNCATEGORIZED_LABEL)
        emit(
            "warning",
            {"kind": "degraded_placement", "snippet_id": snippet.id},
        )

    map.attach_snippet(snippet, node_id)
    emit(
        "insert",
        {
            "snippet_id": snippet.id,
            "node_id": node_id,
            "url": snippet.url,
            "stage": stage,
        },
    )

    if len(map.nodes[node_id].snippet_ids) > k_threshold and map.depth(node_id) < MAX_DEPTH:
        reorganize(map, node_id, gateways, m=m, emit=emit)

    final_node = map.find_snippet_node(snippet.id)
    assert final_node is not None
    return Placement(
        snippet_id=snippet.id,
        node_id=final_node,
        path=map.path_labels(final_node),
        stage=stage,
        degraded=degraded,
    )


_NUMBERED_LINE_RE = re.compile(r"^\s*(?:\d+[.)]|-|\*)\s*(.+?)\s*$")


def _parse_subtopics(text: str) -> list[str]:
    labels: list[str] = []
    for line in text.splitlines():
        m = _NUMBERED_LINE_RE.match(line)
        if m:
            label = m.group(1).strip().strip("[]").strip()
            if label and label.lower() not in [x.lower() for x in labels]:
                labels.append(label)
    if not labels:
        raise ParseError(f"no subtopic lines found in {text!r}")
    return labels


def reorganize(
    map: MindMap,
    node_id: str,
    gateways: Gateways,
    *,
    m: int = DEFAULT_CANDIDATES,
    emit: EmitFn = _no_emit,
) -> MindMap:
    """Split an overfull concept into LM-proposed subtopics.

    Each direct snippet is re-placed via insert restricted to the subtree
    rooted at the node (no nested reorganize); unplaceable snippets stay on
    the node. Finishes with a bottom-up clean of the whole map.
    """
    node = map.nodes[node_id]
    if map.depth(node_id) >= MAX_DEPTH:
        return map

    questions = "\n".join(
        f"- {map.snippets[sid].question}" for sid in node.snippet_ids
    )
    prompt = spec("subtopic_split", node=node.label, questions=questions)
    labels = complete_checked(gateways.lm, prompt, _parse_subtopics, default=lambda: None)
    if labels is None:
        emit("warning", {"kind": "reorganize_failed", "node_id": node_id})
        return map

    for label in labels:
        try:
            map.create_child(node_id, label)
        except ValueError:
            continue

    for sid in list(node.snippet_ids):
        snippet = map.snippets[sid]
        target = _replace_within_subtree(map, snippet, node_id, gateways, m=m)
        if target is not None and target != node_id:
            map.move_snippet(sid, target)

    clean(map)
    emit("reorganize", {"node_id": node_id, "subtopics": labels})
    return map


def _replace_within_subtree(
    map: MindMap,
    snippet: InfoSnippet,
    subtree_root: str,
    gateways: Gateways,
    *,
    m: int,
) -> str | None:
    subtree = map.walk(subtree_root)
    scored = [
        (nid, cosine(snippet.question_embedding, gateways.embedder.embed(map.path_text(nid))))
        for nid in subtree
    ]
    scored.sort(key=lambda item: -item[1])
    candidates = scored[:m]
    outcome, chosen = _choose_among_candidates(map, snippet, candidates, gateways.lm)
    if outcome == "node":
        return chosen
    if outcome == "none":
        return _navigate(map, snippet, gateways.lm, subtree_root)
    return None


def clean(map: MindMap) -> MindMap:
    """Bottom-up cleanup to a fixed point: delete concepts whose subtree holds
    no snippets; collapse snippetless single-child concepts into their child
    (the child keeps its label, renamed only on a sibling collision)."""
    changed = True
    while changed:
        changed = False
        order = [nid for nid in map.walk() if nid != map.root]
        for nid in reversed(order):  # children before parents
            if nid not in map.nodes:
                continue
            node = map.nodes[nid]
            if map.subtree_snippet_count(nid) == 0:
                _delete_subtree(map, nid)
                changed = True
                continue
            if not node.snippet_ids and len(node.children) == 1:
                _collapse_into_child(map, nid)
                changed = True
    return map


def _delete_subtree(map: MindMap, node_id: str) -> None:
    parent = map.parent_of(node_id)
    assert parent is not None
    doomed = map.walk(node_id)
    map.nodes[parent].children.remove(node_id)
    for nid in doomed:
        del map.nodes[nid]
    map.mutation_count += 1


def _collapse_into_child(map: MindMap, node_id: str) -> None:
    parent = map.parent_of(node_id)
    assert parent is not None
    child_id = map.nodes[node_id].children[0]
    child = map.nodes[child_id]
    sibling_labels = {
        map.nodes[c].label.lower() for c in map.nodes[parent].children if c != node_id
    }
    if child.label.lower() in sibling_labels:
        base = child.label
        n = 2
        while f"{base} ({n})".lower() in sibling_labels:
            n += 1
        child.label = f"{base} ({n})"
    siblings = map.nodes[parent].children
    siblings[siblings.index(node_id)] = child_id
    del map.nodes[node_id]
    map.mutation_count += 1
