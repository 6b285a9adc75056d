"""Cited report generation from the mind map outline.

Sections follow to_outline() order and are written from each concept's own
snippets only. Local citation indices are verified per section, then
renumbered into one global reference list: first-appearance order, one index
per unique URL, contiguous 1..R.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from .agents.citations import CITATION_RE, citation_indices, parse_cited_text
from .agents.experts import format_numbered_snippets
from .errors import EmptyMapError
from .gateways.base import Gateways
from .mindmap import InfoSnippet, MindMap, to_outline
from .prompts import spec

if TYPE_CHECKING:
    from .engine.session import SessionState


@dataclass(frozen=True)
class Reference:
    index: int
    url: str
    title: str


@dataclass
class SectionDraft:
    heading_path: tuple[str, ...]
    paragraphs: list[str]
    citation_map: dict[int, str] = field(default_factory=dict)


@dataclass
class Section:
    heading_path: tuple[str, ...]
    paragraphs: list[str]


@dataclass
class Report:
    title: str
    sections: list[Section]
    references: list[Reference]

    def validate(self) -> None:
        indices = {r.index for r in self.references}
        expected = set(range(1, len(self.references) + 1))
        if indices != expected:
            raise ValueError("reference indices are not contiguous 1..R")
        cited: set[int] = set()
        for section in self.sections:
            for para in section.paragraphs:
                for idx in citation_indices(para):
                    if idx not in indices:
                        raise ValueError(f"paragraph cites missing reference [{idx}]")
                    cited.add(idx)
        if cited != indices:
            raise ValueError(f"orphan references: {sorted(indices - cited)}")

    def to_markdown(self) -> str:
        lines = [f"# {self.title}", ""]
        for section in self.sections:
            level = len(section.heading_path) + 1
            lines.append("#" * level + " " + section.heading_path[-1])
            lines.append("")
            for para in section.paragraphs:
                lines.append(para)
                lines.append("")
        lines.append("## References")
        lines.append("")
        for ref in self.references:
            lines.append(f"[{ref.index}] {ref.title}. {ref.url}")
        return "\n".join(lines).rstrip() + "\n"

    def to_json(self) -> dict:
        return {
            "title": self.title,
            "sections": [
                {
                    "heading": s.heading_path[-1],
                    "path": list(s.heading_path),
                    "paragraphs": list(s.paragraphs),
                }
                for s in self.sections
            ],
            "references": [
                {"index": r.index, "url": r.url, "title": r.title}
                for r in self.references
            ],
        }

    def to_json_text(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, ensure_ascii=False, indent=2)


def _split_paragraphs(text: str) -> list[str]:
    paras = [p.strip() for p in text.split("\n\n")]
    return [p for p in paras if p]


def renumber_citations(
    drafts: list[SectionDraft], snippet_index: dict[str, InfoSnippet], *, title: str
) -> Report:
    """Assign global indices in first-appearance order, URL-identical
    snippets sharing one index; section text is rewritten in place of the
    local markers. A local index without a mapping is a generation bug."""
    url_to_global: dict[str, int] = {}
    references: list[Reference] = []
    sections: list[Section] = []
    for draft in drafts:
        local_to_global: dict[int, int] = {}
        for para in draft.paragraphs:
            for local in citation_indices(para):
                if local in local_to_global:
                    continue
                if local not in draft.citation_map:
                    raise ValueError(
                        f"dangling local citation [{local}] in section "
                        f"{' > '.join(draft.heading_path)!r}"
                    )
                snippet = snippet_index[draft.citation_map[local]]
                if snippet.url not in url_to_global:
                    url_to_global[snippet.url] = len(references) + 1
                    references.append(
                        Reference(len(references) + 1, snippet.url, snippet.title)
                    )
                local_to_global[local] = url_to_global[snippet.url]
        rewritten = [
            CITATION_RE.sub(lambda m: f"[{local_to_global[int(m.group(1))]}]", para)
            for para in draft.paragraphs
        ]
        sections.append(Section(draft.heading_path, rewritten))
    report = Report(title, sections, references)
    report.validate()
    return report


def generate_report(
    map: MindMap, session: "SessionState", gateways: Gateways
) -> Report:
    """Write one section per outline concept from that concept's snippets,
    then renumber citations globally. A section that comes back with no valid
    citation is regenerated once and otherwise included with a warning."""
    outline = to_outline(map)
    if not outline:
        raise EmptyMapError("no concepts with snippets to report on")
    drafts: list[SectionDraft] = []
    for path, snippet_ids in outline:
        snippets = [map.snippets[sid] for sid in snippet_ids]
        prompt = spec(
            "section_write",
            topic=map.topic,
            heading=" > ".join(path),
            info=format_numbered_snippets(snippets),
        )
        cited = None
        for attempt in range(2):
            raw = gateways.lm.complete(prompt).strip()
            parsed, stripped = parse_cited_text(raw, snippet_ids)
            if stripped:
                session.event_log.append(
                    "warning",
                    {
                        "kind": "grounding_violation",
                        "section": list(path),
                        "stripped_indices": sorted(set(stripped)),
                    },
                )
            if parsed.citation_map:
                cited = parsed
                break
            cited = parsed
        if not cited.citation_map:
            session.event_log.append(
                "warning", {"kind": "uncited_section", "section": list(path)}
            )
        drafts.append(
            SectionDraft(
                heading_path=path,
                paragraphs=_split_paragraphs(cited.text),
                citation_map=dict(cited.citation_map),
            )
        )
    report = renumber_citations(drafts, map.snippets, title=map.topic)
    session.event_log.append(
        "report_generated",
        {
            "title": report.title,
            "sections": len(report.sections),
            "references": len(report.references),
            "map_version": map.mutation_count,
        },
    )
    return report
