"""Inline bracketed citations: parsing, verification, renumbering."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field

CITATION_RE = re.compile(r"\[(\d+)\]")


@dataclass
class CitedText:
    """Text with inline [k] markers plus the local index -> snippet id map.

    Valid only when both directions hold: every marker in the text is mapped,
    and every mapping is used by at least one marker.
    """

    text: str
    citation_map: dict[int, str] = field(default_factory=dict)

    def validate(self) -> None:
        used = set(citation_indices(self.text))
        mapped = set(self.citation_map)
        if used - mapped:
            raise ValueError(f"unmapped citation indices in text: {sorted(used - mapped)}")
        if mapped - used:
            raise ValueError(f"unreferenced citation mappings: {sorted(mapped - used)}")

    def cited_snippet_ids(self) -> list[str]:
        """Snippet ids in first-appearance order of their indices."""
        seen: list[int] = []
        for idx in citation_indices(self.text):
            if idx not in seen:
                seen.append(idx)
        return [self.citation_map[idx] for idx in seen]


def citation_indices(text: str) -> list[int]:
    """All bracketed indices in text order, duplicates preserved."""
    return [int(m.group(1)) for m in CITATION_RE.finditer(text)]


def citation_multiset(text: str) -> Counter:
    return Counter(citation_indices(text))


def parse_cited_text(text: str, snippet_ids: list[str]) -> tuple[CitedText, list[int]]:
    """Bind bracketed indices to snippet ids by position (index k -> k-th id).

    Out-of-range indices are stripped from the text and returned so the caller
    can log the grounding violation.
    """
    n = len(snippet_ids)
    stripped: list[int] = []

    def replace(match: re.Match) -> str:
        idx = int(match.group(1))
        if 1 <= idx <= n:
            return match.group(0)
        stripped.append(idx)
        return ""

    cleaned = CITATION_RE.sub(replace, text)
    cleaned = re.sub(r"  +", " ", cleaned).strip()
    mapping = {idx: snippet_ids[idx - 1] for idx in set(citation_indices(cleaned))}
    cited = CitedText(cleaned, mapping)
    cited.validate()
    return cited, stripped


def densify_citations(cited: CitedText) -> CitedText:
    """Renumber indices to 1..k in first-appearance order; text rewritten."""
    cited.validate()
    order: list[int] = []
    for idx in citation_indices(cited.text):
        if idx not in order:
            order.append(idx)
    renumber = {old: new + 1 for new, old in enumerate(order)}

    def replace(match: re.Match) -> str:
        return f"[{renumber[int(match.group(1))]}]"

    new_text = CITATION_RE.sub(replace, cited.text)
    new_map = {renumber[old]: sid for old, sid in cited.citation_map.items()}
    out = CitedText(new_text, new_map)
    out.validate()
    return out


def strip_citation_markers(text: str) -> str:
    """Remove [k] markers entirely (used for question-asking turns)."""
    out = CITATION_RE.sub("", text)
    out = re.sub(r"  +", " ", out)
    out = re.sub(r" +([.,;:!?])", r"\1", out)
    return out.strip()
