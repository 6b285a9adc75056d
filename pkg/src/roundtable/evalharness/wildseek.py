"""WildSeek-style task loading: JSON-lines of {domain, topic, goal}."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..errors import SchemaError

OFFICIAL_CASES = 100
OFFICIAL_DOMAINS = 24

_FIELDS = ("domain", "topic", "goal")


@dataclass(frozen=True)
class SeekCase:
    domain: str
    topic: str
    goal: str

    def __post_init__(self) -> None:
        for name in _FIELDS:
            if not getattr(self, name).strip():
                raise ValueError(f"SeekCase.{name} must be nonempty")

    def to_dict(self) -> dict:
        return {"domain": self.domain, "topic": self.topic, "goal": self.goal}


def _parse_line(line: str, lineno: int) -> SeekCase:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg}", line=lineno) from exc
    if not isinstance(record, dict):
        raise SchemaError("record is not an object", line=lineno)
    for name in _FIELDS:
        if name not in record:
            raise SchemaError(f"missing field {name!r}", line=lineno)
        if not isinstance(record[name], str) or not record[name].strip():
            raise SchemaError(f"field {name!r} must be a nonempty string", line=lineno)
    return SeekCase(record["domain"], record["topic"], record["goal"])


def _load_lines(lines, official: bool) -> list[SeekCase]:
    cases: list[SeekCase] = []
    seen: dict[SeekCase, int] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        case = _parse_line(line, lineno)
        if case in seen:
            raise SchemaError(
                f"duplicate of line {seen[case]}", line=lineno
            )
        seen[case] = lineno
        cases.append(case)
    if official:
        domains = {c.domain for c in cases}
        if len(cases) != OFFICIAL_CASES or len(domains) != OFFICIAL_DOMAINS:
            raise SchemaError(
                f"official file must hold {OFFICIAL_CASES} cases over "
                f"{OFFICIAL_DOMAINS} domains, got {len(cases)} over {len(domains)}"
            )
    return cases


def load_wildseek(path: str | Path, *, official: bool = False) -> list[SeekCase]:
    """Schema-validated cases; errors carry the offending line number.
    With official=True the file must hold exactly 100 cases over 24 domains."""
    with open(path, "r", encoding="utf-8") as fh:
        return _load_lines(fh, official)


def load_bundled_sample() -> list[SeekCase]:
    """The ten-case sample shipped with the package."""
    ref = resources.files("roundtable").joinpath("data/wildseek_sample.jsonl")
    with ref.open("r", encoding="utf-8") as fh:
        return _load_lines(fh, False)
