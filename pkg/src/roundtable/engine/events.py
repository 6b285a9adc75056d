"""Append-only session event log, one JSON object per line.

Events carry a monotonic index, a type, and a payload. The log holds no
timestamps or random ids, so a session replayed against the same scripted
gateways reproduces it byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

EVENT_TYPES = frozenset(
    {
        "session_start",
        "turn",
        "search",
        "insert",
        "reorganize",
        "persona_update",
        "inject",
        "report_generated",
        "warning",
        "terminate",
    }
)


@dataclass(frozen=True)
class Event:
    index: int
    type: str
    payload: dict

    def to_line(self) -> str:
        return json.dumps(
            {"index": self.index, "type": self.type, "payload": self.payload},
            sort_keys=True,
            ensure_ascii=False,
            separators=(",", ":"),
        )

    @classmethod
    def from_line(cls, line: str) -> "Event":
        data = json.loads(line)
        return cls(index=data["index"], type=data["type"], payload=data["payload"])


class EventLog:
    """In-memory event list with optional write-through to a JSONL file.

    Appends are flushed per line so a crashed process leaves a readable,
    replayable prefix.
    """

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self.events: list[Event] = []

    def append(self, event_type: str, payload: dict) -> Event:
        if event_type not in EVENT_TYPES:
            raise ValueError(f"unknown event type {event_type!r}")
        event = Event(index=len(self.events), type=event_type, payload=payload)
        self.events.append(event)
        if self.path is not None:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(event.to_line() + "\n")
                fh.flush()
        return event

    def extend(self, entries: list[tuple[str, dict]]) -> list[Event]:
        return [self.append(t, p) for t, p in entries]

    def to_lines(self) -> list[str]:
        return [e.to_line() for e in self.events]

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)


def load_events(path: str | Path) -> list[Event]:
    events: list[Event] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                events.append(Event.from_line(line))
    return events
