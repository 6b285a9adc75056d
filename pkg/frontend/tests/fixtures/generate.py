"""Regenerate the UI test fixtures from a scripted 12-turn session.

Run from the repository root:

    python3 frontend/tests/fixtures/generate.py

Drives the session service registry against fixtures/demo, with one user
steering injection before turn 5, and dumps the exact bodies the HTTP
endpoints serve: snapshot, mind map, report, and the event log lines.
"""

from __future__ import annotations

import pathlib
import sys
import tempfile

from roundtable.gateways.config import GatewayConfig, build_gateways
from roundtable.service.registry import SessionRegistry

HERE = pathlib.Path(__file__).resolve().parent
REPO = HERE.parents[2]
STEER = "Which storage chemistries are safest?"


def main() -> int:
    config = GatewayConfig(mode="scripted", fixtures_dir=str(REPO / "fixtures" / "demo"))
    with tempfile.TemporaryDirectory() as data_dir:
        registry = SessionRegistry(lambda: build_gateways(config), data_dir)
        record = registry.create(
            "Grid scale battery storage", "survey the field", {"search_budget": 100}
        )
        sid = record.session_id
        for step in range(12):
            if step == 5:
                registry.inject(sid, STEER)
            registry.step(sid)

        (HERE / "snapshot.json").write_text(
            registry.snapshot_body(sid) + "\n", encoding="utf-8"
        )
        (HERE / "mindmap.json").write_text(
            registry.mindmap_body(sid) + "\n", encoding="utf-8"
        )
        (HERE / "report.json").write_text(registry.report(sid) + "\n", encoding="utf-8")
        lines = [e.to_line() for e in registry.events_view(sid)]
        (HERE / "events.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")
        registry.shutdown()
    print(f"wrote fixtures for session {sid}: {len(lines)} events")
    return 0


if __name__ == "__main__":
    sys.exit(main())
