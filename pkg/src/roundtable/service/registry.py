"""Session registry behind the HTTP service.

One record per session: the live state, its gateways, a write-through event
log, and the last committed snapshot. Commands (step, inject, report) are
serialized per session through the record lock; reads serve the committed
snapshot without taking it. Crash recovery replays the persisted event log
against fresh gateways from the same factory.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from ..engine.events import Event, load_events
from ..engine.session import (
    SessionState,
    advance,
    inject_user_utterance,
    replay,
    start_session,
)
from ..errors import BudgetExhausted, GatewayError, SessionTerminated
from ..gateways.base import Gateways
from ..report import generate_report
from ..turns import EngineConfig, Phase, Utterance

GatewayFactory = Callable[[], Gateways]

LOG_NAME = "events.jsonl"
SNAPSHOT_NAME = "snapshot.json"


def snapshot_of(session_id: str, state: SessionState) -> dict:
    """Turn-boundary view of a session; everything a read endpoint serves."""
    return {
        "session_id": session_id,
        "topic": state.topic,
        "goal": state.goal,
        "phase": state.phase.value,
        "config": state.config.to_dict(),
        "history": [u.to_dict() for u in state.history],
        "personas": [p.to_dict() for p in state.personas],
        "mind_map": state.mind_map.export(),
        "map_version": state.mind_map.mutation_count,
        "budget": {
            "initial": state.budget.initial,
            "remaining": state.budget.remaining,
            "spent": state.budget.spent,
        },
        "pending_user_text": state.pending_user_text,
        "event_count": len(state.event_log),
    }


def snapshot_text(snapshot: dict) -> str:
    return json.dumps(snapshot, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


@dataclass
class SessionRecord:
    session_id: str
    state: SessionState
    gateways: Gateways
    log_path: Path
    snapshot_path: Path
    created_at: float
    lock: threading.Lock = field(default_factory=threading.Lock)
    snapshot: dict = field(default_factory=dict)
    snapshot_body: str = ""
    report_cache: tuple[int, str] | None = None
    auto_stop: threading.Event = field(default_factory=threading.Event)
    auto_thread: threading.Thread | None = None


class SessionRegistry:
    def __init__(self, gateway_factory: GatewayFactory, data_dir: str | Path):
        self.gateway_factory = gateway_factory
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.records: dict[str, SessionRecord] = {}
        self._registry_lock = threading.Lock()

    # -- lifecycle ------------------------------------------------------

    def create(
        self,
        topic: str,
        goal: str | None = None,
        config_overrides: dict | None = None,
        *,
        auto_step: bool = False,
        auto_interval_s: float = 0.25,
    ) -> SessionRecord:
        config = EngineConfig.from_dict(config_overrides or {})
        session_id = uuid.uuid4().hex[:16]
        session_dir = self.data_dir / session_id
        session_dir.mkdir(parents=True, exist_ok=False)
        gateways = self.gateway_factory()
        state = start_session(
            topic, goal, config, gateways, event_log_path=session_dir / LOG_NAME
        )
        record = SessionRecord(
            session_id=session_id,
            state=state,
            gateways=gateways,
            log_path=session_dir / LOG_NAME,
            snapshot_path=session_dir / SNAPSHOT_NAME,
            created_at=time.time(),
        )
        self._commit(record)
        with self._registry_lock:
            self.records[session_id] = record
        if auto_step:
            self.start_auto(record, auto_interval_s)
        return record

    def get(self, session_id: str) -> SessionRecord:
        try:
            return self.records[session_id]
        except KeyError:
            raise KeyError(f"unknown session {session_id!r}") from None

    # -- commands (single writer per session) ---------------------------

    def step(self, session_id: str) -> Utterance:
        record = self.get(session_id)
        with record.lock:
            try:
                utterance = advance(record.state, record.gateways)
            except BudgetExhausted:
                # the aborted turn's searches and the terminate event are
                # already committed to the state; persist them
                self._commit(record)
                raise
            self._commit(record)
            return utterance

    def inject(self, session_id: str, text: str) -> None:
        record = self.get(session_id)
        self.stop_auto(record)
        with record.lock:
            inject_user_utterance(record.state, text)
            self._commit(record)

    def report(self, session_id: str) -> str:
        """Report JSON body, cached until the next mind-map mutation."""
        record = self.get(session_id)
        with record.lock:
            version = record.state.mind_map.mutation_count
            if record.report_cache and record.report_cache[0] == version:
                return record.report_cache[1]
            report = generate_report(record.state.mind_map, record.state, record.gateways)
            body = report.to_json_text()
            record.report_cache = (version, body)
            self._commit(record)
            return body

    # -- reads ----------------------------------------------------------

    def snapshot_body(self, session_id: str) -> str:
        return self.get(session_id).snapshot_body

    def mindmap_body(self, session_id: str) -> str:
        record = self.get(session_id)
        snapshot = record.snapshot
        return json.dumps(
            {
                "mind_map": snapshot["mind_map"],
                "map_version": snapshot["map_version"],
            },
            sort_keys=True,
            ensure_ascii=False,
            separators=(",", ":"),
        )

    def events_view(self, session_id: str) -> list[Event]:
        """Live, append-only event list; index-based reads are safe."""
        return self.get(session_id).state.event_log.events

    # -- auto-step mode ---------------------------------------------------

    def start_auto(self, record: SessionRecord, interval_s: float) -> None:
        def loop() -> None:
            while not record.auto_stop.wait(interval_s):
                try:
                    self.step(record.session_id)
                except (SessionTerminated, BudgetExhausted, GatewayError):
                    return
                if record.state.phase is Phase.TERMINATED:
                    return

        record.auto_stop.clear()
        record.auto_thread = threading.Thread(target=loop, daemon=True)
        record.auto_thread.start()

    def stop_auto(self, record: SessionRecord) -> None:
        record.auto_stop.set()
        if record.auto_thread is not None:
            record.auto_thread.join(timeout=5)
            record.auto_thread = None

    def shutdown(self) -> None:
        for record in list(self.records.values()):
            self.stop_auto(record)

    # -- persistence and recovery ---------------------------------------

    def _commit(self, record: SessionRecord) -> None:
        record.snapshot = snapshot_of(record.session_id, record.state)
        record.snapshot_body = snapshot_text(record.snapshot)
        tmp = record.snapshot_path.with_suffix(".tmp")
        tmp.write_text(record.snapshot_body, encoding="utf-8")
        tmp.replace(record.snapshot_path)

    def recover(self, session_id: str) -> SessionRecord:
        """Rebuild a session from its event log; the reconstructed snapshot
        must match what the crashed process persisted."""
        session_dir = self.data_dir / session_id
        log_path = session_dir / LOG_NAME
        events = load_events(log_path)
        gateways = self.gateway_factory()
        state = replay(events, gateways)
        state.event_log.path = log_path  # resume write-through
        record = SessionRecord(
            session_id=session_id,
            state=state,
            gateways=gateways,
            log_path=log_path,
            snapshot_path=session_dir / SNAPSHOT_NAME,
            created_at=time.time(),
        )
        self._commit(record)
        with self._registry_lock:
            self.records[session_id] = record
        return record

    def recover_all(self) -> list[str]:
        recovered = []
        for entry in sorted(self.data_dir.iterdir()):
            if entry.is_dir() and (entry / LOG_NAME).exists() and entry.name not in self.records:
                self.recover(entry.name)
                recovered.append(entry.name)
        return recovered
