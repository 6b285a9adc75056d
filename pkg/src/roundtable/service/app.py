"""HTTP surface over the session registry.

All bodies are JSON. Turn delivery uses a per-session server-sent event
stream; readers that cannot hold a connection poll the snapshot endpoint.
"""

from __future__ import annotations

import time

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response, StreamingResponse
from pydantic import BaseModel

from ..errors import BudgetExhausted, EmptyMapError, GatewayError, SessionTerminated
from ..turns import Phase
from .registry import SessionRegistry

_JSON = "application/json"


class CreateSessionBody(BaseModel):
    topic: str
    goal: str | None = None
    config: dict = {}
    auto_step: bool = False
    auto_interval_s: float = 0.25


class InjectBody(BaseModel):
    text: str


def _error(status: int, detail: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"detail": detail})


def create_app(registry: SessionRegistry) -> FastAPI:
    app = FastAPI(title="roundtable session service")
    app.state.registry = registry
    # the browser UI is served as static files from a different origin
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        if not body.topic.strip():
            return _error(400, "topic must be nonempty")
        try:
            record = registry.create(
                body.topic,
                body.goal,
                body.config,
                auto_step=body.auto_step,
                auto_interval_s=body.auto_interval_s,
            )
        except ValueError as exc:
            return _error(400, str(exc))
        except GatewayError as exc:
            return _error(503, str(exc))
        return {"session_id": record.session_id, "phase": record.snapshot["phase"]}

    @app.post("/sessions/{session_id}/step")
    def step_session(session_id: str):
        try:
            utterance = registry.step(session_id)
        except KeyError as exc:
            return _error(404, str(exc))
        except SessionTerminated:
            return _error(409, "session is terminated")
        except BudgetExhausted:
            return _error(409, "search budget exhausted; turn aborted")
        except GatewayError as exc:
            return _error(503, str(exc))
        snapshot = registry.get(session_id).snapshot
        return {"utterance": utterance.to_dict(), "phase": snapshot["phase"]}

    @app.post("/sessions/{session_id}/utterance", status_code=202)
    def inject_utterance(session_id: str, body: InjectBody):
        if not body.text.strip():
            return _error(400, "text must be nonempty")
        try:
            registry.inject(session_id, body.text)
        except KeyError as exc:
            return _error(404, str(exc))
        except SessionTerminated:
            return _error(409, "session is terminated")
        except ValueError as exc:
            return _error(400, str(exc))
        return {"accepted": True, "pending": body.text}

    @app.get("/sessions/{session_id}")
    def get_snapshot(session_id: str):
        try:
            body = registry.snapshot_body(session_id)
        except KeyError as exc:
            return _error(404, str(exc))
        return Response(content=body, media_type=_JSON)

    @app.get("/sessions/{session_id}/mindmap")
    def get_mindmap(session_id: str):
        try:
            body = registry.mindmap_body(session_id)
        except KeyError as exc:
            return _error(404, str(exc))
        return Response(content=body, media_type=_JSON)

    @app.get("/sessions/{session_id}/report")
    def get_report(session_id: str):
        try:
            body = registry.report(session_id)
        except KeyError as exc:
            return _error(404, str(exc))
        except EmptyMapError:
            return _error(409, "mind map is empty; nothing to report")
        except GatewayError as exc:
            return _error(503, str(exc))
        return Response(content=body, media_type=_JSON)

    @app.get("/sessions/{session_id}/events")
    def stream_events(session_id: str, follow: int = 1):
        try:
            record = registry.get(session_id)
        except KeyError as exc:
            return _error(404, str(exc))
        events = registry.events_view(session_id)

        def generate():
            i = 0
            while True:
                while i < len(events):
                    yield f"data: {events[i].to_line()}\n\n"
                    i += 1
                if not follow:
                    return
                if record.state.phase is Phase.TERMINATED and i >= len(events):
                    return
                time.sleep(0.05)

        return StreamingResponse(generate(), media_type="text/event-stream")

    return app
