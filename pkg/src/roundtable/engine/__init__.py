from ..turns import Actor, ActorAssignment, EngineConfig, Intent, Phase, Utterance, format_history
from .events import Event, EventLog, load_events
from .session import (
    SessionState,
    advance,
    classify_user_intent,
    close_session,
    consecutive_answer_run,
    inject_user_utterance,
    next_actor,
    replay,
    start_session,
)

__all__ = [
    "Actor",
    "ActorAssignment",
    "EngineConfig",
    "Event",
    "EventLog",
    "Intent",
    "Phase",
    "SessionState",
    "Utterance",
    "advance",
    "classify_user_intent",
    "close_session",
    "consecutive_answer_run",
    "format_history",
    "inject_user_utterance",
    "load_events",
    "next_actor",
    "replay",
    "start_session",
]
