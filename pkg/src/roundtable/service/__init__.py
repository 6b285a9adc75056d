from .app import create_app
from .registry import SessionRecord, SessionRegistry, snapshot_of, snapshot_text

__all__ = [
    "SessionRecord",
    "SessionRegistry",
    "create_app",
    "snapshot_of",
    "snapshot_text",
]
