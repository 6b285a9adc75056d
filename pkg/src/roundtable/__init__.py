"""Roundtable: simulated expert discourse with web grounding, a dynamic
mind map of retrieved information, and cited report generation."""

from .budget import BudgetCounter
from .errors import (
    BudgetExhausted,
    EmptyMapError,
    GatewayError,
    RoundtableError,
    SchemaError,
    SessionTerminated,
    TransportError,
)
from .mindmap import InfoSnippet, MindMap
from .vectors import Embedding, cosine, unit_normalize

__version__ = "0.1.0"

__all__ = [
    "BudgetCounter",
    "BudgetExhausted",
    "Embedding",
    "EmptyMapError",
    "GatewayError",
    "InfoSnippet",
    "MindMap",
    "RoundtableError",
    "SchemaError",
    "SessionTerminated",
    "TransportError",
    "cosine",
    "unit_normalize",
    "__version__",
]
