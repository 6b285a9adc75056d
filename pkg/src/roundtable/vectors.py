"""Embedding vectors and the cosine math shared by reranking and metrics."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

NORM_TOLERANCE = 1e-6


@dataclass(frozen=True)
class Embedding:
    """A unit-normalized embedding vector.

    values is an immutable tuple so embeddings are hashable and bitwise
    comparable; all embeddings in one session share the same dim.
    """

    values: tuple[float, ...]

    @property
    def dim(self) -> int:
        return len(self.values)

    def norm(self) -> float:
        return math.sqrt(sum(v * v for v in self.values))


def unit_normalize(values) -> Embedding:
    """Normalize a raw vector to unit length.

    Raises ValueError on empty or zero vectors. Components are scaled by the
    largest magnitude before squaring, so tiny vectors (whose squares would
    underflow to zero) and huge ones (whose squares would overflow) both
    normalize cleanly.
    """
    vals = [float(v) for v in values]
    if not vals:
        raise ValueError("cannot normalize an empty vector")
    scale = max(abs(v) for v in vals)
    if scale == 0.0:
        raise ValueError("cannot normalize a zero vector")
    scaled = [v / scale for v in vals]
    norm = math.sqrt(math.fsum(v * v for v in scaled))
    if abs(scale * norm - 1.0) <= 1e-12:
        return Embedding(tuple(vals))
    return Embedding(tuple(v / norm for v in scaled))


def cosine(a: Embedding, b: Embedding) -> float:
    """Inner product of two unit vectors, clamped to [-1, 1].

    Raises ValueError on dimension mismatch.
    """
    if a.dim != b.dim:
        raise ValueError(f"embedding dimension mismatch: {a.dim} != {b.dim}")
    dot = sum(x * y for x, y in zip(a.values, b.values))
    return min(1.0, max(-1.0, dot))


def hash_vector(text: str, dim: int) -> Embedding:
    """Deterministic pseudo-random unit vector derived from the text alone.

    Used by the scripted embedding gateway for texts without an explicit
    fixture entry; the same text always maps to the same vector.
    """
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    seed = int.from_bytes(digest[:8], "big")
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal(dim)
    return unit_normalize(raw)


def basis_vector(index: int, dim: int) -> Embedding:
    """Standard basis vector e_index; exact unit norm, exact orthogonality."""
    if not 0 <= index < dim:
        raise ValueError(f"basis index {index} out of range for dim {dim}")
    vals = [0.0] * dim
    vals[index] = 1.0
    return Embedding(tuple(vals))
