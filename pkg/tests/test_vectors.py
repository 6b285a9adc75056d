from __future__ import annotations

import math

import pytest
from hypothesis import given, strategies as st

from roundtable.vectors import Embedding, basis_vector, cosine, hash_vector, unit_normalize

finite_floats = st.floats(
    min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False
)


def test_unit_normalize_produces_unit_norm():
    emb = unit_normalize([3.0, 4.0])
    assert emb.values == (0.6, 0.8)
    assert math.isclose(emb.norm(), 1.0, abs_tol=1e-12)


def test_unit_normalize_rejects_empty_and_zero():
    with pytest.raises(ValueError):
        unit_normalize([])
    with pytest.raises(ValueError):
        unit_normalize([0.0, 0.0, 0.0])


def test_already_unit_vector_passes_through_exactly():
    emb = unit_normalize([1.0, 0.0, 0.0])
    assert emb.values == (1.0, 0.0, 0.0)


@given(st.lists(finite_floats, min_size=1, max_size=16))
def test_unit_normalize_norm_property(raw):
    if all(v == 0.0 for v in raw):
        with pytest.raises(ValueError):
            unit_normalize(raw)
        return
    norm = math.sqrt(math.fsum(v * v for v in raw))
    if norm == 0.0 or not math.isfinite(norm):
        return
    emb = unit_normalize(raw)
    assert math.isclose(emb.norm(), 1.0, rel_tol=0, abs_tol=1e-9)


def test_cosine_identity_and_orthogonality():
    e0 = basis_vector(0, 4)
    e1 = basis_vector(1, 4)
    assert cosine(e0, e0) == 1.0
    assert cosine(e0, e1) == 0.0


def test_cosine_known_angle():
    a = unit_normalize([1.0, 0.0])
    b = unit_normalize([1.0, 1.0])
    assert abs(cosine(a, b) - 0.7071067811865476) < 1e-15


def test_cosine_dim_mismatch():
    with pytest.raises(ValueError):
        cosine(basis_vector(0, 3), basis_vector(0, 4))


@given(
    st.lists(finite_floats, min_size=2, max_size=8),
    st.lists(finite_floats, min_size=2, max_size=8),
)
def test_cosine_clamped_and_symmetric(raw_a, raw_b):
    raw_b = raw_b[: len(raw_a)] + [1.0] * max(0, len(raw_a) - len(raw_b))
    if all(v == 0 for v in raw_a) or all(v == 0 for v in raw_b):
        return
    a, b = unit_normalize(raw_a), unit_normalize(raw_b)
    c = cosine(a, b)
    assert -1.0 <= c <= 1.0
    assert c == cosine(b, a)


def test_hash_vector_deterministic_and_distinct():
    a1 = hash_vector("alpha", 32)
    a2 = hash_vector("alpha", 32)
    b = hash_vector("beta", 32)
    assert a1 == a2
    assert a1 != b
    assert math.isclose(a1.norm(), 1.0, abs_tol=1e-9)


def test_basis_vector_bounds():
    with pytest.raises(ValueError):
        basis_vector(4, 4)
    with pytest.raises(ValueError):
        basis_vector(-1, 4)


def test_embedding_hashable():
    seen = {basis_vector(0, 3), basis_vector(0, 3), basis_vector(1, 3)}
    assert len(seen) == 2
    assert Embedding((1.0, 0.0, 0.0)) in seen
