import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from parapolar import bits
from parapolar.gf import VectorSpace, field, gaussian_binomial, projective_coefficients, rref


@pytest.mark.parametrize("q", [2, 3, 4])
def test_field_axioms(q):
    F = field(q)
    r = range(q)
    for a, b, c in itertools.product(r, r, r):
        assert F.add[a, F.add[b, c]] == F.add[F.add[a, b], c]
        assert F.mul[a, F.add[b, c]] == F.add[F.mul[a, b], F.mul[a, c]]
    for a in range(1, q):
        assert any(F.mul[a, b] == 1 for b in range(1, q))


@pytest.mark.parametrize("n,k,q,want", [(4, 2, 2, 35), (5, 2, 2, 155), (3, 1, 3, 13), (6, 3, 2, 1395)])
def test_gaussian_binomial(n, k, q, want):
    assert gaussian_binomial(n, k, q) == want


@pytest.mark.parametrize("q,k", [(2, 3), (3, 3), (4, 2)])
def test_projective_coefficients_count(q, k):
    P = projective_coefficients(q, k)
    assert len(P) == (q**k - 1) // (q - 1)
    assert len({tuple(r) for r in P}) == len(P)


@given(st.lists(st.lists(st.integers(0, 2), min_size=4, max_size=4), min_size=1, max_size=4))
def test_rref_idempotent(rows):
    F = field(3)
    M = rref(F, np.array(rows))
    assert np.array_equal(rref(F, M), M)


@given(st.sets(st.integers(0, 200), max_size=30))
def test_bits_roundtrip(xs):
    b = bits.from_indices(xs)
    assert bits.to_indices(b) == sorted(xs)
    assert bits.popcount(b) == len(xs)
    assert bits.from_mask(bits.to_mask(b, 201)) == b


def test_vector_space_span():
    V = VectorSpace(2, 4)
    assert V.n_points == 15
    pts = V.span_points(np.array([[1, 0, 0, 0], [0, 1, 0, 0]]))
    assert len(set(pts.tolist())) == 3
