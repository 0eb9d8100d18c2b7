"""Small finite fields and projective point indexing over GF(q)^d.

Field elements are encoded as integers ``0..q-1``.  For prime ``q`` this is the
usual residue; for ``q = 4`` the encoding is ``0, 1, w, w^2`` with ``w^2 = w + 1``.
All arithmetic is table driven so it vectorizes over numpy integer arrays.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

SUPPORTED_Q = (2, 3, 4)


class GF:
    """Table-driven arithmetic for GF(2), GF(3) and GF(4)."""

    def __init__(self, q: int):
        if q not in SUPPORTED_Q:
            raise ValueError(f"unsupported field order {q}; expected one of {SUPPORTED_Q}")
        self.q = q
        if q in (2, 3):
            r = np.arange(q)
            self.add = (r[:, None] + r[None, :]) % q
            self.mul = (r[:, None] * r[None, :]) % q
        else:
            # additive structure is GF(2)^2 with 1 -> 0b01, w -> 0b10, w^2 = w+1 -> 0b11
            r = np.arange(4)
            self.add = r[:, None] ^ r[None, :]
            log = {1: 0, 2: 1, 3: 2}
            exp = [1, 2, 3]
            mul = np.zeros((4, 4), dtype=np.int64)
            for a in range(1, 4):
                for b in range(1, 4):
                    mul[a, b] = exp[(log[a] + log[b]) % 3]
            self.mul = mul
        self.add = self.add.astype(np.int64)
        self.mul = self.mul.astype(np.int64)
        self.neg = np.array([int(np.where(self.add[a] == 0)[0][0]) for a in range(q)])
        inv = np.zeros(q, dtype=np.int64)
        for a in range(1, q):
            inv[a] = int(np.where(self.mul[a] == 1)[0][0])
        self.inv = inv
        self.sub = self.add[:, self.neg]

    def __repr__(self) -> str:
        return f"GF({self.q})"

    def dot(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Sum of coordinatewise products along the last axis (broadcasting)."""
        x, y = np.broadcast_arrays(x, y)
        acc = np.zeros(x.shape[:-1], dtype=np.int64)
        for i in range(x.shape[-1]):
            acc = self.add[acc, self.mul[x[..., i], y[..., i]]]
        return acc

    def combine(self, coeffs: np.ndarray, basis: np.ndarray) -> np.ndarray:
        """Rows of ``coeffs @ basis`` over the field; coeffs (m, k), basis (k, d)."""
        coeffs = np.atleast_2d(coeffs)
        out = np.zeros((coeffs.shape[0], basis.shape[1]), dtype=np.int64)
        for i in range(basis.shape[0]):
            out = self.add[out, self.mul[coeffs[:, i][:, None], basis[i][None, :]]]
        return out

    def normalize(self, vecs: np.ndarray) -> np.ndarray:
        """Scale each nonzero row so that its first nonzero entry is 1."""
        vecs = np.atleast_2d(vecs)
        nz = vecs != 0
        first = np.argmax(nz, axis=1)
        lead = vecs[np.arange(len(vecs)), first]
        scale = self.inv[lead]
        return self.mul[scale[:, None], vecs]


@lru_cache(maxsize=None)
def field(q: int) -> GF:
    return GF(q)


@lru_cache(maxsize=None)
def projective_coefficients(q: int, k: int) -> np.ndarray:
    """Normalized vectors of GF(q)^k in ascending base-q code order."""
    rows = [v for v in itertools.product(range(q), repeat=k) if any(v)]
    rows = [v for v in rows if v[next(i for i, c in enumerate(v) if c)] == 1]
    return np.array(rows, dtype=np.int64).reshape(len(rows), k)


def gaussian_binomial(n: int, k: int, q: int) -> int:
    if k < 0 or k > n:
        return 0
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def rref(F: GF, rows: np.ndarray) -> np.ndarray:
    """Reduced row echelon form with zero rows dropped."""
    M = np.array(rows, dtype=np.int64, copy=True)
    if M.ndim == 1:
        M = M[None, :]
    nrows, ncols = M.shape
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if M[i, c]), None)
        if piv is None:
            continue
        M[[r, piv]] = M[[piv, r]]
        M[r] = F.mul[F.inv[M[r, c]], M[r]]
        for i in range(nrows):
            if i != r and M[i, c]:
                M[i] = F.sub[M[i], F.mul[M[i, c], M[r]]]
        r += 1
    return M[:r]


def rref_key(M: np.ndarray) -> str:
    """Compact text form of an RREF matrix, e.g. ``'10010/01001'``."""
    return "/".join("".join(str(int(x)) for x in row) for row in M)


@lru_cache(maxsize=None)
def rref_subspaces(q: int, m: int, j: int) -> tuple[np.ndarray, ...]:
    """All j-dimensional subspaces of GF(q)^m as RREF matrices, canonical order."""
    if j == 0:
        return (np.zeros((0, m), dtype=np.int64),)
    out = []
    for pivots in itertools.combinations(range(m), j):
        free = [(r, c) for r in range(j) for c in range(pivots[r] + 1, m) if c not in pivots]
        for vals in itertools.product(range(q), repeat=len(free)):
            M = np.zeros((j, m), dtype=np.int64)
            for r, c in enumerate(pivots):
                M[r, c] = 1
            for (r, c), v in zip(free, vals):
                M[r, c] = v
            out.append(M)
    return tuple(out)


@lru_cache(maxsize=None)
def subspace_patterns(q: int, m: int, j: int) -> tuple[tuple[int, ...], ...]:
    """Position sets of the j-subspaces of GF(q)^m inside ``projective_coefficients(q, m)``.

    A subspace with basis ``B`` (m rows) has its points listed as
    ``normalize(c @ B)`` for ``c`` in ``projective_coefficients(q, m)``; each
    pattern selects the positions forming one j-dimensional subspace of it.
    """
    space = VectorSpace(q, m)
    pats = []
    for M in rref_subspaces(q, m, j):
        pats.append(tuple(int(x) for x in np.sort(space.span_points(M))))
    return tuple(pats)


@lru_cache(maxsize=None)
def pattern_containment(q: int, m: int, lo: int, hi: int) -> tuple[tuple[int, ...], ...]:
    """For each lo-pattern of GF(q)^m, the indices of hi-patterns containing it."""
    low = [frozenset(p) for p in subspace_patterns(q, m, lo)]
    high = [frozenset(p) for p in subspace_patterns(q, m, hi)]
    return tuple(tuple(i for i, h in enumerate(high) if a <= h) for a in low)


class VectorSpace:
    """GF(q)^d with its projective points indexed in ascending normalized-code order."""

    def __init__(self, q: int, d: int):
        self.F = field(q)
        self.q = q
        self.d = d
        self.points = projective_coefficients(q, d)
        self.weights = q ** np.arange(d - 1, -1, -1, dtype=np.int64)
        codes = self.points @ self.weights
        self.code_to_index = np.full(q**d, -1, dtype=np.int64)
        self.code_to_index[codes] = np.arange(len(codes))

    @property
    def n_points(self) -> int:
        return len(self.points)

    def index(self, vecs: np.ndarray) -> np.ndarray:
        """Projective point index of each nonzero row."""
        v = self.F.normalize(np.atleast_2d(vecs))
        return self.code_to_index[v @ self.weights]

    def span_points(self, basis: np.ndarray) -> np.ndarray:
        """Point indices of the span of ``basis`` in coefficient order (independent rows)."""
        basis = np.atleast_2d(np.asarray(basis, dtype=np.int64))
        k = basis.shape[0]
        if k == 0:
            return np.zeros(0, dtype=np.int64)
        coeffs = projective_coefficients(self.q, k)
        return self.index(self.F.combine(coeffs, basis))

    def basis_of(self, point_ids) -> np.ndarray:
        """RREF basis of the subspace spanned by the given points."""
        return rref(self.F, self.points[np.asarray(list(point_ids), dtype=np.int64)])
