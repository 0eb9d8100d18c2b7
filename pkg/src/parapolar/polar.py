"""Polar-space axiom checks and the classical finite polar spaces.

Form normal forms (coordinates ``x_0 .. x_{d-1}``), fixed so that labels are
reproducible:

* ``sp``  (d = 2m):   f(x, y) = sum_{i<m} x_{2i} y_{2i+1} - x_{2i+1} y_{2i}
* ``o+``  (d = 2m):   Q(x) = sum_{i<m} x_{2i} x_{2i+1}
* ``o``   (d = 2m+1): Q(x) = sum_{i<m} x_{2i} x_{2i+1} + x_{2m}^2
* ``o-``  (d = 2m):   Q(x) = sum_{i<m-1} x_{2i} x_{2i+1}
                              + x_{2m-2}^2 + x_{2m-2} x_{2m-1} + mu x_{2m-1}^2

where ``mu`` makes the last binary form anisotropic (1 over GF(2), 2 over
GF(3), w over GF(4)).  Orthogonal spaces use the polar form
``f(x, y) = Q(x + y) - Q(x) - Q(y)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from . import bits
from .geometry import (
    Geometry,
    SingularSubspace,
    chain_dim,
    closure_bits,
    diameter,
    enumerate_maximal_singulars,
)
from .gf import VectorSpace, field, projective_coefficients, rref_key

KINDS = ("sp", "o+", "o", "o-")
ANISOTROPIC_MU = {2: 1, 3: 2, 4: 2}


class RankTooSmall(ValueError):
    """The requested form has Witt index below 2."""


@dataclass(frozen=True)
class FormSpec:
    kind: str
    dim: int
    q: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown form kind {self.kind!r}; expected one of {KINDS}")
        if self.q not in (2, 3, 4):
            raise ValueError(f"unsupported field order {self.q}")
        odd = self.dim % 2 == 1
        if odd != (self.kind == "o"):
            raise ValueError(f"dimension {self.dim} has the wrong parity for kind {self.kind}")

    @property
    def witt_index(self) -> int:
        d = self.dim
        return {"sp": d // 2, "o+": d // 2, "o": (d - 1) // 2, "o-": d // 2 - 1}[self.kind]

    def __str__(self) -> str:
        return f"polar:{self.kind}:{self.dim}:{self.q}"


def quadratic_form(spec: FormSpec, X: np.ndarray) -> np.ndarray:
    F = field(spec.q)
    X = np.atleast_2d(X)
    acc = np.zeros(len(X), dtype=np.int64)
    m = spec.dim // 2
    hyper = {"o+": m, "o": m, "o-": m - 1}[spec.kind]
    for i in range(hyper):
        acc = F.add[acc, F.mul[X[:, 2 * i], X[:, 2 * i + 1]]]
    if spec.kind == "o":
        acc = F.add[acc, F.mul[X[:, -1], X[:, -1]]]
    elif spec.kind == "o-":
        a, b = X[:, -2], X[:, -1]
        mu = ANISOTROPIC_MU[spec.q]
        acc = F.add[acc, F.mul[a, a]]
        acc = F.add[acc, F.mul[a, b]]
        acc = F.add[acc, F.mul[mu, F.mul[b, b]]]
    return acc


def bilinear_form(spec: FormSpec, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Associated bilinear form, broadcasting over leading axes."""
    F = field(spec.q)
    X, Y = np.broadcast_arrays(X, Y)
    if spec.kind == "sp":
        acc = np.zeros(X.shape[:-1], dtype=np.int64)
        for i in range(spec.dim // 2):
            t = F.sub[F.mul[X[..., 2 * i], Y[..., 2 * i + 1]], F.mul[X[..., 2 * i + 1], Y[..., 2 * i]]]
            acc = F.add[acc, t]
        return acc
    shape = X.shape[:-1]
    Xf, Yf = X.reshape(-1, spec.dim), Y.reshape(-1, spec.dim)
    S = F.add[Xf, Yf]
    out = F.sub[F.sub[quadratic_form(spec, S), quadratic_form(spec, Xf)], quadratic_form(spec, Yf)]
    return out.reshape(shape)


@dataclass
class PolarSpace:
    """A classical polar space with its vector representatives."""

    geometry: Geometry
    spec: FormSpec
    vs: VectorSpace
    vectors: np.ndarray  # (N, d) normalized representatives, one per point
    vs_index: np.ndarray  # projective index in vs of each point
    rank: int
    _maximals: Optional[list[int]] = dc_field(default=None, repr=False)

    def maximal_singulars(self) -> list[int]:
        """Maximal singular subspaces as bitsets, canonical order (cached)."""
        if self._maximals is None:
            self._maximals = [bits.from_mask(m.points) for m in enumerate_maximal_singulars(self.geometry, check_projective=False)]
        return self._maximals


def build_classical(spec: FormSpec) -> PolarSpace:
    """Points: singular 1-spaces; lines: totally singular 2-spaces."""
    if spec.witt_index < 2:
        raise RankTooSmall(f"{spec} has rank {spec.witt_index} < 2")
    vs = VectorSpace(spec.q, spec.dim)
    P = vs.points
    if spec.kind == "sp":
        keep = np.arange(len(P))
    else:
        keep = np.flatnonzero(quadratic_form(spec, P) == 0)
    V = P[keep]
    n = len(V)
    local = np.full(vs.n_points, -1, dtype=np.int64)
    local[keep] = np.arange(n)
    Fm = np.zeros((n, n), dtype=np.int64)
    for i in range(0, n, 128):
        Fm[i:i + 128] = bilinear_form(spec, V[i:i + 128, None, :], V[None, :, :])
    perp = Fm == 0
    np.fill_diagonal(perp, False)
    F = vs.F
    coeffs = projective_coefficients(spec.q, 2)
    lines = set()
    for a in range(n):
        bs = np.flatnonzero(perp[a, a + 1:]) + a + 1
        if not len(bs):
            continue
        # every point of every line through a and a later point, in one batch
        vecs = F.add[F.mul[coeffs[:, 0, None, None], V[a][None, None, :]],
                     F.mul[coeffs[:, 1, None, None], V[bs][None, :, :]]]
        idx = local[vs.index(vecs.reshape(-1, spec.dim))].reshape(len(coeffs), len(bs))
        lines.update(map(tuple, np.sort(idx, axis=0).T.tolist()))
    labels = [rref_key(v[None, :]) for v in V]
    g = Geometry(n, lines, labels, name=str(spec))
    return PolarSpace(g, spec, vs, V, keep, spec.witt_index)


# -- axiom verification -------------------------------------------------------

@dataclass
class PolarVerdict:
    is_polar: bool
    rank: Optional[int]
    thick_lines: bool
    building_thick: bool
    failures: list = dc_field(default_factory=list)
    max_singular_dims: tuple = ()

    def to_dict(self) -> dict:
        return {
            "is_polar": self.is_polar,
            "rank": self.rank,
            "thick_lines": self.thick_lines,
            "building_thick": self.building_thick,
            "failures": [[a, w] for a, w in self.failures],
            "max_singular_dims": list(self.max_singular_dims),
        }


def one_or_all_witness(g: Geometry, chunk: int = 256) -> Optional[tuple[int, int]]:
    """A (point, line) pair, point off the line, seeing neither one nor all of its points."""
    sizes = g.line_sizes
    inc = g.incidence
    A = g.adjacency
    for start in range(0, g.point_count, chunk):
        rows = A[start:start + chunk].astype(np.int32)
        cnt = (inc @ rows.T).T
        on = inc[:, start:start + chunk].T.toarray() > 0
        bad = ~on & (cnt != 1) & (cnt != sizes[None, :])
        if bad.any():
            p, li = np.argwhere(bad)[0]
            return int(p) + start, int(li)
    return None


def next_to_maximal_counts(
    g: Geometry, maximals: list[int], rank: int, projective: bool = False
) -> list[tuple[int, int]]:
    """(subspace bitset, number of maximal singulars containing it) for each
    (rank-2)-dimensional singular subspace arising as a meet of two maximals.

    In a polar space every next-to-maximal singular lies in at least two
    maximals, so these meets are all of them.  When the maximals are projective
    spaces of dimension rank-1 the hyperplanes are recognized by their size.
    """
    if rank < 2 or len(maximals) < 2:
        return []
    M = np.stack([bits.to_mask(b, g.point_count) for b in maximals]).astype(np.float32)
    sizes = (M @ M.T).astype(np.int64)
    np.fill_diagonal(sizes, 0)
    if projective:
        # hyperplane of PG(rank-1, s): (s^(rank-1) - 1) / (s - 1) points, s + 1 = line size
        s = int(g.line_sizes[g.point_lines[bits.lowest(maximals[0])][0]]) - 1
        h = (s ** (rank - 1) - 1) // (s - 1)
        iu, ju = np.nonzero(np.triu(sizes == h, 1))
        pairs: dict[int, int] = {}
        for i, j in zip(iu.tolist(), ju.tolist()):
            S = maximals[i] & maximals[j]
            pairs[S] = pairs.get(S, 0) + 1
        # c maximals through a hyperplane give c(c-1)/2 pairs
        out = [(S, int(round((1 + math.sqrt(1 + 8 * c)) / 2))) for S, c in pairs.items()]
        return sorted(out, key=lambda t: bits.to_indices(t[0]))
    dims: dict[int, int] = {}
    meets = set()
    iu, ju = np.nonzero(np.triu(sizes > 0, 1))
    for i, j in zip(iu.tolist(), ju.tolist()):
        meets.add(maximals[i] & maximals[j])
    out = []
    for S in sorted(meets, key=bits.to_indices):
        if S not in dims:
            dims[S] = chain_dim(g, S)
        if dims[S] == rank - 2:
            mask = bits.to_mask(S, g.point_count).astype(np.float32)
            count = int(((M @ mask) == mask.sum()).sum())
            out.append((S, count))
    return out


def verify_polar(g: Geometry, maximals: Optional[list[SingularSubspace]] = None) -> PolarVerdict:
    """Check the four polar-space axioms; PS3 holds for every finite geometry."""
    failures: list = []
    small = [i for i, s in enumerate(g.line_sizes) if s < 3]
    thick = not small
    if small:
        failures.append(("PS1", {"line": list(g.lines[small[0]])}))
    if not g.covering:
        failures.append(("covering", {"point": int(g.uncovered[0])}))
    if g.point_count and diameter(g) == float("inf"):
        failures.append(("connected", {}))
    deg = g.adjacency.sum(axis=1)
    full = np.flatnonzero(deg == g.point_count - 1)
    if len(full):
        failures.append(("PS2", {"point": int(full[0])}))
    w = one_or_all_witness(g)
    if w is not None:
        failures.append(("PS4", {"point": w[0], "line": list(g.lines[w[1]])}))
    if failures and any(a != "PS1" for a, _ in failures):
        return PolarVerdict(False, None, thick, False, failures)
    if maximals is None:
        maximals = enumerate_maximal_singulars(g)
    dims = sorted(m.dim if m.dim is not None else -2 for m in maximals)
    rank = None
    if any(not m.projective for m in maximals):
        if thick:
            failures.append(("singular-projective", {"points": np.flatnonzero(next(m for m in maximals if not m.projective).points).tolist()}))
    if dims and dims[-1] >= 1:
        rank = dims[-1] + 1
        if dims[0] != dims[-1]:
            failures.append(("rank-uniform", {"dims": sorted(set(dims))}))
    else:
        failures.append(("rank", {"dims": sorted(set(dims))}))
    building = False
    if rank is not None:
        uniform_proj = thick and all(m.projective and m.dim == rank - 1 for m in maximals)
        counts = next_to_maximal_counts(g, [bits.from_mask(m.points) for m in maximals], rank, uniform_proj)
        building = bool(counts) and all(c >= 3 for _, c in counts)
    return PolarVerdict(not failures, rank, thick, building, failures, tuple(dims))


# -- singular subspaces of a polar space ----------------------------------------

def _subspaces_inside(g: Geometry, M: int, dim: int) -> set[int]:
    layer = {1 << x for x in bits.to_indices(M)}
    for _ in range(dim):
        nxt = set()
        for S in layer:
            rest = M & ~S
            while rest:
                low = rest & -rest
                rest ^= low
                nxt.add(closure_bits(g, S | low))
        layer = nxt
    return layer


def singular_subspaces_of_polar(polar, k: int) -> list[SingularSubspace]:
    """Singular subspaces of projective dimension ``k - 1`` (``1 <= k <= rank``).

    Accepts a :class:`PolarSpace` (vector fast path) or a verified polar
    :class:`Geometry` (closure enumeration inside each maximal singular).
    """
    if isinstance(polar, PolarSpace):
        g, rank = polar.geometry, polar.rank
        if not 1 <= k <= rank:
            raise ValueError(f"k={k} outside 1..{rank}")
        sets = [bits.from_indices(t) for t in totally_singular(polar, k)]
    else:
        g = polar
        v = verify_polar(g)
        if not v.is_polar:
            raise ValueError("input is not a polar space")
        rank = v.rank
        if not 1 <= k <= rank:
            raise ValueError(f"k={k} outside 1..{rank}")
        found: set[int] = set()
        for m in enumerate_maximal_singulars(g):
            found |= _subspaces_inside(g, bits.from_mask(m.points), k - 1)
        sets = sorted(found, key=bits.to_indices)
    return [SingularSubspace(bits.to_mask(S, g.point_count), True, k - 1) for S in sets]


def maximal_bases(polar: PolarSpace) -> list[np.ndarray]:
    """Point index arrays of each maximal singular, listed in the coefficient order
    of its RREF basis (so that subspace patterns apply)."""
    out = []
    local = np.full(polar.vs.n_points, -1, dtype=np.int64)
    local[polar.vs_index] = np.arange(len(polar.vs_index))
    for M in polar.maximal_singulars():
        ids = polar.vs_index[bits.to_indices(M)]
        B = polar.vs.basis_of(ids)
        out.append(local[polar.vs.span_points(B)])
    return out


def totally_singular(polar: PolarSpace, k: int) -> list[tuple[int, ...]]:
    """All totally singular k-dimensional vector subspaces, as sorted point tuples."""
    from .gf import subspace_patterns

    r = polar.rank
    if k == r:
        return sorted(tuple(bits.to_indices(M)) for M in polar.maximal_singulars())
    pats = np.array(subspace_patterns(polar.spec.q, r, k), dtype=np.int64)
    P = np.stack(maximal_bases(polar))
    sub = np.sort(P[:, pats], axis=-1).reshape(-1, pats.shape[1])
    uniq = np.unique(sub, axis=0)
    return [tuple(int(x) for x in row) for row in uniq]


def half_spin_family(polar: PolarSpace, which: int = 0) -> list[int]:
    """Indices (into ``maximal_singulars()``) of one family of generators of ``o+``.

    Family 0 contains the reference generator span{e_0, e_2, ...}; a generator
    M is in the same family as R iff dim(M & R) = rank (mod 2).
    """
    if polar.spec.kind != "o+":
        raise ValueError("half-spin families need a hyperbolic quadric")
    r = polar.rank
    d = polar.spec.dim
    ref = np.zeros((r, d), dtype=np.int64)
    for i in range(r):
        ref[i, 2 * i] = 1
    local = {int(v): i for i, v in enumerate(polar.vs_index)}
    R = bits.from_indices(local[int(x)] for x in polar.vs.span_points(ref))
    q = polar.spec.q
    out = []
    for idx, M in enumerate(polar.maximal_singulars()):
        size = bits.popcount(M & R)
        t = 0
        while (q ** t - 1) // (q - 1) < size:
            t += 1
        if (t % 2 == r % 2) == (which == 0):
            out.append(idx)
    return out
