"""Immutable point-line geometries and the basic incidence machinery.

Points are dense indices ``0..N-1``.  Lines are stored as sorted index tuples,
as a sparse incidence matrix and as python-int bitsets; the collinearity graph
is kept both as a boolean matrix and as per-point bitsets.  Point sets passed
to the public functions may be boolean masks or iterables of indices; the
functions return boolean masks.
"""

from __future__ import annotations

import io
import math
import os
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from . import bits

INF = np.iinfo(np.uint16).max


class GeometryError(ValueError):
    """Raised when a point-line structure violates the geometry invariants."""


class Geometry:
    """A finite point-line geometry ``(X, L)`` with ``X = {0, ..., point_count - 1}``.

    Lines are canonicalized (each sorted, the family sorted lexicographically)
    so that equal structures compare equal and serialize identically.
    """

    def __init__(
        self,
        point_count: int,
        lines: Iterable[Iterable[int]],
        labels: Optional[Sequence[str]] = None,
        *,
        allow_uncovered: bool = False,
        parent_index: Optional[Sequence[int]] = None,
        name: Optional[str] = None,
    ):
        n = int(point_count)
        if n < 0:
            raise GeometryError("point_count must be non-negative")
        canon = []
        for line in lines:
            t = tuple(sorted({int(x) for x in line}))
            if len(t) < 2:
                raise GeometryError(f"line {t} has fewer than 2 points")
            if t[0] < 0 or t[-1] >= n:
                raise GeometryError(f"line {t} references a point outside 0..{n - 1}")
            canon.append(t)
        canon.sort()
        for a, b in zip(canon, canon[1:]):
            if a == b:
                raise GeometryError(f"duplicate line {a}")
        self.point_count = n
        self.lines: tuple[tuple[int, ...], ...] = tuple(canon)
        if labels is not None:
            labels = tuple(str(x) for x in labels)
            if len(labels) != n:
                raise GeometryError("labels must have one entry per point")
        self.labels: Optional[tuple[str, ...]] = labels
        self.parent_index = None if parent_index is None else np.asarray(parent_index, dtype=np.int64)
        self.name = name
        on_line = np.zeros(n, dtype=bool)
        for t in canon:
            on_line[list(t)] = True
        self.uncovered = np.flatnonzero(~on_line)
        if len(self.uncovered) and not allow_uncovered:
            raise GeometryError(f"point {int(self.uncovered[0])} lies on no line")

    # -- identity -------------------------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, Geometry):
            return NotImplemented
        return (
            self.point_count == other.point_count
            and self.lines == other.lines
            and self.labels == other.labels
        )

    def __hash__(self) -> int:
        return hash((self.point_count, self.lines))

    def __repr__(self) -> str:
        tag = f" {self.name}" if self.name else ""
        return f"<Geometry{tag}: {self.point_count} points, {len(self.lines)} lines>"

    def __getstate__(self):
        # cached derived arrays are rebuilt lazily on the receiving side
        keep = ("point_count", "lines", "labels", "parent_index", "name", "uncovered")
        return {k: self.__dict__[k] for k in keep}

    def __setstate__(self, state):
        self.__dict__.update(state)

    @property
    def covering(self) -> bool:
        return len(self.uncovered) == 0

    @property
    def n(self) -> int:
        return self.point_count

    # -- derived structures ---------------------------------------------------
    @cached_property
    def line_sizes(self) -> np.ndarray:
        return np.array([len(t) for t in self.lines], dtype=np.int64)

    @cached_property
    def incidence(self) -> sp.csr_matrix:
        """Sparse (lines x points) 0/1 matrix."""
        rows = np.repeat(np.arange(len(self.lines)), self.line_sizes)
        cols = np.fromiter((x for t in self.lines for x in t), dtype=np.int64, count=int(self.line_sizes.sum()))
        data = np.ones(len(cols), dtype=np.int32)
        return sp.csr_matrix((data, (rows, cols)), shape=(len(self.lines), self.point_count))

    @cached_property
    def incidence_t(self) -> sp.csr_matrix:
        return self.incidence.T.tocsr()

    @cached_property
    def point_lines(self) -> tuple[tuple[int, ...], ...]:
        acc: list[list[int]] = [[] for _ in range(self.point_count)]
        for i, t in enumerate(self.lines):
            for x in t:
                acc[x].append(i)
        return tuple(tuple(a) for a in acc)

    @cached_property
    def line_bits(self) -> tuple[int, ...]:
        return tuple(bits.from_indices(t) for t in self.lines)

    @cached_property
    def adjacency(self) -> np.ndarray:
        """Boolean collinearity matrix (no loops)."""
        n = self.point_count
        A = np.zeros((n, n), dtype=bool)
        for t in self.lines:
            idx = np.array(t)
            A[np.ix_(idx, idx)] = True
        np.fill_diagonal(A, False)
        return A

    @cached_property
    def adj_bits(self) -> tuple[int, ...]:
        return tuple(bits.from_mask(row) for row in self.adjacency)

    @cached_property
    def distances(self) -> np.ndarray:
        """All-pairs collinearity distances (uint16, ``INF`` across components)."""
        return _all_pairs_bfs(self.adjacency)

    @cached_property
    def line_of_pair(self) -> dict[tuple[int, int], int]:
        """Line index for each collinear pair ``(a, b)``, ``a < b`` (first line if several)."""
        out: dict[tuple[int, int], int] = {}
        for i, t in enumerate(self.lines):
            for a_pos, a in enumerate(t):
                for b in t[a_pos + 1:]:
                    out.setdefault((a, b), i)
        return out

    @cached_property
    def pair_line(self) -> np.ndarray:
        """(N, N) int32 matrix: index of a line through both points, -1 if none."""
        n = self.point_count
        M = np.full((n, n), -1, dtype=np.int32)
        for i, t in enumerate(self.lines):
            idx = np.array(t)
            M[np.ix_(idx, idx)] = i
        np.fill_diagonal(M, -1)
        return M

    @cached_property
    def is_partial_linear(self) -> bool:
        """True iff two distinct lines share at most one point."""
        seen = 0
        total = 0
        for t in self.lines:
            total += len(t) * (len(t) - 1) // 2
        seen = len(self.line_of_pair)
        return seen == total


def _all_pairs_bfs(A: np.ndarray) -> np.ndarray:
    n = A.shape[0]
    D = np.full((n, n), INF, dtype=np.uint16)
    if n == 0:
        return D
    np.fill_diagonal(D, 0)
    Af = A.astype(np.float32)
    reach = np.eye(n, dtype=bool)
    frontier = reach.copy()
    step = 0
    while True:
        step += 1
        nxt = (frontier.astype(np.float32) @ Af) > 0
        nxt &= ~reach
        if not nxt.any():
            break
        D[nxt] = step
        reach |= nxt
        frontier = nxt
    return D


def as_mask(g: Geometry, S) -> np.ndarray:
    """Coerce a point set (mask, index iterable or int bitset) to a boolean mask."""
    if isinstance(S, np.ndarray) and S.dtype == bool:
        if S.shape != (g.point_count,):
            raise ValueError("mask length does not match point count")
        return S.copy()
    if isinstance(S, int):
        return bits.to_mask(S, g.point_count)
    m = np.zeros(g.point_count, dtype=bool)
    idx = np.fromiter((int(x) for x in S), dtype=np.int64)
    if len(idx) and (idx.min() < 0 or idx.max() >= g.point_count):
        raise ValueError("point index out of range")
    m[idx] = True
    return m


# -- graph operations ---------------------------------------------------------

def collinearity_graph(g: Geometry) -> np.ndarray:
    """Boolean adjacency matrix of the collinearity graph."""
    return g.adjacency.copy()


def distance(g: Geometry, p: int, q: int) -> float:
    """Collinearity distance; ``math.inf`` for points in different components."""
    d = int(g.distances[p, q])
    return math.inf if d == INF else d


def diameter(g: Geometry) -> float:
    D = g.distances
    if g.point_count == 0:
        return 0
    if (D == INF).any():
        return math.inf
    return int(D.max())


def components(g: Geometry) -> list[np.ndarray]:
    """Connected components of the collinearity graph, as sorted index arrays."""
    n = g.point_count
    _, lab = sp.csgraph.connected_components(sp.csr_matrix(g.adjacency), directed=False)
    order = []
    seen = {}
    for i in range(n):
        if lab[i] not in seen:
            seen[lab[i]] = len(order)
            order.append([])
        order[seen[lab[i]]].append(i)
    return [np.array(c) for c in order]


def perp(g: Geometry, S) -> np.ndarray:
    """``S^perp``: points equal or collinear to every point of S (all points if S empty)."""
    m = as_mask(g, S)
    out = np.ones(g.point_count, dtype=bool)
    for x in np.flatnonzero(m):
        row = g.adjacency[x].copy()
        row[x] = True
        out &= row
    return out


# -- closures -----------------------------------------------------------------

def subspace_closure(g: Geometry, seed) -> np.ndarray:
    """Smallest subspace containing ``seed`` (fixpoint over lines with two points inside)."""
    s = as_mask(g, seed)
    if not len(g.lines):
        return s
    inc, inc_t, sizes = g.incidence, g.incidence_t, g.line_sizes
    while True:
        cnt = inc @ s.astype(np.int32)
        hit = (cnt >= 2) & (cnt < sizes)
        if not hit.any():
            return s
        s |= (inc_t @ hit.astype(np.int32)) > 0


def closure_bits(g: Geometry, S: int) -> int:
    """Subspace closure on python-int bitsets; cheap for small sets."""
    todo = bits.to_indices(S)
    lb, pl = g.line_bits, g.point_lines
    while todo:
        x = todo.pop()
        bx = 1 << x
        for li in pl[x]:
            L = lb[li]
            if (L & S) != bx and (L & ~S):
                new = L & ~S
                S |= L
                todo.extend(bits.to_indices(new))
    return S


def geodesic_points(g: Geometry, sources, targets) -> np.ndarray:
    """Mask of points on some shortest path from a point of ``sources`` to one of ``targets``.

    z lies on a geodesic from x to y at distance k iff d(x, z) = i and
    d(z, y) = k - i for some 0 < i < k; each (k, i) is one boolean matmul.
    """
    D = g.distances
    src = np.flatnonzero(as_mask(g, sources))
    tgt = np.flatnonzero(as_mask(g, targets))
    out = np.zeros(g.point_count, dtype=bool)
    if not len(src) or not len(tgt):
        return out
    Dst = D[np.ix_(src, tgt)]
    Ds, Dt = D[src], D[tgt]
    for k in np.unique(Dst):
        if k < 2 or k == INF:
            continue
        Pk = (Dst == k).astype(np.float32)
        for i in range(1, int(k)):
            reach = (Pk @ (Dt == k - i).astype(np.float32)) > 0
            out |= (reach & (Ds == i)).any(axis=0)
    out[src] = True
    out[tgt] = True
    return out


def convex_closure(g: Geometry, seed) -> np.ndarray:
    """Smallest convex subspace containing ``seed``.

    Alternates geodesic insertion and subspace closure until nothing changes.
    Each round only inserts geodesics starting at points added since the
    previous round, which suffices because the set only grows.
    """
    S = as_mask(g, seed)
    if S.sum() <= 1:
        return S
    done = np.zeros(g.point_count, dtype=bool)
    while True:
        new = S & ~done
        if not new.any():
            return S
        add = geodesic_points(g, new, S)
        done |= new
        S = subspace_closure(g, S | add)


# -- induced geometry ---------------------------------------------------------

def induced(g: Geometry, S) -> Geometry:
    """Geometry on S with the lines of g contained in S, reindexed.

    ``result.parent_index[i]`` is the index in g of point i.  Points of S on no
    surviving line are kept; ``result.covering`` is then False.
    """
    m = as_mask(g, S)
    idx = np.flatnonzero(m)
    if not len(idx):
        raise ValueError("induced() needs a nonempty point set")
    local = np.full(g.point_count, -1, dtype=np.int64)
    local[idx] = np.arange(len(idx))
    inside = (g.incidence @ m.astype(np.int32)) == g.line_sizes
    lines = [tuple(local[list(g.lines[i])]) for i in np.flatnonzero(inside)]
    labels = None if g.labels is None else [g.labels[i] for i in idx]
    return Geometry(len(idx), lines, labels, allow_uncovered=True, parent_index=idx)


# -- subspace predicates ------------------------------------------------------

def is_subspace(g: Geometry, S) -> bool:
    m = as_mask(g, S)
    cnt = g.incidence @ m.astype(np.int32)
    return not ((cnt >= 2) & (cnt < g.line_sizes)).any()


def is_pairwise_collinear(g: Geometry, S) -> bool:
    idx = np.flatnonzero(as_mask(g, S))
    sub = g.adjacency[np.ix_(idx, idx)]
    return bool(sub.sum() == len(idx) * (len(idx) - 1))


def is_geometric_hyperplane(g: Geometry, S) -> bool:
    """Proper subspace meeting every line."""
    m = as_mask(g, S)
    if m.all():
        return False
    cnt = g.incidence @ m.astype(np.int32)
    if ((cnt >= 2) & (cnt < g.line_sizes)).any():
        return False
    return bool((cnt >= 1).all())


@dataclass(frozen=True)
class SingularSubspace:
    points: np.ndarray
    projective: bool
    dim: Optional[int]

    @property
    def size(self) -> int:
        return int(self.points.sum())

    def __eq__(self, other) -> bool:
        if not isinstance(other, SingularSubspace):
            return NotImplemented
        return (
            np.array_equal(self.points, other.points)
            and self.projective == other.projective
            and self.dim == other.dim
        )

    def __hash__(self) -> int:
        return hash(bits.mask_key(self.points))


def chain_dim(g: Geometry, S: int) -> int:
    """Length minus one of a greedy chain of closures ending in S."""
    cur, steps = 0, 0
    while cur != S:
        cur = closure_bits(g, cur | (1 << bits.lowest(S & ~cur)))
        steps += 1
    return steps - 1


def projective_check(g: Geometry, S: int) -> tuple[bool, Optional[int]]:
    """Decide whether the singular subspace S induces a projective space.

    Checks: thick lines, unique line through each pair, Veblen-Young on all
    quadruples.  Returns ``(projective, dim)``; dim is None when not projective.
    """
    pts = bits.to_indices(S)
    n = len(pts)
    if n <= 1:
        return True, n - 1
    lines = [li for li in set(li for x in pts for li in g.point_lines[x]) if g.line_bits[li] & ~S == 0]
    lines.sort()
    sizes = [len(g.lines[li]) for li in lines]
    if len(lines) == 1 and sizes[0] == n:
        return True, 1  # a lone line counts as a projective line whatever its size
    if min(sizes) < 3:
        return False, None
    if sum(s * (s - 1) // 2 for s in sizes) != n * (n - 1) // 2:
        return False, None
    if len(lines) > 1:
        local = {x: i for i, x in enumerate(pts)}
        LP = np.full((n, n), -1, dtype=np.int32)
        lmask = np.zeros((len(lines), n), dtype=bool)
        for j, li in enumerate(lines):
            loc = [local[x] for x in g.lines[li]]
            lmask[j, loc] = True
            for a in loc:
                for b in loc:
                    if a != b:
                        LP[a, b] = j
        meet = (lmask.astype(np.int32) @ lmask.T.astype(np.int32)) > 0
        if meet.all():
            # thick linear space with pairwise meeting lines: a projective plane
            return True, 2
        # quadruples (a, b, c, d): lines ab and cd meet => lines ac and bd meet;
        # quadruples with a repeated point carry LP = -1 and are masked out
        block = max(1, (1 << 22) // (n ** 3))
        cd = LP[None, None, :, :]
        for a0 in range(0, n, block):
            La = LP[a0:a0 + block]
            ab = La[:, :, None, None]
            ac = La[:, None, :, None]
            bd = LP[None, :, None, :]
            valid = (ab >= 0) & (cd >= 0) & (ac >= 0) & (bd >= 0)
            hyp = valid & meet[np.maximum(ab, 0), np.maximum(cd, 0)]
            if (hyp & ~meet[np.maximum(ac, 0), np.maximum(bd, 0)]).any():
                return False, None
    return True, chain_dim(g, S)


def is_singular(g: Geometry, S) -> Optional[SingularSubspace]:
    """SingularSubspace if S is a subspace of pairwise collinear points, else None."""
    m = as_mask(g, S)
    if not is_subspace(g, m) or not is_pairwise_collinear(g, m):
        return None
    proj, dim = projective_check(g, bits.from_mask(m))
    return SingularSubspace(m, proj, dim)


def gamma_witness(g: Geometry, chunk: int = 256) -> Optional[tuple[int, int]]:
    """A (point, line) pair where the point sees some but not all (>1) points of the line."""
    sizes = g.line_sizes
    A = g.adjacency
    inc = g.incidence
    for start in range(0, g.point_count, chunk):
        rows = A[start:start + chunk].astype(np.int32)
        cnt = (inc @ rows.T).T  # (chunk, lines)
        on = (inc[:, start:start + chunk].T.toarray() > 0)
        bad = ~on & (cnt >= 2) & (cnt < sizes[None, :])
        if bad.any():
            p, li = np.argwhere(bad)[0]
            return int(p) + start, int(li)
    return None


def _bron_kerbosch(adj: Sequence[int], P: int, on_clique, closure=None) -> None:
    """Tomita-pivoted Bron-Kerbosch on python-int bitsets.

    With ``closure(R, R_indices, v)`` the current clique is replaced by its
    subspace closure after each extension; valid when every maximal clique is
    a subspace.
    """

    def expand(R: int, P: int, X: int) -> None:
        if not P and not X:
            on_clique(R)
            return
        PX = P | X
        u, best = -1, -1
        top = P.bit_count()
        b = PX
        while b:
            low = b & -b
            v = low.bit_length() - 1
            b ^= low
            c = (P & adj[v]).bit_count()
            if c > best:
                best, u = c, v
                if c == top:
                    break
        cand = P & ~adj[u]
        Ridx = bits.to_indices(R) if closure is not None else None
        while cand:
            low = cand & -cand
            v = low.bit_length() - 1
            cand ^= low
            R2 = R | low
            if closure is not None:
                R2 = closure(R, Ridx, v)
                if R2 & X:
                    # every clique through R2 contains an excluded vertex: already reported
                    P &= ~low
                    X |= low
                    continue
            common = -1
            for w in bits.to_indices(R2 & ~R):
                common &= adj[w]
            expand(R2, P & common & ~R2, X & common & ~R2)
            P &= ~low
            X |= low

    expand(0, P, 0)


def enumerate_maximal_singulars(g: Geometry, *, check_projective: bool = True) -> list[SingularSubspace]:
    """All maximal singular subspaces, in canonical (sorted point tuple) order.

    These are the maximal cliques of the collinearity graph that are
    subspaces.  In gamma spaces every maximal clique is a subspace and the
    search extends partial cliques by the lines joining each new vertex to them.
    """
    adj = g.adj_bits
    found: list[int] = []
    full = (1 << g.point_count) - 1
    if gamma_witness(g) is None and g.is_partial_linear:
        PL, lb = g.pair_line, g.line_bits

        def join(R: int, Ridx: list[int], v: int) -> int:
            # in a gamma space every maximal clique through R + v contains the joins vx
            acc = R | (1 << v)
            if Ridx:
                for li in set(PL[v, Ridx].tolist()):
                    acc |= lb[li]
            return acc

        _bron_kerbosch(adj, full, found.append, closure=join)
    else:
        cliques: list[int] = []
        _bron_kerbosch(adj, full, cliques.append)
        found = [c for c in cliques if closure_bits(g, c) == c]
    out = []
    # closure jumps can reach the same maximal clique along several branches
    for S in sorted(set(found), key=lambda b: bits.to_indices(b)):
        if check_projective:
            proj, dim = projective_check(g, S)
        else:
            proj, dim = False, None
        out.append(SingularSubspace(bits.to_mask(S, g.point_count), proj, dim))
    return out


# -- persistence --------------------------------------------------------------

def write_plg(g: Geometry, target) -> None:
    """Write the ``plg 1`` text format to a path or text stream."""
    buf = io.StringIO()
    buf.write(f"plg 1 {g.point_count} {len(g.lines)}\n")
    for t in g.lines:
        buf.write(" ".join(map(str, t)) + "\n")
    if g.labels is not None:
        buf.write("labels:\n")
        for i, lab in enumerate(g.labels):
            buf.write(f"{i} # {lab}\n")
    text = buf.getvalue()
    if hasattr(target, "write"):
        target.write(text)
    else:
        with open(target, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


class PlgParseError(ValueError):
    def __init__(self, msg: str, line: int):
        super().__init__(f"line {line}: {msg}")
        self.line = line


def read_plg(source) -> Geometry:
    """Read a ``plg 1`` file from a path, text stream or string content."""
    if hasattr(source, "read"):
        text = source.read()
    elif isinstance(source, (str, os.PathLike)) and os.path.exists(source):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = str(source)
    rows = text.split("\n")
    if rows and rows[-1] == "":
        rows.pop()
    if not rows:
        raise PlgParseError("empty input", 1)
    head = rows[0].split()
    if len(head) != 4 or head[0] != "plg" or head[1] != "1":
        raise PlgParseError("expected header 'plg 1 <points> <lines>'", 1)
    try:
        n, m = int(head[2]), int(head[3])
    except ValueError:
        raise PlgParseError("non-integer counts in header", 1) from None
    if len(rows) < 1 + m:
        raise PlgParseError(f"expected {m} line records", len(rows))
    lines = []
    for i in range(m):
        try:
            lines.append([int(x) for x in rows[1 + i].split()])
        except ValueError:
            raise PlgParseError("non-integer point index", 2 + i) from None
    labels = None
    rest = rows[1 + m:]
    if rest:
        if rest[0].strip() != "labels:":
            raise PlgParseError("expected 'labels:' footer", 2 + m)
        labels = [None] * n
        for j, row in enumerate(rest[1:]):
            idx, sep, lab = row.partition(" # ")
            if not sep:
                raise PlgParseError("label rows must read '<index> # <label>'", 3 + m + j)
            labels[int(idx)] = lab
        if any(x is None for x in labels):
            raise PlgParseError("labels footer does not cover every point", len(rows))
    try:
        return Geometry(n, lines, labels)
    except GeometryError as exc:
        raise PlgParseError(str(exc), 1) from None


def warn_uncovered(g: Geometry) -> None:
    if not g.covering:
        warnings.warn(f"{len(g.uncovered)} points lie on no line", stacklevel=2)
