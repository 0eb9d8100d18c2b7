"""Grassmannians of projective and polar spaces, half-spin geometries, products.

Points of a Grassmannian are vector subspaces, keyed by their sorted set of
projective point indices.  Lines come from subspace patterns: inside a
(k+1)-space ``B`` listed in coefficient order, a line is the set of k-patterns
through a fixed (k-1)-pattern.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Union

import numpy as np

from . import bits
from .geometry import Geometry, enumerate_maximal_singulars
from .gf import VectorSpace, pattern_containment, rref_key, rref_subspaces, subspace_patterns
from .polar import (
    PolarSpace,
    half_spin_family,
    maximal_bases,
    next_to_maximal_counts,
    singular_subspaces_of_polar,
    totally_singular,
    verify_polar,
)


def _key(pts) -> bytes:
    return np.sort(np.asarray(pts, dtype=np.int64)).tobytes()


def _pencil_lines(q: int, ambients: list[np.ndarray], k: int, index: dict[bytes, int]) -> list[list[int]]:
    """Lines of a Grassmannian of k-spaces: one per ((k-1)-space, (k+1)-space) flag.

    ``ambients`` lists the point indices of each (k+1)-space in coefficient order.
    """
    kp = np.array(subspace_patterns(q, k + 1, k), dtype=np.int64)
    cont = pattern_containment(q, k + 1, k - 1, k)
    lines = []
    for pts in ambients:
        members = [index[_key(pts[p])] for p in kp]
        for through in cont:
            lines.append([members[h] for h in through])
    return lines


def grassmannian_A(n: int, k: int, q: int) -> Geometry:
    """A_{n,k}(q): (k-1)-spaces of PG(n, q), lines = pencils."""
    if not 1 <= k <= n:
        raise ValueError(f"A_{{{n},{k}}} needs 1 <= k <= n")
    vs = VectorSpace(q, n + 1)
    subs = rref_subspaces(q, n + 1, k)
    index = {_key(vs.span_points(M)): i for i, M in enumerate(subs)}
    ambients = [vs.span_points(B) for B in rref_subspaces(q, n + 1, k + 1)]
    lines = _pencil_lines(q, ambients, k, index)
    return Geometry(len(subs), lines, [rref_key(M) for M in subs], name=f"A:{n}:{k}:{q}")


def projective_space(n: int, q: int) -> Geometry:
    return grassmannian_A(n, 1, q)


def _polar_labels(polar: PolarSpace, members) -> list[str]:
    return [rref_key(polar.vs.basis_of(polar.vs_index[list(t)])) for t in members]


def polar_grassmannian(polar: Union[PolarSpace, Geometry], k: int) -> Geometry:
    """B_{n,k}: (k-1)-dimensional singular subspaces.

    For k below the rank a line is the set of (k-1)-singulars between a fixed
    (k-2)-singular and a fixed k-singular; for k equal to the rank this is the
    dual polar space.
    """
    if not isinstance(polar, PolarSpace):
        return _polar_grassmannian_geometric(polar, k)
    r = polar.rank
    if not 1 <= k <= r:
        raise ValueError(f"k={k} outside 1..{r}")
    if k == r:
        return dual_polar(polar)
    members = totally_singular(polar, k)
    index = {_key(t): i for i, t in enumerate(members)}
    local = np.full(polar.vs.n_points, -1, dtype=np.int64)
    local[polar.vs_index] = np.arange(len(polar.vs_index))
    ambients = []
    for t in totally_singular(polar, k + 1):
        B = polar.vs.basis_of(polar.vs_index[list(t)])
        ambients.append(local[polar.vs.span_points(B)])
    lines = _pencil_lines(polar.spec.q, ambients, k, index)
    name = f"Bgr:{polar.spec.kind}:{polar.spec.dim}:{polar.spec.q}:k={k}"
    return Geometry(len(members), lines, _polar_labels(polar, members), name=name)


def _group_by_subpattern(polar: PolarSpace, chosen: list[int], sub_dim: int) -> list[list[int]]:
    """Group the chosen maximal singulars by their sub_dim-dimensional vector subspaces."""
    bases = maximal_bases(polar)
    pats = np.array(subspace_patterns(polar.spec.q, polar.rank, sub_dim), dtype=np.int64)
    P = np.stack([bases[i] for i in chosen])
    keys = np.sort(P[:, pats], axis=-1)  # (members, patterns, size)
    flat = keys.reshape(-1, keys.shape[-1])
    _, inv = np.unique(flat, axis=0, return_inverse=True)
    owner = np.repeat(np.arange(len(chosen)), len(pats))
    groups: dict[int, list[int]] = defaultdict(list)
    for g_id, m in zip(inv.ravel().tolist(), owner.tolist()):
        groups[g_id].append(m)
    return [sorted(v) for v in groups.values() if len(v) >= 2]


def dual_polar(polar: Union[PolarSpace, Geometry]) -> Geometry:
    """Maximal singulars; a line is all maximals through a next-to-maximal singular."""
    if not isinstance(polar, PolarSpace):
        return _dual_polar_geometric(polar)
    maxi = polar.maximal_singulars()
    lines = _group_by_subpattern(polar, list(range(len(maxi))), polar.rank - 1)
    members = [bits.to_indices(M) for M in maxi]
    name = f"dualpolar:{polar.spec.kind}:{polar.spec.dim}:{polar.spec.q}"
    return Geometry(len(maxi), lines, _polar_labels(polar, members), name=name)


def half_spin(polar: PolarSpace, which: int = 0) -> Geometry:
    """D_{n,n}: one family of generators of a hyperbolic quadric of rank n >= 3.

    A line is the set of family members through a fixed (n-2)-dimensional
    totally singular vector subspace.
    """
    if polar.spec.kind != "o+":
        raise ValueError("half-spin geometries need a hyperbolic (non-thick) polar space")
    if polar.rank < 3:
        raise ValueError("half-spin geometries need rank >= 3")
    fam = half_spin_family(polar, which)
    lines = _group_by_subpattern(polar, fam, polar.rank - 2)
    maxi = polar.maximal_singulars()
    members = [bits.to_indices(maxi[i]) for i in fam]
    name = f"halfspin:o+:{polar.spec.dim}:{polar.spec.q}"
    return Geometry(len(fam), lines, _polar_labels(polar, members), name=name)


# -- generic (vector-free) versions for small abstract polar spaces --------------

def _dual_polar_geometric(g: Geometry) -> Geometry:
    v = verify_polar(g)
    if v.rank is None:
        raise ValueError("input is not a polar space")
    maxi = [bits.from_mask(m.points) for m in enumerate_maximal_singulars(g)]
    M = np.stack([bits.to_mask(b, g.point_count) for b in maxi])
    lines = []
    for S, _ in next_to_maximal_counts(g, maxi, v.rank):
        s = bits.to_mask(S, g.point_count)
        lines.append(np.flatnonzero((M & s).sum(axis=1) == s.sum()).tolist())
    return Geometry(len(maxi), lines, [",".join(map(str, bits.to_indices(b))) for b in maxi])


def _polar_grassmannian_geometric(g: Geometry, k: int) -> Geometry:
    v = verify_polar(g)
    if v.rank is None:
        raise ValueError("input is not a polar space")
    if k == v.rank:
        return _dual_polar_geometric(g)
    pts = [bits.from_mask(s.points) for s in singular_subspaces_of_polar(g, k)]
    if k == 1:
        return Geometry(g.point_count, g.lines, g.labels)
    lower = [bits.from_mask(s.points) for s in singular_subspaces_of_polar(g, k - 1)]
    upper = [bits.from_mask(s.points) for s in singular_subspaces_of_polar(g, k + 1)]
    lines = set()
    for B in upper:
        inside = [i for i, p in enumerate(pts) if p & ~B == 0]
        for S in lower:
            if S & ~B:
                continue
            line = tuple(i for i in inside if S & ~pts[i] == 0)
            if len(line) >= 2:
                lines.add(line)
    return Geometry(len(pts), lines, [",".join(map(str, bits.to_indices(b))) for b in pts])


# -- products -------------------------------------------------------------------

def thick_line(s: int = 3) -> Geometry:
    if s < 2:
        raise ValueError("a line needs at least 2 points")
    return Geometry(s, [range(s)], [str(i) for i in range(s)], name=f"line:{s}")


def product(g1: Geometry, g2: Geometry) -> Geometry:
    """Cartesian product: point (i, j) has index i * |X2| + j."""
    n1, n2 = g1.point_count, g2.point_count
    lines = []
    for i in range(n1):
        lines.extend([i * n2 + x for x in L] for L in g2.lines)
    for j in range(n2):
        lines.extend([x * n2 + j for x in L] for L in g1.lines)
    labels = [f"({i},{j})" for i in range(n1) for j in range(n2)]
    name = f"prod:({g1.name})x({g2.name})" if g1.name and g2.name else None
    return Geometry(n1 * n2, lines, labels, name=name)


def segre(n1: int, n2: int, q: int) -> Geometry:
    """Product of PG(n1, q) and PG(n2, q), the Segre geometry A_{n1,1} x A_{n2,1}."""
    return product(projective_space(n1, q), projective_space(n2, q))
