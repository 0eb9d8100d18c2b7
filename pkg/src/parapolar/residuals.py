"""Point-residuals, local connectivity, component tags, fingerprints and exact isomorphism."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .analysis import ParapolarReport, Symp, verify_parapolar
from .geometry import Geometry, components, diameter, induced


@dataclass
class Residual:
    geometry: Geometry
    parent_point: int
    point_lines: tuple  # residual point -> parent line index
    line_planes: tuple  # residual line -> sorted parent point indices of its plane
    dropped_planes: int = 0  # singular planes through p lying in no symp

    def to_dict(self) -> dict:
        return {
            "parent_point": self.parent_point,
            "points": self.geometry.point_count,
            "lines": len(self.geometry.lines),
            "dropped_planes": self.dropped_planes,
        }


def point_residual(g: Geometry, p: int, symps: list[Symp]) -> Residual:
    """Lines through p; residual lines are the pencils through p in singular
    planes contained in some symp."""
    through = list(g.point_lines[p])
    m = len(through)
    ptline = np.full(g.point_count, -1, dtype=np.int64)
    B = np.zeros((m, g.point_count), dtype=bool)
    for i, li in enumerate(through):
        pts = list(g.lines[li])
        ptline[pts] = i
        B[i, pts] = True
    ptline[p] = -1
    B[:, p] = False
    Bf = B.astype(np.float32)
    AB = Bf @ g.adjacency.astype(np.float32)  # (m, N): neighbours of each line's points
    meet = (AB @ Bf.T) > 0
    np.fill_diagonal(meet, False)
    here = [s.points for s in symps if s.points[p]]
    SM = np.stack(here) if here else np.zeros((0, g.point_count), dtype=bool)
    done = np.zeros((m, m), dtype=bool)
    lines, planes = [], []
    dropped = 0
    for i, j in zip(*np.nonzero(np.triu(meet, 1))):
        if done[i, j]:
            continue
        a = int(np.argmax(B[i] & (g.adjacency[np.flatnonzero(B[j])].any(axis=0))))
        b = int(np.flatnonzero(B[j] & g.adjacency[a])[0])
        base = g.lines[g.pair_line[a, b]]
        pencil = sorted({int(ptline[x]) for x in base})
        plane = np.zeros(g.point_count, dtype=bool)
        plane[p] = True
        for r in pencil:
            plane |= B[r]
        done[np.ix_(pencil, pencil)] = True
        if not len(SM) or not SM[:, plane].all(axis=1).any():
            dropped += 1
            continue
        lines.append(pencil)
        planes.append(tuple(np.flatnonzero(plane).tolist()))
    order = sorted(range(len(lines)), key=lambda k: lines[k])
    res = Geometry(m, [lines[k] for k in order], [str(li) for li in through], allow_uncovered=True)
    # Geometry sorts lines canonically; the order above matches it
    return Residual(res, p, tuple(through), tuple(planes[k] for k in order), dropped)


def is_locally_connected(
    g: Geometry, symps: list[Symp], points=None
) -> tuple[bool, Optional[int]]:
    """True iff every (checked) point-residual is connected; else the first offender."""
    pts = range(g.point_count) if points is None else points
    for p in pts:
        if len(components(point_residual(g, p, symps).geometry)) != 1:
            return False, int(p)
    return True, None


@dataclass
class ComponentTag:
    tag: str  # single-line | symp-residue | strong-parapolar | unclassified
    points: tuple
    report: Optional[ParapolarReport] = None

    def to_dict(self) -> dict:
        out = {"tag": self.tag, "size": len(self.points)}
        if self.report is not None:
            out["rank_spectrum"] = sorted(self.report.rank_spectrum)
        return out


def classify_components(res: Residual, g: Geometry, symps: list[Symp]) -> list[ComponentTag]:
    """Tag each connected component of a residual by the residual trichotomy."""
    out = []
    p = res.parent_point
    # lines through p inside each symp through p, as residual point sets
    line_pos = {li: i for i, li in enumerate(res.point_lines)}
    symp_sets = []
    for s in symps:
        if s.points[p]:
            inside = frozenset(
                line_pos[li] for li in res.point_lines if all(s.points[x] for x in g.lines[li])
            )
            symp_sets.append((s, inside))
    for comp in components(res.geometry):
        pts = tuple(int(x) for x in comp)
        if len(pts) == 1:
            out.append(ComponentTag("single-line", pts))
            continue
        if any(s.rank >= 3 and inside == frozenset(pts) for s, inside in symp_sets):
            out.append(ComponentTag("symp-residue", pts))
            continue
        sub = induced(res.geometry, comp)
        rep = verify_parapolar(sub)
        tag = "strong-parapolar" if rep.is_parapolar and rep.strong else "unclassified"
        out.append(ComponentTag(tag, pts, rep))
    return out


# -- fingerprints -----------------------------------------------------------------

@dataclass(frozen=True)
class Fingerprint:
    """Isomorphism invariants; equal fingerprints do not imply isomorphism."""

    points: int
    lines: int
    line_sizes: tuple
    degrees: tuple
    diameter: Optional[int]
    symp_ranks: tuple
    max_singular_dims: tuple
    strong: bool

    def to_dict(self) -> dict:
        return {
            "points": self.points,
            "lines": self.lines,
            "line_sizes": [list(t) for t in self.line_sizes],
            "degrees": [list(t) for t in self.degrees],
            "diameter": self.diameter,
            "symp_ranks": [list(t) for t in self.symp_ranks],
            "max_singular_dims": [list(t) for t in self.max_singular_dims],
            "strong": self.strong,
        }


def _multiset(values) -> tuple:
    return tuple(sorted(Counter(int(v) for v in values).items()))


def fingerprint(g: Geometry, report: Optional[ParapolarReport] = None) -> Fingerprint:
    if report is None:
        report = verify_parapolar(g)
    d = diameter(g)
    dims = []
    for k, c in report.max_singular_dims.items():
        dims.extend([k] * c)
    return Fingerprint(
        points=g.point_count,
        lines=len(g.lines),
        line_sizes=_multiset(g.line_sizes),
        degrees=_multiset(g.adjacency.sum(axis=1)),
        diameter=None if d == math.inf else int(d),
        symp_ranks=_multiset(s.rank for s in report.symps),
        max_singular_dims=_multiset(dims),
        strong=report.strong,
    )


def fingerprints_equal(a: Fingerprint, b: Fingerprint) -> bool:
    return a == b


# -- exact isomorphism --------------------------------------------------------------

class SizeExceeded(ValueError):
    """The combined incidence graphs exceed the exact-isomorphism size gate."""


def _incidence_adjacency(g: Geometry) -> list[list[int]]:
    """Bipartite point-line incidence graph: points first, then lines."""
    n = g.point_count
    adj: list[list[int]] = [[] for _ in range(n + len(g.lines))]
    for i, L in enumerate(g.lines):
        for x in L:
            adj[x].append(n + i)
            adj[n + i].append(x)
    return adj


def _refine(adj: list[list[int]], colors: list[int]) -> list[int]:
    """Colour refinement to the coarsest equitable partition; colours are
    renumbered canonically from signatures so both graphs stay comparable."""
    k = len(set(colors))
    while True:
        sig = [(colors[v], tuple(sorted(colors[u] for u in adj[v]))) for v in range(len(adj))]
        table = {s: i for i, s in enumerate(sorted(set(sig)))}
        new = [table[s] for s in sig]
        if len(table) == k:
            return new
        colors, k = new, len(table)


def _search(adj, n1, colors, pairs_checked) -> Optional[list[int]]:
    colors = _refine(adj, colors)
    left = Counter(colors[:n1])
    if left != Counter(colors[n1:]):
        return None
    cells: dict[int, list[int]] = {}
    for v in range(n1):
        cells.setdefault(colors[v], []).append(v)
    multi = [c for c, vs in cells.items() if len(vs) > 1]
    if not multi:
        where = {colors[v]: v for v in range(n1, len(adj))}
        mapping = [where[colors[v]] - n1 for v in range(n1)]
        return mapping
    c = min(multi, key=lambda c: (len(cells[c]), c))
    v = cells[c][0]
    fresh = max(colors) + 1
    for w in range(n1, len(adj)):
        if colors[w] != c:
            continue
        trial = list(colors)
        trial[v] = fresh
        trial[w] = fresh
        pairs_checked[0] += 1
        got = _search(adj, n1, trial, pairs_checked)
        if got is not None:
            return got
    return None


def find_isomorphism(g1: Geometry, g2: Geometry, max_vertices: int = 5000) -> Optional[list[int]]:
    """Point map of an isomorphism g1 -> g2 (as a list), or None.

    Individualization-refinement on the disjoint union of the two incidence
    graphs.  Raises SizeExceeded above ``max_vertices`` combined vertices.
    """
    total = g1.point_count + len(g1.lines) + g2.point_count + len(g2.lines)
    if total > max_vertices:
        raise SizeExceeded(f"{total} incidence vertices exceed the limit {max_vertices}")
    if (g1.point_count, len(g1.lines)) != (g2.point_count, len(g2.lines)):
        return None
    a1, a2 = _incidence_adjacency(g1), _incidence_adjacency(g2)
    n1 = len(a1)
    adj = a1 + [[u + n1 for u in nb] for nb in a2]
    kind = [0] * g1.point_count + [1] * len(g1.lines) + [0] * g2.point_count + [1] * len(g2.lines)
    mapping = _search(adj, n1, kind, [0])
    if mapping is None:
        return None
    pmap = mapping[: g1.point_count]
    image = {tuple(sorted(pmap[x] for x in L)) for L in g1.lines}
    if image != set(g2.lines):
        return None  # refinement produced a non-isomorphism; never observed, kept as a guard
    return pmap


def exact_iso_small(g1: Geometry, g2: Geometry, max_vertices: int = 5000) -> bool:
    return find_isomorphism(g1, g2, max_vertices) is not None


# -- sweeps -----------------------------------------------------------------------

@dataclass
class SweepResult:
    points: tuple
    fingerprints: dict  # point -> Fingerprint
    classes: dict = field(default_factory=dict)  # Fingerprint -> sorted points

    def uniform(self) -> bool:
        return len(self.classes) == 1

    def to_dict(self) -> dict:
        return {
            "points_checked": len(self.points),
            "distinct_fingerprints": len(self.classes),
            "classes": [
                {"fingerprint": fp.to_dict(), "points": len(pts), "first": pts[0]}
                for fp, pts in sorted(self.classes.items(), key=lambda kv: kv[1][0])
            ],
        }


def _residual_fingerprint(args) -> tuple[int, Fingerprint]:
    g, p, symps = args
    return p, fingerprint(point_residual(g, p, symps).geometry)


def residual_sweep(g: Geometry, symps: list[Symp], points=None, threads: int = 1) -> SweepResult:
    """Fingerprint the residual at each given point (all points by default)."""
    pts = tuple(range(g.point_count)) if points is None else tuple(sorted(int(p) for p in points))
    if threads > 1 and len(pts) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(threads) as ex:
            got = dict(ex.map(_residual_fingerprint, [(g, p, symps) for p in pts], chunksize=8))
    else:
        got = dict(_residual_fingerprint((g, p, symps)) for p in pts)
    classes: dict = {}
    for p in pts:
        classes.setdefault(got[p], []).append(p)
    return SweepResult(pts, got, {k: tuple(v) for k, v in classes.items()})


def sample_points(n: int, count: int, seed: int = 0) -> list[int]:
    """Deterministic random sample of point indices."""
    rng = np.random.default_rng(seed)
    return sorted(rng.choice(n, size=min(count, n), replace=False).tolist())
