"""Parapolar axioms, symplecta, spectra, lacunarity and related predicates."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import bits
from .geometry import (
    INF,
    Geometry,
    chain_dim,
    closure_bits,
    convex_closure,
    diameter,
    enumerate_maximal_singulars,
    gamma_witness,
    induced,
)
from .polar import PolarVerdict, verify_polar

LACUNARY_KS = tuple(range(-1, 7))


class NonPolarClosure(RuntimeError):
    def __init__(self, p: int, q: int, verdict: PolarVerdict):
        super().__init__(f"convex closure of ({p}, {q}) is not a polar space: {verdict.failures[:1]}")
        self.pair = (p, q)
        self.verdict = verdict


class IntersectionNotSingular(RuntimeError):
    def __init__(self, i: int, j: int, witness: tuple[int, int]):
        super().__init__(f"symps {i} and {j} meet in a set containing the non-collinear pair {witness}")
        self.symps = (i, j)
        self.witness = witness


@dataclass
class Symp:
    points: np.ndarray
    rank: int
    building_thick: bool
    generating_pair: tuple[int, int]
    max_singular_dim: int = -1

    @property
    def size(self) -> int:
        return int(self.points.sum())

    @property
    def indices(self) -> list[int]:
        return np.flatnonzero(self.points).tolist()

    def to_dict(self) -> dict:
        return {
            "size": self.size,
            "rank": self.rank,
            "building_thick": self.building_thick,
            "generating_pair": list(self.generating_pair),
        }


def common_neighbour_counts(g: Geometry) -> np.ndarray:
    A = g.adjacency.astype(np.float32)
    return (A @ A).astype(np.int32)


def _closure_symp(g: Geometry, p: int, q: int) -> Symp:
    S = convex_closure(g, [p, q])
    sub = induced(g, S)
    v = verify_polar(sub)
    if not v.is_polar:
        raise NonPolarClosure(p, q, v)
    return Symp(S, v.rank, v.building_thick, (p, q), v.rank - 1)


def _symps_in_rows(g: Geometry, rows: range, prune: bool) -> list[Symp]:
    n = g.point_count
    cand = common_neighbour_counts(g) >= 2
    cand &= ~g.adjacency
    np.fill_diagonal(cand, False)
    covered = np.zeros((n, n), dtype=bool)
    out = []
    for p in rows:
        row = cand[p, p + 1:] & ~covered[p, p + 1:]
        while row.any():
            q = p + 1 + int(np.argmax(row))
            s = _closure_symp(g, p, q)
            out.append(s)
            if prune:
                idx = np.flatnonzero(s.points)
                covered[np.ix_(idx, idx)] = True
            else:
                covered[p, q] = True
            row = cand[p, p + 1:] & ~covered[p, p + 1:]
    return out


def _worker(args):
    g, lo, hi, prune = args
    return _symps_in_rows(g, range(lo, hi), prune)


def find_symps(g: Geometry, *, prune: bool = True, threads: int = 1) -> list[Symp]:
    """All symplecta: convex closures of non-collinear pairs with >= 2 common neighbours.

    Pairs already inside a found symp are skipped when ``prune`` is set (the
    closure of such a pair is that symp).  With ``threads > 1`` the row range
    is split across processes; the merged result is deduplicated and sorted
    so it does not depend on the split.
    """
    n = g.point_count
    if threads > 1 and n > 64:
        cuts = np.linspace(0, n, threads * 4 + 1).astype(int)
        jobs = [(g, int(a), int(b), prune) for a, b in zip(cuts, cuts[1:]) if b > a]
        with ProcessPoolExecutor(max_workers=threads) as ex:
            found = [s for chunk in ex.map(_worker, jobs) for s in chunk]
    else:
        found = _symps_in_rows(g, range(n), prune)
    unique: dict[bytes, Symp] = {}
    for s in found:
        key = bits.mask_key(s.points)
        if key not in unique or s.generating_pair < unique[key].generating_pair:
            unique[key] = s
    return sorted(unique.values(), key=lambda s: s.indices)


# -- spectra --------------------------------------------------------------------

def _symp_matrix(g: Geometry, symps: list[Symp]) -> np.ndarray:
    if not symps:
        return np.zeros((0, g.point_count), dtype=bool)
    return np.stack([s.points for s in symps])


def singular_dim(g: Geometry, S: int) -> Optional[int]:
    """Projective dimension of a singular subspace given as a bitset; None if S
    holds a non-collinear pair or is not a subspace."""
    pts = bits.to_indices(S)
    if len(pts) == 1:
        return 0
    sub = g.adjacency[np.ix_(pts, pts)]
    if sub.sum() != len(pts) * (len(pts) - 1):
        return None
    if closure_bits(g, S) != S:
        return None
    li = g.pair_line[pts[0], pts[1]]
    if g.line_bits[li] == S:
        return 1
    return chain_dim(g, S)


@dataclass
class LacunaritySpectrum:
    dims: frozenset
    disjoint_pair: bool
    witnesses: dict = field(default_factory=dict)  # dim -> (i, j)

    def __contains__(self, k: int) -> bool:
        return self.disjoint_pair if k == -1 else k in self.dims


def lacunarity_spectrum(g: Geometry, symps: list[Symp]) -> LacunaritySpectrum:
    """Dimensions of the nonempty intersections of pairs of distinct symps.

    Empty intersections only set the ``disjoint_pair`` flag.
    """
    M = _symp_matrix(g, symps)
    if len(symps) < 2:
        return LacunaritySpectrum(frozenset(), False)
    F = M.astype(np.float32)
    sizes = (F @ F.T).astype(np.int64)
    iu, ju = np.triu_indices(len(symps), 1)
    sz = sizes[iu, ju]
    disjoint = bool((sz == 0).any())
    witnesses: dict[int, tuple[int, int]] = {}
    if disjoint:
        k = int(np.argmax(sz == 0))
        witnesses[-1] = (int(iu[k]), int(ju[k]))
    keep = sz > 0
    iu, ju = iu[keep].tolist(), ju[keep].tolist()
    b = [bits.from_mask(r) for r in M]
    meets: dict[int, tuple[int, int]] = {}
    for i, j in zip(iu, ju):
        S = b[i] & b[j]
        if S not in meets:
            meets[S] = (i, j)
    dims = set()
    for S, (i, j) in meets.items():
        d = singular_dim(g, S)
        if d is None:
            pts = bits.to_indices(S)
            sub = g.adjacency[np.ix_(pts, pts)] | np.eye(len(pts), dtype=bool)
            a, c = np.argwhere(~sub)[0] if (~sub).any() else (0, 0)
            raise IntersectionNotSingular(i, j, (pts[a], pts[c]))
        dims.add(d)
        witnesses.setdefault(d, (i, j))
    return LacunaritySpectrum(frozenset(dims), disjoint, witnesses)


# -- the report -----------------------------------------------------------------

@dataclass
class ParapolarReport:
    is_parapolar: bool
    connected: bool
    pps1: dict
    pps2: dict
    pps3: dict
    symps: list
    special_pairs: int
    special_sample: list
    empty_perp_pairs: int
    strong: bool
    rank_spectrum: frozenset
    diameter: float
    lacunarity: Optional[LacunaritySpectrum]
    max_singular_dims: dict
    every_symp_has_k_dim_singular: dict

    @property
    def lacunarity_spectrum(self) -> frozenset:
        return self.lacunarity.dims if self.lacunarity else frozenset()

    @property
    def disjoint_symp_pair(self) -> bool:
        return bool(self.lacunarity and self.lacunarity.disjoint_pair)

    def lacunary(self, k: int) -> bool:
        return is_k_lacunary(self, k)[0]

    def to_dict(self) -> dict:
        diam = self.diameter
        return {
            "is_parapolar": self.is_parapolar,
            "connected": self.connected,
            "pps1": self.pps1,
            "pps2": self.pps2,
            "pps3": self.pps3,
            "symp_count": len(self.symps),
            "symp_sizes": sorted({s.size for s in self.symps}),
            "special_pairs": self.special_pairs,
            "special_sample": self.special_sample,
            "empty_perp_pairs": self.empty_perp_pairs,
            "strong": self.strong,
            "rank_spectrum": sorted(self.rank_spectrum),
            "diameter": None if diam == math.inf else int(diam),
            "lacunarity_spectrum": sorted(self.lacunarity_spectrum),
            "disjoint_symp_pair": self.disjoint_symp_pair,
            "max_singular_dims": {str(k): v for k, v in sorted(self.max_singular_dims.items())},
            "every_symp_has_k_dim_singular": {str(k): v for k, v in self.every_symp_has_k_dim_singular.items()},
            "lacunary": {str(k): self.lacunary(k) for k in LACUNARY_KS},
        }


def _existence_witness(g: Geometry, chunk: int = 256) -> Optional[tuple[int, int]]:
    """A (point, line) pair with the point collinear to no point of the line."""
    inc = g.incidence
    for start in range(0, g.point_count, chunk):
        rows = g.adjacency[start:start + chunk].astype(np.int32)
        cnt = (inc @ rows.T).T
        on = inc[:, start:start + chunk].T.toarray() > 0
        free = ~on & (cnt == 0)
        if free.any():
            p, li = np.argwhere(free)[0]
            return int(p) + start, int(li)
    return None


def lines_in_symps(g: Geometry, symps: list[Symp], chunk: int = 256) -> np.ndarray:
    """Boolean per line: contained in some symp."""
    ok = np.zeros(len(g.lines), dtype=bool)
    inc = g.incidence
    for start in range(0, len(symps), chunk):
        M = _symp_matrix(g, symps[start:start + chunk]).astype(np.int32)
        cnt = inc @ M.T  # (lines, chunk)
        ok |= (cnt == g.line_sizes[:, None]).any(axis=1)
    return ok


def verify_parapolar(
    g: Geometry,
    *,
    symps: Optional[list[Symp]] = None,
    singulars: bool = True,
    threads: int = 1,
) -> ParapolarReport:
    """Check the three parapolar axioms and collect the invariants.

    ``singulars=False`` skips the maximal singular subspace census of the
    whole geometry (the slowest part on large inputs).
    """
    diam = diameter(g)
    connected = diam != math.inf
    gw = gamma_witness(g)
    ew = _existence_witness(g)
    pps1 = {
        "ok": connected and gw is None and ew is not None,
        "connected": connected,
        "gamma_witness": None if gw is None else {"point": gw[0], "line": list(g.lines[gw[1]])},
        "free_pair": None if ew is None else {"point": ew[0], "line": list(g.lines[ew[1]])},
    }
    C = common_neighbour_counts(g)
    noncol = ~g.adjacency
    np.fill_diagonal(noncol, False)
    upper = np.triu(noncol, 1)
    special = np.argwhere(upper & (C == 1))
    empty = int((upper & (C == 0)).sum())
    pps2 = {"ok": True, "witness": None}
    if symps is None:
        try:
            symps = find_symps(g, threads=threads)
        except NonPolarClosure as exc:
            symps = []
            pps2 = {"ok": False, "witness": {"pair": list(exc.pair), "failures": exc.verdict.failures[:3]}}
    covered = lines_in_symps(g, symps) if len(g.lines) else np.zeros(0, dtype=bool)
    bad = np.flatnonzero(~covered)
    pps3 = {"ok": not len(bad), "witness": None if not len(bad) else list(g.lines[bad[0]])}
    lac = None
    if pps2["ok"] and symps:
        lac = lacunarity_spectrum(g, symps)
    dims: dict[int, int] = {}
    if singulars:
        for m in enumerate_maximal_singulars(g):
            d = m.dim if m.dim is not None else -2
            dims[d] = dims.get(d, 0) + 1
    has_k = {str(k): bool(symps) and all(s.max_singular_dim >= k for s in symps) for k in LACUNARY_KS}
    return ParapolarReport(
        is_parapolar=pps1["ok"] and pps2["ok"] and pps3["ok"],
        connected=connected,
        pps1=pps1,
        pps2=pps2,
        pps3=pps3,
        symps=symps,
        special_pairs=len(special),
        special_sample=[[int(a), int(b)] for a, b in special[:5]],
        empty_perp_pairs=empty,
        strong=len(special) == 0,
        rank_spectrum=frozenset(s.rank for s in symps),
        diameter=diam,
        lacunarity=lac,
        max_singular_dims=dims,
        every_symp_has_k_dim_singular=has_k,
    )


def is_k_lacunary(report: ParapolarReport, k: int) -> tuple[bool, str]:
    """Minimum symplectic rank >= k+1 and no two symps meet in exactly a k-space."""
    if not report.is_parapolar:
        return False, "not a parapolar space"
    if not report.rank_spectrum:
        return False, "no symps"
    lo = min(report.rank_spectrum)
    if lo < k + 1:
        return False, f"minimum symplectic rank {lo} < {k + 1}"
    if report.lacunarity is None:
        return False, "lacunarity spectrum unavailable"
    if k in report.lacunarity:
        what = "a disjoint symp pair exists" if k == -1 else f"two symps meet in a {k}-space"
        return False, what
    return True, "ok"


def is_imbrex(g: Geometry, report: ParapolarReport) -> tuple[bool, str]:
    """Symps sharing only a point p never meet a common line off p's perp."""
    if not (report.is_parapolar and report.strong and report.diameter == 2 and report.rank_spectrum == {2}):
        return False, "not applicable: needs a strong diameter-2 parapolar space of symplectic rank 2"
    M = _symp_matrix(g, report.symps)
    F = M.astype(np.float32)
    sizes = F @ F.T
    A = g.adjacency
    for i, j in zip(*np.nonzero(np.triu(sizes == 1, 1))):
        p = int(np.argmax(M[i] & M[j]))
        off = ~A[p]
        off[p] = False
        U1, U2 = M[i] & off, M[j] & off
        if (A[np.ix_(U1, U2)]).any():
            a, b = np.argwhere(A[np.ix_(U1, U2)])[0]
            x1, x2 = np.flatnonzero(U1)[a], np.flatnonzero(U2)[b]
            return False, f"symps {i} and {j} share only point {p}; line through {x1} and {x2} meets both off its perp"
    return True, "ok"


@dataclass
class KSConditions:
    perp_meets_every_symp: bool
    balls_are_hyperplanes: bool
    singulars_finite: bool
    witnesses: dict = field(default_factory=dict)

    def as_tuple(self) -> tuple[bool, bool, bool]:
        return (self.perp_meets_every_symp, self.balls_are_hyperplanes, self.singulars_finite)


def ks_hypotheses(g: Geometry, report: ParapolarReport, chunk: int = 256) -> KSConditions:
    """The three Kasikova-Shult conditions, checked exhaustively."""
    wit: dict = {}
    n = g.point_count
    M = _symp_matrix(g, report.symps).astype(np.float32)
    Ap = (g.adjacency | np.eye(n, dtype=bool)).astype(np.float32)
    c1 = True
    if len(M):
        hit = (M @ Ap) > 0  # (symps, points): x^perp meets the symp
        if not hit.all():
            c1 = False
            s, x = np.argwhere(~hit)[0]
            wit["perp_meets_every_symp"] = {"symp": int(s), "point": int(x)}
    c2 = True
    inc = g.incidence
    D = g.distances
    for start in range(0, n, chunk):
        balls = D[start:start + chunk] <= 2  # (chunk, points)
        cnt = (inc @ balls.T.astype(np.int32))  # (lines, chunk)
        sizes = g.line_sizes[:, None]
        proper = ~balls.all(axis=1)
        meets = (cnt >= 1).all(axis=0)
        closed = ~((cnt >= 2) & (cnt < sizes)).any(axis=0)
        good = proper & meets & closed
        if not good.all():
            c2 = False
            wit["balls_are_hyperplanes"] = {"point": int(start + np.argmax(~good))}
            break
    # every chain of subspaces in a finite geometry is finite
    c3 = g.point_count < math.inf
    return KSConditions(c1, c2, c3, wit)


def default_threads() -> int:
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1))


__all__ = [
    "INF",
    "IntersectionNotSingular",
    "KSConditions",
    "LacunaritySpectrum",
    "NonPolarClosure",
    "ParapolarReport",
    "Symp",
    "default_threads",
    "find_symps",
    "is_imbrex",
    "is_k_lacunary",
    "ks_hypotheses",
    "lacunarity_spectrum",
    "lines_in_symps",
    "verify_parapolar",
]
