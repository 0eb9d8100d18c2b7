"""Unbuttoning a parapolar space into sheets and buttoning sheets back together.

Global point numbering: the points of sheet ``i`` occupy the range
``offsets[i] .. offsets[i+1]-1`` of the disjoint union.  Cross-sheet distances
are infinite.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .analysis import Symp, find_symps, verify_parapolar
from .geometry import INF, Geometry, components, induced
from .polar import verify_polar
from .residuals import exact_iso_small, fingerprint, is_locally_connected, point_residual

# C1 asks for a length sum of at least 5; anything at or above this is "far"
C1_BOUND = 5


class RankTooLow(ValueError):
    """Unbuttoning needs every symp to have rank at least 3."""


class C1Violation(ValueError):
    def __init__(self, witness: dict):
        super().__init__(f"condition C1 fails: {witness}")
        self.witness = witness


class C2Violation(ValueError):
    def __init__(self, parts: list):
        super().__init__(f"condition C2 fails: sheet graph has components {parts}")
        self.parts = parts


class SheetNotValid(ValueError):
    pass


class LiftCollision(RuntimeError):
    """Two distinct sheet lines map to the same buttoned line."""


@dataclass
class SheetAssembly:
    sheets: list
    classes: list  # sorted tuples of global indices, sorted by first element
    origins: Optional[list] = None  # per global point: (parent point, component) for unbuttonings
    c1: Optional[tuple] = None
    c2: Optional[tuple] = None
    _union: Optional[Geometry] = field(default=None, repr=False)

    def __post_init__(self):
        sizes = [s.point_count for s in self.sheets]
        self.offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
        total = int(self.offsets[-1])
        cls = np.full(total, -1, dtype=np.int64)
        canon = sorted(tuple(sorted(int(x) for x in c)) for c in self.classes)
        for i, c in enumerate(canon):
            if not c:
                raise ValueError("empty equivalence class")
            if (cls[list(c)] >= 0).any():
                raise ValueError("classes overlap")
            cls[list(c)] = i
        if (cls < 0).any():
            raise ValueError(f"point {int(np.argmax(cls < 0))} is in no class")
        self.classes = canon
        self.class_of = cls

    @classmethod
    def from_glue(cls, sheets: Sequence[Geometry], glue: Sequence[Sequence[tuple[int, int]]]) -> "SheetAssembly":
        """Classes are the glue groups of (sheet, point) pairs; every other point is alone."""
        sizes = [s.point_count for s in sheets]
        offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
        seen = set()
        classes = []
        for group in glue:
            ids = []
            for s, p in group:
                if not (0 <= s < len(sheets)) or not (0 <= p < sizes[s]):
                    raise ValueError(f"glue entry ({s} {p}) out of range")
                ids.append(int(offsets[s] + p))
            classes.append(tuple(ids))
            seen.update(ids)
        classes.extend((x,) for x in range(int(offsets[-1])) if x not in seen)
        return cls(list(sheets), classes)

    @property
    def point_count(self) -> int:
        return int(self.offsets[-1])

    def sheet_of(self, x: int) -> int:
        return int(np.searchsorted(self.offsets, x, side="right") - 1)

    def local(self, x: int) -> tuple[int, int]:
        s = self.sheet_of(x)
        return s, int(x - self.offsets[s])

    def union(self) -> Geometry:
        """Disjoint union of the sheets as one geometry on global indices."""
        if self._union is None:
            lines = []
            for s, g in enumerate(self.sheets):
                off = int(self.offsets[s])
                lines.extend([off + x for x in L] for L in g.lines)
            self._union = Geometry(self.point_count, lines, allow_uncovered=True)
        return self._union

    def nontrivial(self) -> list:
        return [c for c in self.classes if len(c) > 1]


# -- conditions ------------------------------------------------------------------

def validate_c1(asm: SheetAssembly) -> tuple[bool, Optional[dict]]:
    """Bounded walk search equivalent to the four-class distance condition.

    The sum d(p2,q1) + d(q2,r1) + d(r2,s1) + d(s2,p1) is the length of a walk
    from p2 to p1 inside sheets that may jump between members of the same
    class at its three intermediate stops q, r, s.  The first and last terms
    are at least 1 because the stops avoid the class of p.  Hence C1 fails
    iff, for some p2 in a class P with another member p1, there is a walk of
    at most 4 sheet edges from p2 to p1 that passes at least one stop, where
    stops are intermediate vertices outside P and a jump to a class mate is
    allowed at each stop.  A breadth-first search over (vertex, length,
    stopped) states with parent links finds such a walk and its witness.
    """
    A = asm.union().adjacency
    nbrs = [np.flatnonzero(r) for r in A]
    mates = {i: c for c in asm.classes if len(c) > 1 for i in c}
    for P in asm.nontrivial():
        Pset = set(P)
        for p2 in P:
            start = (p2, False)
            parent = {(0, start): None}
            layer = [start]
            for length in range(1, C1_BOUND):
                nxt = []
                for v, stopped in layer:
                    for u in nbrs[v]:
                        u = int(u)
                        if stopped and u in Pset and u != p2:
                            path = _unwind(parent, (length - 1, (v, stopped))) + [("edge", u)]
                            return False, _c1_witness(asm, P, p2, u, path)
                        states = [(u, stopped)]
                        if u not in Pset:
                            states.append((u, True))
                            states.extend((w, True) for w in mates.get(u, ()) if w != u)
                        for st in states:
                            key = (length, st)
                            if key not in parent:
                                parent[key] = ((length - 1, (v, stopped)), u, st[0])
                                nxt.append(st)
                layer = nxt
    return True, None


def _unwind(parent, key) -> list:
    steps = []
    while parent[key] is not None:
        prev, via, at = parent[key]
        if via != at:
            steps.append(("jump", at))
        steps.append(("edge", via))
        key = prev
    steps.append(("start", key[1][0]))
    return steps[::-1]


def _c1_witness(asm, P, p2, p1, path) -> dict:
    return {
        "class": [list(asm.local(x)) for x in P],
        "p2": list(asm.local(p2)),
        "p1": list(asm.local(p1)),
        "walk": [[s[0]] + [list(asm.local(x)) for x in s[1:]] for s in path],
        "length": sum(1 for s in path if s[0] == "edge"),
    }


def c1_literal(asm: SheetAssembly) -> tuple[bool, Optional[dict]]:
    """C1 by direct minimisation over class triples (Q, R, S) for each (p1, p2).

    With c(X, Y) = min distance between members of X and Y (0 when X = Y), the
    smallest sum for fixed p1, p2 is min over Q, R, S outside P of
    d(p2, Q) + c(Q, R) + c(R, S) + d(S, p1).  Meant as a cross-check on small
    assemblies.
    """
    D = asm.union().distances.astype(np.int64)
    D[D == INF] = C1_BOUND
    np.minimum(D, C1_BOUND, out=D)
    nc = len(asm.classes)
    onehot = np.zeros((nc, asm.point_count), dtype=bool)
    for i, c in enumerate(asm.classes):
        onehot[i, list(c)] = True
    # point-to-class distances, then class-to-class
    pc = np.stack([D[:, list(c)].min(axis=1) for c in asm.classes], axis=1)  # (points, classes)
    cc = np.stack([pc[list(c)].min(axis=0) for c in asm.classes])  # (classes, classes)
    np.fill_diagonal(cc, 0)
    for ip, P in enumerate(asm.classes):
        if len(P) < 2:
            continue
        keep = np.ones(nc, dtype=bool)
        keep[ip] = False
        if not keep.any():
            # no stop outside P, so no walk to test
            continue
        sub =cc[np.ix_(keep, keep)]
        for p2 in P:
            v = pc[p2, keep]
            # min over Q of v[Q] + c(Q, R), then over R of . + c(R, S)
            vr = (v[:, None] + sub).min(axis=0)
            vs = (vr[:, None] + sub).min(axis=0)
            for p1 in P:
                if p1 == p2:
                    continue
                total = (vs + pc[p1, keep]).min()
                if total < C1_BOUND:
                    return False, {"p2": list(asm.local(p2)), "p1": list(asm.local(p1)), "sum": int(total)}
    return True, None


def sheet_graph(asm: SheetAssembly) -> list[set]:
    adj = [set() for _ in asm.sheets]
    for c in asm.nontrivial():
        owners = sorted({asm.sheet_of(x) for x in c})
        for a in owners:
            adj[a].update(b for b in owners if b != a)
    return adj


def validate_c2(asm: SheetAssembly) -> tuple[bool, list]:
    """The sheet graph (sheets sharing a class are adjacent) is connected."""
    adj = sheet_graph(asm)
    seen = [False] * len(adj)
    parts = []
    for s in range(len(adj)):
        if seen[s]:
            continue
        part, todo = [], deque([s])
        seen[s] = True
        while todo:
            a = todo.popleft()
            part.append(a)
            for b in adj[a]:
                if not seen[b]:
                    seen[b] = True
                    todo.append(b)
        parts.append(sorted(part))
    return len(parts) <= 1, parts


def check_sheet(g: Geometry) -> tuple[bool, str]:
    """A sheet must be a polar space of rank >= 2 or a locally connected parapolar space."""
    v = verify_polar(g)
    if v.is_polar:
        return True, f"polar rank {v.rank}"
    r = verify_parapolar(g, singulars=False)
    if not r.is_parapolar:
        return False, "neither polar nor parapolar"
    ok, p = is_locally_connected(g, r.symps)
    if not ok:
        return False, f"not locally connected at point {p}"
    return True, "parapolar"


def button(asm: SheetAssembly, *, check_sheets: bool = True) -> Geometry:
    """Glue the sheets along the classes: points are classes, lines are images of sheet lines."""
    ok1, w1 = validate_c1(asm)
    asm.c1 = (ok1, w1)
    if not ok1:
        raise C1Violation(w1)
    ok2, parts = validate_c2(asm)
    asm.c2 = (ok2, parts)
    if not ok2:
        raise C2Violation(parts)
    if check_sheets:
        for i, s in enumerate(asm.sheets):
            ok, why = check_sheet(s)
            if not ok:
                raise SheetNotValid(f"sheet {i}: {why}")
    images = []
    for L in asm.union().lines:
        images.append(tuple(sorted(int(asm.class_of[x]) for x in L)))
    if len(set(images)) != len(images):
        raise LiftCollision("two sheet lines have the same image")
    labels = ["=".join(f"{s}:{p}" for s, p in map(asm.local, c)) for c in asm.classes]
    return Geometry(len(asm.classes), images, labels)


# -- unbuttoning -----------------------------------------------------------------------

def residual_components(g: Geometry, symps: list[Symp]) -> list[dict]:
    """Per point: map line index -> component number of its residual."""
    out = []
    for p in range(g.point_count):
        res = point_residual(g, p, symps)
        comp = {}
        for k, c in enumerate(components(res.geometry)):
            for r in c:
                comp[res.point_lines[int(r)]] = k
        out.append(comp)
    return out


def unbutton(g: Geometry, symps: Optional[list[Symp]] = None, comps: Optional[list[dict]] = None) -> SheetAssembly:
    """Split every point into one copy per residual component; sheets are the
    connected components of the result, the relation is 'same parent point'."""
    if symps is None:
        symps = find_symps(g)
    low = [s for s in symps if s.rank < 3]
    if low:
        raise RankTooLow(f"{len(low)} symps of rank 2")
    if comps is None:
        comps = residual_components(g, symps)
    pts = sorted({(p, c) for p in range(g.point_count) for c in comps[p].values()})
    index = {t: i for i, t in enumerate(pts)}
    lines = []
    for li, L in enumerate(g.lines):
        lines.append([index[(p, comps[p][li])] for p in L])
    tilde = Geometry(len(pts), lines)
    sheets, origins = [], []
    order = components(tilde)
    for comp in order:
        sheets.append(induced(tilde, comp))
        origins.extend(pts[int(x)] for x in comp)
    # classes: global (sheet-ordered) indices sharing the parent point
    by_parent: dict[int, list[int]] = {}
    for gidx, (p, _) in enumerate(origins):
        by_parent.setdefault(p, []).append(gidx)
    sheets = [Geometry(s.point_count, s.lines, [f"{pts[int(s.parent_index[i])]}" for i in range(s.point_count)]) for s in sheets]
    asm = SheetAssembly(sheets, list(by_parent.values()), origins)
    return asm


def sheet_recovery(g: Geometry, symps: list[Symp]) -> list[list[int]]:
    """Components of the graph on lines where two lines are adjacent when they
    lie in a common singular plane (within a symp)."""
    parent = list(range(len(g.lines)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for p in range(g.point_count):
        res = point_residual(g, p, symps)
        for L in res.geometry.lines:
            base = find(res.point_lines[L[0]])
            for r in L[1:]:
                other = find(res.point_lines[r])
                if other != base:
                    parent[other] = base
    groups: dict[int, list[int]] = {}
    for li in range(len(g.lines)):
        groups.setdefault(find(li), []).append(li)
    return sorted(groups.values(), key=lambda v: v[0])


def roundtrip_check(g: Geometry, max_exact: int = 5000) -> tuple[bool, str]:
    """button(unbutton(g)) is isomorphic to g (exact when small, else fingerprints)."""
    asm = unbutton(g)
    if len(asm.sheets) == 1 and not asm.nontrivial():
        h = asm.sheets[0]
    else:
        h = button(asm, check_sheets=False)
    total = 2 * (g.point_count + len(g.lines))
    if total <= max_exact:
        return exact_iso_small(g, h, max_exact), "exact"
    return fingerprint(g) == fingerprint(h), "fingerprint"


# -- asm v1 ---------------------------------------------------------------------------

_GLUE = re.compile(r"\(\s*(\d+)\s+(\d+)\s*\)")


class AsmParseError(ValueError):
    def __init__(self, msg: str, line: int):
        super().__init__(f"line {line}: {msg}")
        self.line = line


def parse_asm(text: str) -> tuple[list[str], list[list[tuple[int, int]]]]:
    """Return (sheet specs, glue groups) from ``asm 1`` text."""
    rows = [r.rstrip() for r in text.splitlines()]
    rows = [(i + 1, r) for i, r in enumerate(rows) if r.strip() and not r.lstrip().startswith("#")]
    if not rows or rows[0][1].split() != ["asm", "1"]:
        raise AsmParseError("expected header 'asm 1'", rows[0][0] if rows else 1)
    sheets, glue = [], []
    for ln, r in rows[1:]:
        head, _, rest = r.strip().partition(" ")
        if head == "sheet":
            if not rest.strip():
                raise AsmParseError("sheet needs a construction string or plg path", ln)
            sheets.append(rest.strip())
        elif head == "glue:":
            parts = [p.strip() for p in rest.split("=")]
            group = []
            for part in parts:
                m = _GLUE.fullmatch(part)
                if not m:
                    raise AsmParseError(f"bad glue term {part!r}", ln)
                group.append((int(m.group(1)), int(m.group(2))))
            if len(group) < 2:
                raise AsmParseError("a glue line needs at least two terms", ln)
            glue.append(group)
        else:
            raise AsmParseError(f"unknown record {head!r}", ln)
    return sheets, glue


def format_asm(sheets: Sequence[str], glue: Sequence[Sequence[tuple[int, int]]]) -> str:
    out = ["asm 1"]
    out += [f"sheet {s}" for s in sheets]
    for group in glue:
        out.append("glue: " + " = ".join(f"({s} {p})" for s, p in group))
    return "\n".join(out) + "\n"


def load_asm(text: str, build) -> SheetAssembly:
    """Parse ``asm 1`` text and build its sheets with the given constructor."""
    specs, glue = parse_asm(text)
    return SheetAssembly.from_glue([build(s) for s in specs], glue)
