"""Independent brute-force counts over GF(2), frozen into fixtures/counts.json.

Shares no code with the package: vectors are ints, subspaces are frozensets of
their nonzero vectors, and everything is built by direct enumeration.

Run ``python tests/oracle.py`` to regenerate the fixture.
"""

from __future__ import annotations

import json
import os
from itertools import combinations


def span(vectors) -> frozenset:
    out = {0}
    for v in vectors:
        out |= {x ^ v for x in out}
    out.discard(0)
    return frozenset(out)


def subspaces(n: int, k: int) -> list[frozenset]:
    """All k-dimensional subspaces of GF(2)^n."""
    level = {frozenset()}
    for _ in range(k):
        nxt = set()
        for S in level:
            for v in range(1, 1 << n):
                if v not in S:
                    nxt.add(span(list(S) + [v]))
        level = nxt
    return sorted(level, key=sorted)


# -- forms on ints ------------------------------------------------------------

def symplectic(m: int):
    """Alternating form pairing coordinate i with i + m on 2m coordinates."""
    def B(x, y):
        t = 0
        for i in range(m):
            a, b = (x >> i) & 1, (x >> (i + m)) & 1
            c, d = (y >> i) & 1, (y >> (i + m)) & 1
            t ^= (a & d) ^ (b & c)
        return t
    return B, (lambda x: 0)


def hyperbolic(m: int):
    """Q(x) = x0 x1 + x2 x3 + ... on 2m coordinates."""
    def Q(x):
        t = 0
        for i in range(m):
            t ^= ((x >> (2 * i)) & 1) & ((x >> (2 * i + 1)) & 1)
        return t

    def B(x, y):
        return Q(x ^ y) ^ Q(x) ^ Q(y)
    return B, Q


def totally_singular(n: int, form, top: int) -> list[list[frozenset]]:
    """Levels 1..top of totally singular subspaces (isotropic for symplectic)."""
    B, Q = form
    pts = [v for v in range(1, 1 << n) if Q(v) == 0]
    nb = {v: frozenset(w for w in pts if w != v and B(v, w) == 0) for v in pts}
    levels = [[frozenset([v]) for v in pts]]
    bases = {frozenset([v]): (v,) for v in pts}
    for _ in range(top - 1):
        nxt = {}
        for S in levels[-1]:
            basis = bases[S]
            cand = frozenset.intersection(*(nb[b] for b in basis)) - S
            for v in cand:
                T = span(basis + (v,))
                if T not in nxt:
                    nxt[T] = basis + (v,)
        bases.update(nxt)
        levels.append(sorted(nxt, key=sorted))
    return levels


def spectrum_of(symps: list[frozenset], point_dim) -> tuple[list[int], bool]:
    dims, disjoint = set(), False
    for a, b in combinations(symps, 2):
        m = len(a & b)
        if m == 0:
            disjoint = True
        else:
            dims.add(point_dim(m))
    return sorted(dims), disjoint


def proj_dim(size: int) -> int:
    return (size + 1).bit_length() - 2


# -- instances ------------------------------------------------------------------

def grassmann_counts(n: int, k: int) -> dict:
    """Points (k-dim subspaces of GF(2)^(n+1)) and lines (pencils) of A_{n,k}."""
    V = n + 1
    pts = subspaces(V, k)
    lows = subspaces(V, k - 1)
    highs = subspaces(V, k + 1)
    lines = sum(1 for U in lows for W in highs if U <= W)
    return {"points": len(pts), "lines": lines}


def a42_symps() -> dict:
    pts = subspaces(5, 2)
    symps = set()
    for U, W in combinations(pts, 2):
        if not (U & W):
            S = span(list(U | W))
            symps.add(frozenset(P for P in pts if P <= S))
    symps = sorted(symps, key=sorted)
    spec, disjoint = spectrum_of(symps, proj_dim)
    klein = symps[0]
    pencils = [[P for P in pts if U <= P <= W] for U in subspaces(5, 1) for W in subspaces(5, 3) if U <= W]
    klein_lines = sum(1 for pen in pencils if all(P in klein for P in pen))
    return {
        "symps": len(symps),
        "symp_sizes": sorted({len(s) for s in symps}),
        "spectrum": spec,
        "disjoint": disjoint,
        "klein_lines": klein_lines,
    }


def segre_fano() -> dict:
    lines = subspaces(3, 2)
    grids = [frozenset((a, b) for a in L for b in M) for L in lines for M in lines]
    spec, disjoint = spectrum_of(grids, lambda m: {1: 0, 3: 1}[m])
    return {"points": 49, "lines": 2 * 7 * len(lines), "symps": len(grids), "spectrum": spec, "disjoint": disjoint}


def main() -> dict:
    out = {}
    W = totally_singular(6, symplectic(3), 3)
    out["W(5,2)"] = {"points": len(W[0]), "lines": len(W[1]), "planes": len(W[2])}
    out["DW(5,2)"] = {"points": len(W[2]), "lines": len(W[1])}
    out["line3xW(5,2)"] = {
        "points": 3 * len(W[0]),
        "lines": 3 * len(W[1]) + len(W[0]),
        # {x} x W for each x, plus line x M for each line M
        "symps": 3 + len(W[1]),
    }
    q5 = totally_singular(6, hyperbolic(3), 3)
    out["Q+(5,2)"] = {"points": len(q5[0]), "lines": len(q5[1]), "generators": len(q5[2])}
    q7 = totally_singular(8, hyperbolic(4), 4)
    out["Q+(7,2)"] = {"points": len(q7[0]), "lines": len(q7[1]), "generators": len(q7[3])}
    q9 = totally_singular(10, hyperbolic(5), 5)
    out["Q+(9,2)"] = {"points": len(q9[0]), "lines": len(q9[1]), "generators": len(q9[4])}
    # generators fall in two families, half each; half-spin lines are the planes
    out["D55(2)"] = {"points": len(q9[4]) // 2, "lines": len(q9[2])}
    out["A42(2)"] = grassmann_counts(4, 2) | a42_symps()
    out["A53(2)"] = grassmann_counts(5, 3)
    out["PG(3,2)"] = grassmann_counts(3, 1)
    out["segre_fano"] = segre_fano()
    return out


if __name__ == "__main__":
    data = main()
    path = os.path.join(os.path.dirname(__file__), "fixtures", "counts.json")
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps(data, indent=2, sort_keys=True))
