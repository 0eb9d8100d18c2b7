"""PNG figures for analysis reports (headless matplotlib)."""

from __future__ import annotations

import math
import os
from collections import Counter

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .analysis import ParapolarReport  # noqa: E402
from .geometry import INF, Geometry  # noqa: E402

# fixed metadata keeps PNG bytes identical across runs
_META = {"Software": None}


def _save(fig, path: str) -> str:
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata=_META)
    plt.close(fig)
    return path


def distance_histogram(g: Geometry, path: str) -> str:
    D = g.distances
    iu = np.triu_indices(g.point_count, 1)
    vals = D[iu]
    finite = vals[vals != INF]
    counts = Counter(finite.tolist())
    fig, ax = plt.subplots(figsize=(5, 3.5))
    keys = sorted(counts)
    ax.bar([str(k) for k in keys], [counts[k] for k in keys], color="#4c72b0")
    unreachable = int((vals == INF).sum())
    if unreachable:
        ax.bar(["inf"], [unreachable], color="#c44e52")
    ax.set_xlabel("distance")
    ax.set_ylabel("point pairs")
    ax.set_title(f"{g.name or 'geometry'}: pair distances")
    return _save(fig, path)


def symp_overview(report: ParapolarReport, path: str, title: str = "") -> str:
    """Left: symp ranks and sizes.  Right: symp intersection dimensions."""
    fig, (a, b) = plt.subplots(1, 2, figsize=(9, 3.5))
    ranks = Counter((s.rank, s.size) for s in report.symps)
    labels = [f"rank {r}\n{n} pts" for r, n in sorted(ranks)]
    a.bar(labels, [ranks[k] for k in sorted(ranks)], color="#55a868")
    a.set_ylabel("symps")
    a.set_title("symplecta")
    dims = sorted(report.lacunarity_spectrum)
    xs = [str(d) for d in dims] + (["disjoint"] if report.disjoint_symp_pair else [])
    b.bar(xs, [1] * len(xs), color="#8172b2")
    b.set_yticks([])
    b.set_xlabel("dimension of symp intersection")
    b.set_title("intersections that occur")
    if title:
        fig.suptitle(title)
    return _save(fig, path)


def lacunarity_strip(report: ParapolarReport, path: str) -> str:
    ks = sorted(int(k) for k in report.to_dict()["lacunary"])
    ok = [report.lacunary(k) for k in ks]
    fig, ax = plt.subplots(figsize=(6, 1.6))
    ax.imshow(np.array([ok], dtype=float), cmap="RdYlGn", vmin=0, vmax=1, aspect="auto")
    ax.set_xticks(range(len(ks)), [str(k) for k in ks])
    ax.set_yticks([])
    ax.set_xlabel("k (green: k-lacunary)")
    return _save(fig, path)


def write_figures(g: Geometry, report: ParapolarReport, outdir: str) -> list[str]:
    os.makedirs(outdir, exist_ok=True)
    paths = [distance_histogram(g, os.path.join(outdir, "distances.png"))]
    if report.symps and not math.isinf(report.diameter):
        paths.append(symp_overview(report, os.path.join(outdir, "symps.png"), g.name or ""))
    paths.append(lacunarity_strip(report, os.path.join(outdir, "lacunarity.png")))
    return paths
