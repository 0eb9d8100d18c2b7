"""Check the bundled classification-table expectations against constructed witnesses."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Optional

from .analysis import ParapolarReport, is_k_lacunary, verify_parapolar
from .constructions import build
from .geometry import Geometry
from .residuals import fingerprint, point_residual, sample_points


@dataclass
class TableExpectation:
    id: str
    table: int
    k: int
    cell: str
    name: str
    witness: Optional[str] = None
    skip: Optional[str] = None
    left: Optional[str] = None
    heavy: bool = False
    stretch: bool = False
    expect: dict = field(default_factory=dict)


@dataclass
class RowResult:
    id: str
    status: str  # PASS | FAIL | SKIPPED
    cell: str
    name: str
    witness: Optional[str]
    checks: dict = field(default_factory=dict)
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "status": self.status,
            "cell": self.cell,
            "name": self.name,
            "witness": self.witness,
            "checks": self.checks,
            "reason": self.reason,
        }


def load_expectations(path: Optional[str] = None) -> list[TableExpectation]:
    if path is None:
        text = resources.files("parapolar").joinpath("data/expectations.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    return [TableExpectation(**row) for row in json.loads(text)["rows"]]


def thickness_class(report: ParapolarReport) -> str:
    kinds = {s.building_thick for s in report.symps}
    if kinds == {True}:
        return "thick"
    if kinds == {False}:
        return "non-thick"
    return "mixed"


# analyses reused across calls in one process
_SHARED: dict = {}


class _Cache:
    """One build and analysis per witness string."""

    def __init__(self, threads: int, data: Optional[dict] = None):
        self.threads = threads
        self.data: dict[str, tuple[Geometry, ParapolarReport]] = {} if data is None else data

    def get(self, spec: str) -> tuple[Geometry, ParapolarReport]:
        if spec not in self.data:
            g = build(spec)
            self.data[spec] = (g, verify_parapolar(g, threads=self.threads))
        return self.data[spec]


def _row_checks(row: TableExpectation, rep: ParapolarReport) -> dict:
    e = row.expect
    dims = sorted(d for d in rep.max_singular_dims if d >= 0)
    ranks = sorted(rep.rank_spectrum)
    lo = min(ranks) if ranks else None
    diam = None if rep.diameter == math.inf else int(rep.diameter)
    rank_rule = (lo is not None and lo >= row.k + 3) if row.table == 1 else lo == row.k + 2
    lac, why = is_k_lacunary(rep, row.k)
    return {
        "parapolar": [rep.is_parapolar, True],
        "rank_spectrum": [ranks, e["rank_spectrum"]],
        "min_rank_rule": [rank_rule, True],
        "S": [dims, e["S"]],
        "diameter": [diam, e["diameter"]],
        "strong": [rep.strong, e["strong"]],
        "thickness": [thickness_class(rep), e["thickness"]],
        f"{row.k}-lacunary": [lac, True] if lac else [why, True],
    }


def verify_tables(
    rows: Optional[list[TableExpectation]] = None,
    *,
    select: Optional[Callable[[TableExpectation], bool]] = None,
    include_stretch: bool = False,
    residual_samples: int = 5,
    threads: int = 1,
    progress: Optional[Callable[[str], None]] = None,
    analyses: Optional[dict] = None,
) -> list[RowResult]:
    """Evaluate every selected row; rows without a usable witness come back SKIPPED.

    Where a row names its left neighbour (the cell whose space is the
    point-residual), residuals at ``residual_samples`` sampled points must be
    fingerprint-equal to the neighbour's witness.  ``analyses`` maps witness
    strings to (geometry, report) pairs and is filled in as rows are run;
    by default a process-wide map is used.
    """
    rows = load_expectations() if rows is None else rows
    by_id = {r.id: r for r in rows}
    cache = _Cache(threads, _SHARED if analyses is None else analyses)
    out = []
    for row in rows:
        if select is not None and not select(row):
            continue
        if progress:
            progress(row.id)
        base = dict(id=row.id, cell=row.cell, name=row.name, witness=row.witness)
        if row.skip or not row.witness:
            out.append(RowResult(status="SKIPPED", reason=row.skip or "no witness", **base))
            continue
        if row.stretch and not include_stretch:
            out.append(RowResult(status="SKIPPED", reason="stretch witness; enable with --include-stretch", **base))
            continue
        g, rep = cache.get(row.witness)
        checks = _row_checks(row, rep)
        left = by_id.get(row.left) if row.left else None
        if left is not None and left.witness and rep.is_parapolar:
            lg, lrep = cache.get(left.witness)
            want = fingerprint(lg, lrep)
            pts = sample_points(g.point_count, residual_samples)
            same = all(fingerprint(point_residual(g, p, rep.symps).geometry) == want for p in pts)
            checks["left_cell_is_residual"] = [same, True]
        ok = all(got == want for got, want in checks.values())
        failed = [name for name, (got, want) in checks.items() if got != want]
        out.append(RowResult(status="PASS" if ok else "FAIL", checks=checks,
                             reason="" if ok else "mismatch: " + ", ".join(failed), **base))
    return out


def summary(results: list[RowResult]) -> dict:
    counts = {"PASS": 0, "FAIL": 0, "SKIPPED": 0}
    for r in results:
        counts[r.status] += 1
    return counts
