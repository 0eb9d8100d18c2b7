"""Analysis documents: a JSON-ready dict plus a line-oriented text rendering."""

from __future__ import annotations

import json
from typing import Optional

from .analysis import LACUNARY_KS, ParapolarReport, is_imbrex, is_k_lacunary, ks_hypotheses, verify_parapolar
from .geometry import Geometry
from .residuals import SweepResult, classify_components, point_residual, residual_sweep, sample_points


def analysis_document(
    g: Geometry,
    report: Optional[ParapolarReport] = None,
    *,
    residual_points: Optional[list[int]] = None,
    residuals: bool = True,
    threads: int = 1,
) -> tuple[dict, ParapolarReport, Optional[SweepResult]]:
    if report is None:
        report = verify_parapolar(g, threads=threads)
    doc = {
        "geometry": {"name": g.name, "points": g.point_count, "lines": len(g.lines)},
        "report": report.to_dict(),
        "lacunary_reasons": {str(k): is_k_lacunary(report, k)[1] for k in LACUNARY_KS},
    }
    sweep = None
    if report.is_parapolar:
        ks = ks_hypotheses(g, report)
        doc["ks_conditions"] = {
            "perp_meets_every_symp": ks.perp_meets_every_symp,
            "balls_are_hyperplanes": ks.balls_are_hyperplanes,
            "singulars_finite": ks.singulars_finite,
            "witnesses": ks.witnesses,
        }
        ok, why = is_imbrex(g, report)
        doc["imbrex"] = {"holds": ok, "reason": why}
        if residuals:
            sweep = residual_sweep(g, report.symps, residual_points, threads=threads)
            doc["residuals"] = sweep.to_dict()
            first = sweep.points[0]
            res = point_residual(g, first, report.symps)
            doc["residuals"]["components_at_first"] = [
                c.to_dict() for c in classify_components(res, g, report.symps)
            ]
    return doc, report, sweep


def residual_points_for(g: Geometry, sample: Optional[int], seed: int = 0) -> Optional[list[int]]:
    return None if not sample else sample_points(g.point_count, sample, seed)


def to_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _flatten(prefix: str, value, out: list[str]) -> None:
    if isinstance(value, dict):
        for k in sorted(value, key=str):
            _flatten(f"{prefix}.{k}" if prefix else str(k), value[k], out)
    elif isinstance(value, list) and value and all(isinstance(v, dict) for v in value):
        for i, v in enumerate(value):
            _flatten(f"{prefix}[{i}]", v, out)
    else:
        out.append(f"{prefix}\t{json.dumps(value, sort_keys=True)}")


def to_text(doc: dict) -> str:
    """Tab-delimited ``key<TAB>json-value`` lines in sorted key order."""
    lines: list[str] = []
    _flatten("", doc, lines)
    return "\n".join(lines) + "\n"


def render(doc: dict, fmt: str) -> str:
    return to_json(doc) if fmt == "json" else to_text(doc)
