"""Command-line front end.  Exit codes: 0 ok, 1 verification failure, 2 input error."""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional

from . import assembly as asm_mod
from .analysis import default_threads, find_symps, verify_parapolar
from .constructions import ConstructionParseError, build
from .geometry import Geometry, GeometryError, PlgParseError, read_plg, write_plg
from .report import analysis_document, render, residual_points_for
from .residuals import SizeExceeded, classify_components, find_isomorphism, fingerprint, point_residual

OK, FAIL, BAD_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def load_geometry(arg: str) -> Geometry:
    """A ``.plg`` path or a construction string."""
    try:
        if arg.endswith(".plg"):
            if not os.path.exists(arg):
                raise InputError(f"no such file: {arg}")
            g = read_plg(arg)
            g.name = os.path.basename(arg)
            return g
        return build(arg)
    except (ConstructionParseError, PlgParseError, GeometryError) as exc:
        raise InputError(str(exc)) from None


def _emit(doc: dict, args, name: str) -> None:
    text = render(doc, args.format)
    if getattr(args, "out", None):
        os.makedirs(args.out, exist_ok=True)
        ext = "json" if args.format == "json" else "tsv"
        with open(os.path.join(args.out, f"{name}.{ext}"), "w", newline="\n") as fh:
            fh.write(text)
    sys.stdout.write(text)


# -- commands ---------------------------------------------------------------------

def cmd_build(args) -> int:
    g = load_geometry(args.spec)
    target = args.target or args.out
    if not target:
        write_plg(g, sys.stdout)
    else:
        write_plg(g, target)
        print(f"wrote {target}: {g.point_count} points, {len(g.lines)} lines")
    return OK


def cmd_analyze(args) -> int:
    g = load_geometry(args.input)
    pts = residual_points_for(g, args.sample_residuals, args.seed)
    doc, report, _ = analysis_document(
        g, residual_points=pts, residuals=not args.no_residuals, threads=args.threads
    )
    if args.out:
        from .plotting import write_figures

        doc["figures"] = [os.path.basename(p) for p in write_figures(g, report, args.out)]
    _emit(doc, args, "analysis")
    return OK if report.is_parapolar else FAIL


def cmd_residual(args) -> int:
    g = load_geometry(args.input)
    if not 0 <= args.point < g.point_count:
        raise InputError(f"point {args.point} out of range 0..{g.point_count - 1}")
    symps = find_symps(g, threads=args.threads)
    res = point_residual(g, args.point, symps)
    doc = {
        "residual": res.to_dict(),
        "components": [c.to_dict() for c in classify_components(res, g, symps)],
        "fingerprint": fingerprint(res.geometry).to_dict(),
    }
    if args.write:
        write_plg(res.geometry, args.write)
    _emit(doc, args, f"residual_{args.point}")
    return OK


def cmd_fingerprint(args) -> int:
    g = load_geometry(args.input)
    rep = verify_parapolar(g, threads=args.threads)
    _emit({"fingerprint": fingerprint(g, rep).to_dict()}, args, "fingerprint")
    return OK


def cmd_iso(args) -> int:
    g1, g2 = load_geometry(args.first), load_geometry(args.second)
    try:
        m = find_isomorphism(g1, g2, args.max_exact_iso)
        doc = {"method": "exact", "isomorphic": m is not None, "map": m}
    except SizeExceeded as exc:
        same = fingerprint(g1) == fingerprint(g2)
        doc = {"method": "fingerprint", "isomorphic": None, "fingerprints_equal": same, "note": str(exc)}
        _emit(doc, args, "iso")
        return OK if same else FAIL
    _emit(doc, args, "iso")
    return OK if doc["isomorphic"] else FAIL


def _load_assembly(path: str) -> asm_mod.SheetAssembly:
    if not os.path.exists(path):
        raise InputError(f"no such file: {path}")
    with open(path) as fh:
        text = fh.read()
    try:
        specs, glue = asm_mod.parse_asm(text)
        base = os.path.dirname(os.path.abspath(path))
        sheets = [load_geometry(os.path.join(base, s) if s.endswith(".plg") else s) for s in specs]
        return asm_mod.SheetAssembly.from_glue(sheets, glue)
    except (asm_mod.AsmParseError, ValueError) as exc:
        raise InputError(str(exc)) from None


def cmd_button(args) -> int:
    a = _load_assembly(args.asm)
    ok1, w1 = asm_mod.validate_c1(a)
    ok2, parts = asm_mod.validate_c2(a)
    doc = {"c1": {"ok": ok1, "witness": w1}, "c2": {"ok": ok2, "components": parts}}
    if not (ok1 and ok2):
        _emit(doc, args, "button")
        return FAIL
    try:
        g = asm_mod.button(a, check_sheets=not args.skip_sheet_check)
    except asm_mod.SheetNotValid as exc:
        doc["sheets"] = str(exc)
        _emit(doc, args, "button")
        return FAIL
    rep = verify_parapolar(g, singulars=False, threads=args.threads)
    doc["result"] = {
        "points": g.point_count,
        "lines": len(g.lines),
        "is_parapolar": rep.is_parapolar,
        "lacunarity_spectrum": sorted(rep.lacunarity_spectrum),
        "symp_count": len(rep.symps),
    }
    if args.write:
        write_plg(g, args.write)
        doc["result"]["written"] = args.write
    _emit(doc, args, "button")
    return OK if rep.is_parapolar else FAIL


def cmd_unbutton(args) -> int:
    g = load_geometry(args.input)
    symps = find_symps(g, threads=args.threads)
    try:
        a = asm_mod.unbutton(g, symps)
    except asm_mod.RankTooLow as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAIL
    doc = {
        "sheets": [{"points": s.point_count, "lines": len(s.lines)} for s in a.sheets],
        "nontrivial_classes": [[list(a.local(x)) for x in c] for c in a.nontrivial()],
        "line_components": [len(c) for c in asm_mod.sheet_recovery(g, symps)],
    }
    if args.roundtrip:
        ok, how = asm_mod.roundtrip_check(g, args.max_exact_iso)
        doc["roundtrip"] = {"ok": ok, "method": how}
    if args.write:
        os.makedirs(args.write, exist_ok=True)
        names = []
        for i, s in enumerate(a.sheets):
            name = f"sheet{i}.plg"
            write_plg(s, os.path.join(args.write, name))
            names.append(name)
        glue = [[a.local(x) for x in c] for c in a.nontrivial()]
        with open(os.path.join(args.write, "assembly.asm"), "w", newline="\n") as fh:
            fh.write(asm_mod.format_asm(names, glue))
        doc["written"] = args.write
    _emit(doc, args, "unbutton")
    return OK if doc.get("roundtrip", {"ok": True})["ok"] else FAIL


def cmd_verify_tables(args) -> int:
    from .tables import load_expectations, summary, verify_tables

    rows = load_expectations(args.expectations)
    flt = args.filter

    def select(r):
        if args.skip_heavy and r.heavy:
            return False
        return not flt or flt in r.id or flt == f"table{r.table}"

    def progress(rid):
        print(f"# {rid}", file=sys.stderr, flush=True)

    results = verify_tables(
        rows,
        select=select,
        include_stretch=args.include_stretch,
        residual_samples=args.residual_samples,
        threads=args.threads,
        progress=progress if args.verbose else None,
    )
    counts = summary(results)
    if args.format == "json":
        doc = {"results": [r.to_dict() for r in results], "summary": counts}
        _emit(doc, args, "tables")
    else:
        def note(r):
            if r.status == "SKIPPED":
                return f"{r.reason} [{r.cell}]"
            return r.reason or r.cell

        out = [f"{r.status}\t{r.id}\t{r.name}\t{r.witness or '-'}\t{note(r)}" for r in results]
        out.append(f"summary\tPASS={counts['PASS']}\tFAIL={counts['FAIL']}\tSKIPPED={counts['SKIPPED']}")
        text = "\n".join(out) + "\n"
        if args.out:
            os.makedirs(args.out, exist_ok=True)
            with open(os.path.join(args.out, "tables.tsv"), "w", newline="\n") as fh:
                fh.write(text)
        sys.stdout.write(text)
    return FAIL if counts["FAIL"] else OK


# -- parser ---------------------------------------------------------------------------

def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="parapolar", description="Parapolar space toolkit.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="directory for report files (and figures for analyze)")
    common.add_argument("--threads", type=int, default=default_threads())
    common.add_argument("--format", choices=["text", "json"], default="text")
    common.add_argument("--max-exact-iso", type=int, default=5000)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("build", parents=[common], help="write a construction as plg")
    s.add_argument("spec")
    s.add_argument("target", nargs="?", help="output .plg path (alternatively --out)")
    s.set_defaults(func=cmd_build)

    s = sub.add_parser("analyze", parents=[common], help="full parapolar report")
    s.add_argument("input")
    s.add_argument("--sample-residuals", type=int, default=0, metavar="N",
                   help="fingerprint residuals at N random points instead of all")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--no-residuals", action="store_true")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("residual", parents=[common], help="point-residual at one point")
    s.add_argument("input")
    s.add_argument("--point", type=int, required=True)
    s.add_argument("--write", help="write the residual as plg")
    s.set_defaults(func=cmd_residual)

    s = sub.add_parser("fingerprint", parents=[common])
    s.add_argument("input")
    s.set_defaults(func=cmd_fingerprint)

    s = sub.add_parser("iso", parents=[common], help="exact isomorphism test (size-gated)")
    s.add_argument("first")
    s.add_argument("second")
    s.set_defaults(func=cmd_iso)

    s = sub.add_parser("unbutton", parents=[common], help="split into sheets")
    s.add_argument("input")
    s.add_argument("--write", metavar="DIR", help="write sheets and an asm file")
    s.add_argument("--roundtrip", action="store_true")
    s.set_defaults(func=cmd_unbutton)

    s = sub.add_parser("button", parents=[common], help="glue the sheets of an asm file")
    s.add_argument("asm")
    s.add_argument("--write", metavar="PLG")
    s.add_argument("--skip-sheet-check", action="store_true")
    s.set_defaults(func=cmd_button)

    s = sub.add_parser("verify-tables", parents=[common], help="check table expectations")
    s.add_argument("--filter", help="row id substring or 'table1' / 'table2'")
    s.add_argument("--expectations", help="alternative expectations file")
    s.add_argument("--include-stretch", action="store_true")
    s.add_argument("--skip-heavy", action="store_true")
    s.add_argument("--residual-samples", type=int, default=5)
    s.add_argument("--verbose", action="store_true")
    s.set_defaults(func=cmd_verify_tables)
    return p


def main(argv: Optional[list[str]] = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return BAD_INPUT if exc.code else OK
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD_INPUT


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
