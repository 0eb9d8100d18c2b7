"""Acceptance criteria 1-9.  Each test records one PASS/FAIL line, printed in the
terminal summary; exact counts come from the oracle fixture."""

import time
from contextlib import contextmanager

import numpy as np
import pytest

from conftest import ACCEPTANCE, geometry, report
from parapolar.analysis import is_imbrex, is_k_lacunary, ks_hypotheses, verify_parapolar
from parapolar.assembly import (
    C1Violation, SheetAssembly, button, sheet_recovery, unbutton, validate_c1, validate_c2,
)
from parapolar.cli import main as cli_main
from parapolar.constructions import build, classical
from parapolar.geometry import components
from parapolar.polar import FormSpec, verify_polar
from parapolar.residuals import (
    classify_components, fingerprint, point_residual, residual_sweep, sample_points,
)
from parapolar.tables import _SHARED, verify_tables


class Criterion:
    def __init__(self, n):
        self.n, self.checks, self.t0 = n, [], time.perf_counter()

    def check(self, name, got, want):
        self.checks.append((name, got == want, got, want))

    def elapsed(self):
        return time.perf_counter() - self.t0

    def budget(self, seconds):
        self.check(f"time<{seconds}s", self.elapsed() < seconds, True)


@contextmanager
def criterion(n):
    n = str(n)
    c = Criterion(n)
    try:
        yield c
    except Exception as exc:  # recorded, then re-raised so pytest reports it
        ACCEPTANCE[n] = (False, f"error: {exc!r}")
        raise
    bad = [f"{name}: got {got!r}, want {want!r}" for name, ok, got, want in c.checks if not ok]
    detail = f"{len(c.checks)} checks, {c.elapsed():.1f}s" + ("; " + "; ".join(bad) if bad else "")
    ACCEPTANCE[n] = (not bad, detail)
    assert not bad, detail


def test_criterion_1_classical(counts):
    with criterion(1) as c:
        W = build("polar:sp:6:2")
        vw = verify_polar(W)
        c.check("W(5,2) points", W.point_count, counts["W(5,2)"]["points"])
        c.check("W(5,2) lines", len(W.lines), counts["W(5,2)"]["lines"])
        c.check("W(5,2) rank", vw.rank, 3)
        q5 = build("polar:o+:6:2")
        c.check("Q+(5,2) points", q5.point_count, counts["Q+(5,2)"]["points"])
        q7 = classical(FormSpec("o+", 8, 2))
        v7 = verify_polar(q7.geometry)
        c.check("Q+(7,2) points", q7.geometry.point_count, counts["Q+(7,2)"]["points"])
        c.check("Q+(7,2) non-thick", v7.building_thick, False)
        q9 = classical(FormSpec("o+", 10, 2))
        c.check("Q+(9,2) points", q9.geometry.point_count, counts["Q+(9,2)"]["points"])
        c.check("Q+(9,2) lines", len(q9.geometry.lines), counts["Q+(9,2)"]["lines"])
        c.check("Q+(9,2) generators", len(q9.maximal_singulars()), counts["Q+(9,2)"]["generators"])
        c.budget(10)


def test_criterion_2_a42(counts):
    with criterion(2) as c:
        g = geometry("A:4:2:2")
        r = report("A:4:2:2")
        c.check("points", g.point_count, counts["A42(2)"]["points"])
        c.check("parapolar", r.is_parapolar, True)
        c.check("strong", r.strong, True)
        c.check("diameter", r.diameter, 2)
        c.check("rank spectrum", set(r.rank_spectrum), {3})
        c.check("symps", len(r.symps), counts["A42(2)"]["symps"])
        c.check("symp sizes", sorted({s.size for s in r.symps}), counts["A42(2)"]["symp_sizes"])
        c.check("lacunarity spectrum", sorted(r.lacunarity_spectrum), counts["A42(2)"]["spectrum"])
        c.check("disjoint pairs", r.disjoint_symp_pair, counts["A42(2)"]["disjoint"])
        c.check("k-lacunary -1..2", [is_k_lacunary(r, k)[0] for k in (-1, 0, 1, 2)], [True, True, True, False])
        c.budget(30)


def test_criterion_3_a53(counts):
    with criterion(3) as c:
        g = geometry("A:5:3:2")
        r = report("A:5:3:2")
        c.check("points", g.point_count, counts["A53(2)"]["points"])
        c.check("strong", r.strong, True)
        c.check("diameter", r.diameter, 3)
        c.check("rank spectrum", set(r.rank_spectrum), {3})
        c.check("0-lacunary", is_k_lacunary(r, 0)[0], True)
        ks = ks_hypotheses(g, r)
        c.check("KS 1-2", ks.as_tuple()[:2], (True, True))
        c.budget(600)


def test_criterion_4_dual_polar(counts):
    with criterion(4) as c:
        g = geometry("dualpolar:sp:6:2")
        r = report("dualpolar:sp:6:2")
        c.check("points", g.point_count, counts["DW(5,2)"]["points"])
        c.check("strong", r.strong, True)
        c.check("diameter", r.diameter, 3)
        c.check("rank spectrum", set(r.rank_spectrum), {2})
        c.check("0-lacunary", is_k_lacunary(r, 0)[0], True)
        c.check("radius-2 balls are hyperplanes", ks_hypotheses(g, r).balls_are_hyperplanes, True)
        tags = set()
        for p in range(g.point_count):
            tags |= {t.tag for t in classify_components(point_residual(g, p, r.symps), g, r.symps)}
        c.check("residual component tags", tags, {"single-line"})
        c.budget(60)


@pytest.fixture(scope="module")
def d55():
    spec = "halfspin:o+:10:2"
    g = build(spec)
    r = verify_parapolar(g)
    _SHARED[spec] = (g, r)
    return g, r


def test_criterion_5_half_spin(d55, counts):
    with criterion(5) as c:
        g, r = d55
        c.check("points", g.point_count, counts["D55(2)"]["points"])
        c.check("lines", len(g.lines), counts["D55(2)"]["lines"])
        c.check("rank spectrum", set(r.rank_spectrum), {4})
        c.check("1 not in spectrum", 1 in r.lacunarity_spectrum, False)
        c.check("2 not in spectrum", 2 in r.lacunarity_spectrum, False)
        want = fingerprint(geometry("A:4:2:2"), report("A:4:2:2"))
        sweep = residual_sweep(g, r.symps)
        c.check("every residual fingerprint equals A42", list(sweep.classes), [want])
        c.check("points swept", len(sweep.points), g.point_count)
        c.budget(1800)


def test_criterion_5_sampled_mode(d55):
    g, r = d55
    t = time.perf_counter()
    want = fingerprint(geometry("A:4:2:2"), report("A:4:2:2"))
    sweep = residual_sweep(g, r.symps, sample_points(g.point_count, 20))
    assert list(sweep.classes) == [want] and len(sweep.points) == 20
    assert time.perf_counter() - t < 300


def test_criterion_6_products(counts):
    with criterion(6) as c:
        spec = "prod:(line:3)x(polar:sp:6:2)"
        r = report(spec)
        c.check("line x W symps", len(r.symps), counts["line3xW(5,2)"]["symps"])
        c.check("line x W rank spectrum", set(r.rank_spectrum), {2, 3})
        c.check("line x W 0-lacunary", is_k_lacunary(r, 0)[0], True)
        c.check("line x W diameter", r.diameter, 1 + 2)
        s = report("segre:2:2:2")
        c.check("segre spectrum", sorted(s.lacunarity_spectrum), [0])
        c.check("segre disjoint pairs", s.disjoint_symp_pair, False)
        c.check("segre (-1)-lacunary", is_k_lacunary(s, -1)[0], True)
        c.check("segre imbrex", is_imbrex(geometry("segre:2:2:2"), s)[0], True)
        c.budget(60)


CORPUS = [
    "A:4:2:2", "A:5:2:2", "A:5:3:2", "dualpolar:sp:6:2", "segre:2:2:2", "prod:(line:3)x(A:2:1:2)",
    "prod:(line:3)x(line:3)x(line:3)", "prod:(line:3)x(polar:o+:6:2)", "prod:(line:3)x(polar:sp:6:2)",
    "Bgr:o+:8:2:k=2", "Bgr:sp:6:2:k=2", "dualpolar:o:7:2",
]


def _glued():
    W, A = geometry("polar:sp:6:2"), geometry("A:4:2:2")
    far = int(np.flatnonzero(W.distances[0] == 2)[0])
    return {
        "double W": button(SheetAssembly.from_glue([W, W], [[(0, 0), (1, 0)]])),
        "double A42": button(SheetAssembly.from_glue([A, A], [[(0, 0), (1, 0)]])),
        "W triangle": button(SheetAssembly.from_glue(
            [W, W, W], [[(0, 0), (1, 0)], [(1, far), (2, 0)], [(2, far), (0, far)]])),
    }


def test_criterion_7_lemma_suite():
    with criterion(7) as c:
        items = [(s, geometry(s), report(s)) for s in CORPUS]
        items += [(name, g, verify_parapolar(g)) for name, g in _glued().items()]
        for name, g, r in items:
            if not r.is_parapolar:
                c.check(f"{name} parapolar", False, True)
                continue
            if is_k_lacunary(r, 0)[0]:
                c.check(f"{name}: 0-lacunary => diameter <= 3", r.diameter <= 3, True)
                if min(r.rank_spectrum) >= 3:
                    c.check(f"{name}: 0-lacunary => strong", r.strong, True)
            if r.strong and min(r.rank_spectrum) == 2:
                c.check(f"{name}: strong, min rank 2 => not 1-lacunary", is_k_lacunary(r, 1)[0], False)
            c.check(f"{name}: PPS3", r.pps3["ok"], True)
            # no non-collinear pair lies in two symps
            M = np.stack([s.points for s in r.symps]).astype(np.float32)
            shared = (M.T @ M) >= 2
            np.fill_diagonal(shared, False)
            c.check(f"{name}: symp per non-collinear pair unique", bool((shared & ~g.adjacency).any()), False)
        c.budget(300)


def test_criterion_8_assembly():
    with criterion(8) as c:
        W, A = geometry("polar:sp:6:2"), geometry("A:4:2:2")
        for name, sheet in (("W", W), ("A42", A)):
            asm = SheetAssembly.from_glue([sheet, sheet], [[(0, 0), (1, 0)]])
            c.check(f"{name} C1", validate_c1(asm)[0], True)
            c.check(f"{name} C2", validate_c2(asm)[0], True)
            g = button(asm)
            r = verify_parapolar(g, singulars=False)
            c.check(f"{name} buttoned parapolar", r.is_parapolar, True)
            disconnected = [p for p in range(g.point_count)
                            if len(components(point_residual(g, p, r.symps).geometry)) > 1]
            glue = [i for i, lab in enumerate(g.labels) if "=" in lab]
            c.check(f"{name} locally disconnected exactly at glue", disconnected, glue)
            base = report("polar:sp:6:2" if name == "W" else "A:4:2:2").lacunarity_spectrum
            c.check(f"{name} spectrum gains 0", set(r.lacunarity_spectrum), set(base) | {0})
            u = unbutton(g, r.symps)
            c.check(f"{name} sheets", len(u.sheets), 2)
            c.check(f"{name} sheets fingerprint-equal", all(fingerprint(s) == fingerprint(sheet) for s in u.sheets), True)
            parts = sheet_recovery(g, r.symps)
            c.check(f"{name} line components", [len(p) for p in parts], [len(sheet.lines)] * 2)
            pts = sorted(sorted({x for li in p for x in g.lines[li]}) for p in parts)
            from_sheets = sorted(sorted({u.origins[int(u.offsets[i]) + x][0] for x in range(s.point_count)})
                                 for i, s in enumerate(u.sheets))
            c.check(f"{name} recovery matches unbutton", pts, from_sheets)
        bad = SheetAssembly.from_glue([W], [[(0, 0), (0, 5)]])
        ok, wit = validate_c1(bad)
        c.check("self-glue rejected", ok, False)
        c.check("self-glue witness", wit is not None and wit["length"] <= 4, True)
        with pytest.raises(C1Violation):
            button(bad)
        c.budget(120)


def test_criterion_9_verify_tables(d55, capsys):
    with criterion(9) as c:
        code = cli_main(["verify-tables", "--threads", "1"])
        out = capsys.readouterr().out
        rows = [line.split("\t") for line in out.splitlines() if not line.startswith("summary")]
        c.check("exit code", code, 0)
        c.check("no FAIL rows", [r[1] for r in rows if r[0] == "FAIL"], [])
        skipped = [r for r in rows if r[0] == "SKIPPED"]
        c.check("skips cite a table cell", all(len(r) == 5 and "[table " in r[4] for r in skipped), True)
        names = " ".join(r[2] for r in skipped)
        for family in ("E_", "F_{4", "B_{n,2}", "^h"):
            c.check(f"{family} reported SKIPPED", family in names, True)
        with capsys.disabled():
            print()
            for line in out.splitlines():
                print("   ", line)


@pytest.mark.slow
def test_criterion_9_stretch_b42():
    with criterion("9-stretch") as c:
        r = report("Bgr:sp:8:2:k=2")
        c.check("points", geometry("Bgr:sp:8:2:k=2").point_count, 5355)
        c.check("1-lacunary", is_k_lacunary(r, 1)[0], True)
        c.check("rank spectrum", sorted(r.rank_spectrum), [2, 3])
        c.check("symp thickness mixed", {s.building_thick for s in r.symps}, {True, False})
        spec = "Bgr:sp:8:2:k=2"
        res = verify_tables(select=lambda row: row.id == "T2-mixed-k1", include_stretch=True,
                            analyses={spec: (geometry(spec), r)})
        c.check("table row", [x.status for x in res], ["PASS"])
        c.budget(7200)
