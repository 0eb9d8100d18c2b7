from parapolar.tables import load_expectations, summary, thickness_class, verify_tables


def test_expectations_are_well_formed():
    rows = load_expectations()
    ids = [r.id for r in rows]
    assert len(ids) == len(set(ids))
    for r in rows:
        assert r.table in (1, 2)
        assert bool(r.witness) != bool(r.skip)
        if r.witness:
            assert set(r.expect) == {"rank_spectrum", "S", "diameter", "strong", "thickness"}
        if r.left:
            assert r.left in ids


def test_skipped_rows_carry_reasons():
    res = verify_tables(select=lambda r: r.skip is not None)
    assert res and all(r.status == "SKIPPED" and r.reason.startswith("no-desk-scale-witness") for r in res)


def test_small_rows_pass():
    res = verify_tables(select=lambda r: r.id in {"T2-thick-k0", "T2-a3-k0", "T1-r2-km1"})
    assert summary(res) == {"PASS": 3, "FAIL": 0, "SKIPPED": 0}


def test_stretch_rows_skip_by_default():
    res = verify_tables(select=lambda r: r.stretch)
    assert [r.status for r in res] == ["SKIPPED"]


def test_wrong_expectation_fails():
    rows = [r for r in load_expectations() if r.id == "T2-thick-k0"]
    rows[0].expect = dict(rows[0].expect, diameter=2)
    res = verify_tables(rows)
    assert res[0].status == "FAIL" and "diameter" in res[0].reason


def test_thickness_classes(analysed):
    assert thickness_class(analysed("dualpolar:sp:6:2")) == "thick"
    assert thickness_class(analysed("A:4:2:2")) == "non-thick"
    assert thickness_class(analysed("prod:(line:3)x(polar:sp:6:2)")) == "mixed"
