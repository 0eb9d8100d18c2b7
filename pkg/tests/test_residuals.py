import pytest
from hypothesis import given, strategies as st

from parapolar.constructions import build
from parapolar.geometry import components
from parapolar.residuals import (
    SizeExceeded, classify_components, exact_iso_small, find_isomorphism, fingerprint,
    is_locally_connected, point_residual, residual_sweep,
)


def test_a42_residual_is_line_times_plane(built, analysed):
    g, r = built("A:4:2:2"), analysed("A:4:2:2")
    res = point_residual(g, 0, r.symps)
    assert res.geometry.point_count == 21
    assert exact_iso_small(res.geometry, build("prod:(line:3)x(A:2:1:2)"))


def test_a42_is_locally_connected(built, analysed):
    assert is_locally_connected(built("A:4:2:2"), analysed("A:4:2:2").symps) == (True, None)


def test_dual_polar_residuals_are_single_lines(built, analysed):
    g, r = built("dualpolar:sp:6:2"), analysed("dualpolar:sp:6:2")
    for p in (0, 50, 134):
        res = point_residual(g, p, r.symps)
        tags = classify_components(res, g, r.symps)
        assert len(tags) == 7 and {t.tag for t in tags} == {"single-line"}


def test_residual_symp_ranks_drop_by_one(built, analysed):
    g, r = built("prod:(line:3)x(polar:sp:6:2)"), analysed("prod:(line:3)x(polar:sp:6:2)")
    res = point_residual(g, 0, r.symps)
    tags = classify_components(res, g, r.symps)
    assert sorted(t.tag for t in tags) == ["single-line", "symp-residue"]
    big = max(components(res.geometry), key=len)
    assert len(big) == 15  # residue of the rank-3 symp {x} x W(5,2) is W(3,2)


def test_fingerprint_equality_on_isomorphic_relabelling(built):
    g = built("segre:2:2:2")
    h = build("segre:2:2:2")
    assert fingerprint(g) == fingerprint(h)
    assert fingerprint(g) != fingerprint(built("A:4:2:2"))


def test_exact_iso_negative_and_gate(built):
    assert not exact_iso_small(built("A:4:2:2"), built("dualpolar:sp:6:2"))
    with pytest.raises(SizeExceeded):
        find_isomorphism(built("A:4:2:2"), built("A:4:2:2"), max_vertices=100)


@given(st.permutations(range(9)))
def test_iso_finds_relabelled_grid(perm):
    g = build("prod:(line:3)x(line:3)")
    from parapolar.geometry import Geometry
    h = Geometry(9, [[perm[x] for x in L] for L in g.lines])
    m = find_isomorphism(g, h)
    assert m is not None
    assert {tuple(sorted(m[x] for x in L)) for L in g.lines} == set(h.lines)


def test_sweep_is_uniform_on_a42(built, analysed):
    s = residual_sweep(built("A:4:2:2"), analysed("A:4:2:2").symps, points=range(0, 155, 31))
    assert s.uniform() and len(s.points) == 5
