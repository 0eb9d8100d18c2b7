import pytest

from parapolar.analysis import verify_parapolar
from parapolar.constructions import build
from parapolar.geometry import diameter
from parapolar.lie import product, thick_line
from parapolar.polar import verify_polar
from parapolar.residuals import exact_iso_small


@pytest.mark.parametrize("spec,key", [("A:4:2:2", "A42(2)"), ("A:3:1:2", "PG(3,2)"),
                                      ("dualpolar:sp:6:2", "DW(5,2)"), ("segre:2:2:2", "segre_fano"),
                                      ("prod:(line:3)x(polar:sp:6:2)", "line3xW(5,2)")])
def test_counts_against_oracle(spec, key, counts, built):
    g = built(spec)
    assert g.point_count == counts[key]["points"]
    assert len(g.lines) == counts[key]["lines"]


def test_grassmannian_A52():
    g = build("A:5:2:2")
    assert (g.point_count, len(g.lines)) == (651, 9765)


def test_dual_polar_diameter_equals_rank(built):
    assert diameter(built("dualpolar:sp:6:2")) == 3
    assert diameter(build("dualpolar:sp:4:2")) == 2


def test_half_spin_small_cases():
    assert exact_iso_small(build("halfspin:o+:6:2"), build("A:3:1:2"))
    h = build("halfspin:o+:8:2")
    v = verify_polar(h)
    assert v.is_polar and v.rank == 4 and h.point_count == 135
    # the two families are isomorphic
    assert exact_iso_small(h, build("halfspin:o+:8:2:family=1"))


def test_polar_grassmannian_lines_of_w52():
    g = build("Bgr:sp:6:2:k=2")
    assert (g.point_count, len(g.lines)) == (315, 945)


def test_product_shape():
    g = product(thick_line(3), thick_line(4))
    assert g.point_count == 12 and len(g.lines) == 3 + 4
    assert sorted(set(g.line_sizes.tolist())) == [3, 4]
    assert diameter(g) == 2


def test_product_diameter_adds(built):
    g = built("prod:(line:3)x(polar:sp:6:2)")
    assert diameter(g) == 1 + 2


def test_products_are_parapolar():
    r = verify_parapolar(build("prod:(line:3)x(line:3)x(line:3)"))
    assert r.is_parapolar and r.rank_spectrum == {2} and r.diameter == 3
