import pytest

from parapolar.constructions import ConstructionParseError, build
from parapolar.geometry import write_plg


@pytest.mark.parametrize("text,pos", [
    ("nonsense", 0),
    ("A:4:x:2", 4),
    ("polar:sp:6", 6),
    ("prod:(line:3)x(lin:3)", 15),
    ("prod:(line:3)y(line:3)", 13),
    ("prod:(line:3", 5),
    ("Bgr:sp:6:2:k=z", 13),
])
def test_parse_errors_report_position(text, pos):
    with pytest.raises(ConstructionParseError) as exc:
        build(text)
    assert exc.value.position == pos


def test_missing_plg(tmp_path):
    with pytest.raises(ConstructionParseError):
        build(str(tmp_path / "nope.plg"))


def test_plg_source(tmp_path):
    p = tmp_path / "g.plg"
    write_plg(build("prod:(line:3)x(line:3)"), str(p))
    g = build(str(p))
    assert g.point_count == 9 and len(g.lines) == 6


def test_nested_products():
    g = build("prod:(prod:(line:3)x(line:3))x(line:2)")
    assert g.point_count == 18


def test_deterministic_output(tmp_path):
    a, b = tmp_path / "a.plg", tmp_path / "b.plg"
    write_plg(build("A:4:2:2"), str(a))
    write_plg(build("A:4:2:2"), str(b))
    assert a.read_bytes() == b.read_bytes()
