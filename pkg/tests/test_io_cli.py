import csv
import json
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from linecong import fig1_congruence
from linecong.cli import main
from linecong.congruence import Congruence, Poly
from linecong.errors import DomainEmpty, MissingChart, ParseError
from linecong.io import congruence_equal, load_congruence, parse_congruence, serialize_congruence

EXAMPLES = Path(__file__).resolve().parents[1] / "examples" / "congruences"
FIG1 = str(EXAMPLES / "fig1.cong")
LINEAR = str(EXAMPLES / "linear.cong")
FOLDED = str(EXAMPLES / "folded.cong")


# -- file format ------------------------------------------------------------------------------

def test_fig1_file_is_fig1():
    Z = load_congruence(FIG1)
    assert congruence_equal(Z, fig1_congruence()) or (Z.b1 == fig1_congruence().b1 and Z.b2 == fig1_congruence().b2)
    assert Z.name == "fig1"


def test_rational_and_decimal_coefficients():
    Z = parse_congruence("chart b\nb1 0 1 2/1\nb1 1 0 1/3\nb2 2 0 0.25\n")
    c = Z.b1.terms[(0, 1)]
    assert c == 2 and type(c) in (int, Fraction)
    assert Z.b1.terms[(1, 0)] == Fraction(1, 3)
    assert Z.b2.terms[(2, 0)] == 0.25


def test_empty_component_is_zero():
    Z = parse_congruence("chart b\nb1 0 1 1\n")
    assert Z.b2 == Poly({})
    assert Z.domain.as_tuple() == (-1.0, 1.0, -1.0, 1.0)


@pytest.mark.parametrize("text, err, line", [
    ("chart b\nb3 0 0 1\n", ParseError, 2),
    ("chart b\n# comment\nb1 0 x 1\n", ParseError, 3),
    ("chart b\nb1 0 1 1/0\n", ParseError, 2),
    ("chart b\nb1 0 1 1\nb1 0 1 2\n", ParseError, 3),
    ("chart b\na1 0 1 1\n", ParseError, 2),
    ("chart c\n", ParseError, 1),
    ("chart b\nchart a\n", ParseError, 2),
    ("chart b\ndomain 1 0 -1 1\n", DomainEmpty, 2),
    ("b1 0 1 1\n", MissingChart, None),
    ("chart b\nb1 0 -1 1\n", ParseError, 2),
])
def test_parse_errors(text, err, line):
    with pytest.raises(err) as exc:
        parse_congruence(text)
    assert exc.value.line == line


coeffs = st.one_of(
    st.integers(-50, 50),
    st.fractions(min_value=-10, max_value=10, max_denominator=30),
    st.floats(-10, 10, allow_nan=False),
)
terms = st.dictionaries(st.tuples(st.integers(0, 4), st.integers(0, 4)), coeffs, max_size=8)


@given(terms, terms, st.sampled_from(["a", "b"]))
def test_round_trip(t1, t2, chart):
    t1 = {k: v for k, v in t1.items() if v != 0}
    t2 = {k: v for k, v in t2.items() if v != 0}
    make = Congruence.bchart if chart == "b" else Congruence.achart
    Z = make(Poly(t1), Poly(t2), domain=(-0.5, 2.0, -1.0, 0.25))
    W = parse_congruence(serialize_congruence(Z))
    assert congruence_equal(Z, W)
    assert serialize_congruence(W) == serialize_congruence(Z)


# -- command line -----------------------------------------------------------------------------

def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_classify_fig1_origin_row(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["classify", "--input", FIG1, "--grid", "5x5", "--out", str(out)]) == 0
    rows = _rows(out)
    assert list(rows[0]) == ["u", "v", "class", "stall", "delta", "t1_re", "t1_im", "t2_re", "t2_im",
                             "mid_x", "mid_y", "mid_z"]
    assert len(rows) == 25
    (row,) = [r for r in rows if float(r["u"]) == 0 and float(r["v"]) == 0]
    assert row["class"] == "parabolic" and row["delta"] == "0"
    assert [row[k] for k in ("mid_x", "mid_y", "mid_z")] == ["0", "0", "0"]
    assert row["stall"] == "false"


def test_focal_obj_linear(tmp_path):
    out = tmp_path / "f.obj"
    assert main(["focal", "--input", LINEAR, "--grid", "3x3", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    verts = np.array([[float(x) for x in ln.split()[1:]] for ln in lines if ln.startswith("v ")])
    faces = [ln for ln in lines if ln.startswith("f ")]
    assert len(verts) == 18 and len(faces) == 8
    # vertices are written sheet by sheet in grid order, so (0,0) is the middle of each block of 9;
    # for this linear congruence the height of a focal point is its parameter t
    assert sorted([verts[4, 2], verts[13, 2]]) == [-1, 1]
    np.testing.assert_array_equal(verts[[4, 13], :2], 0)
    for f in faces:
        idx = [int(i) for i in f.split()[1:]]
        assert len(idx) == 4 and min(idx) >= 1 and max(idx) <= 18


@pytest.mark.parametrize("cmd", ["middle", "plane-focal"])
def test_other_meshes(tmp_path, cmd):
    out = tmp_path / "m.obj"
    assert main([cmd, "--input", FIG1, "--grid", "4x4", "--out", str(out)]) == 0
    assert out.read_text().startswith("v ")


def test_parabolic_csv(tmp_path):
    out = tmp_path / "p.csv"
    assert main(["parabolic", "--input", FOLDED, "--out", str(out), "--folded", "--resolution", "21"]) == 0
    rows = _rows(out)
    assert list(rows[0]) == ["u", "v", "delta_residual", "branch", "flag"]
    assert {r["flag"] for r in rows} == {"curve", "folded_nonisolated"}
    assert all(float(r["delta_residual"]) < 1e-8 for r in rows)


def test_torsal_and_developable(tmp_path):
    out, obj = tmp_path / "t.csv", tmp_path / "d.obj"
    argv = ["torsal", "--input", LINEAR, "--seed", "0.1", "0.2", "--branch", "1", "--out", str(out),
            "--developable", "-1", "1", "--obj", str(obj)]
    assert main(argv) == 0
    rows = _rows(out)
    assert list(rows[0]) == ["u", "v", "du", "dv"]
    assert obj.read_text().count("\nf ") > 0


def test_contact_json(tmp_path, capsys):
    out = tmp_path / "c.json"
    assert main(["contact", "--input", FIG1, "--model", "point", "--at", "0", "0", "--point", "0", "0", "0",
                 "--out", str(out)]) == 0
    d = json.loads(out.read_text())
    assert {"model", "type", "witness", "normalization"} <= set(d)
    assert d["model"] == "Point" and d["type"] == "A1"
    assert main(["contact", "--input", FIG1, "--model", "line", "--at", "0", "0"]) == 0
    assert json.loads(capsys.readouterr().out)["type"] == "A2"


def test_errors_exit_nonzero(tmp_path, capsys):
    bad = tmp_path / "bad.cong"
    bad.write_text("chart b\nb1 0 1 q\n")
    assert main(["classify", "--input", str(bad), "--out", str(tmp_path / "x.csv")]) == 2
    assert "line 2" in capsys.readouterr().err
    assert main(["contact", "--input", FIG1, "--model", "point", "--at", "0", "0"]) == 2
    assert main(["contact", "--input", FIG1, "--model", "point", "--at", "0", "0", "--point", "1", "0", "0"]) == 2
    assert main(["torsal", "--input", str(EXAMPLES / "fig1.cong"), "--seed", "5", "5", "--out",
                 str(tmp_path / "t.csv")]) == 2
    with pytest.raises(SystemExit):
        main(["classify", "--input", FIG1, "--grid", "1x4", "--out", "x"])


def test_verify_exit_code(capsys):
    assert main(["verify", "--input", FIG1, "--suite", "all", "--samples", "30", "--seed", "1"]) == 0
    out = capsys.readouterr().out
    assert "jet: pass" in out and "quadric: pass" in out


def test_outputs_are_deterministic(tmp_path):
    for cmd, ext in (("classify", "csv"), ("focal", "obj"), ("middle", "obj")):
        a, b = tmp_path / f"a.{ext}", tmp_path / f"b.{ext}"
        for p in (a, b):
            assert main([cmd, "--input", FIG1, "--grid", "7x6", "--out", str(p)]) == 0
        assert a.read_bytes() == b.read_bytes()
