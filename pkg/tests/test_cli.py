import json
import subprocess
import sys

import pytest

from ffpoisson.cli import build_parser, main, parse_mpoly, parse_place, parse_tpoly
from ffpoisson.cli import ParseError
from ffpoisson.scalars import make_field

F2 = make_field(2)
F3 = make_field(3)


def run_cli(argv, tmp_path, name="report.json"):
    out = tmp_path / name
    code = main(list(argv) + ["--out", str(out)])
    return code, out.read_bytes()


def test_parse_mpoly_examples():
    h = parse_mpoly("x0^2+x0*x1+1", F3, 2)
    assert h.terms == {(2, 0): 1, (1, 1): 1, (0, 0): 1}
    assert parse_mpoly("2*x0", F3, 1).terms == {(1,): 2}
    assert parse_mpoly("-x0+x0", F3, 1).is_zero()


def test_parse_error_reports_column():
    with pytest.raises(ParseError) as err:
        parse_mpoly("x0 + $", F3, 1)
    assert "column 6" in str(err.value)
    with pytest.raises(ParseError) as err:
        parse_mpoly("x3", F3, 2)
    assert "out of range" in str(err.value)


def test_parse_tpoly_and_place():
    f = parse_tpoly("t^2+t+1", F2)
    assert f.coeffs == (1, 1, 1)
    u = parse_place("inf", F2)
    assert u.is_infinite
    assert parse_place("t+1", F2).degree == 1


def test_charsum_command(tmp_path):
    code, text = run_cli(
        ["charsum", "--p", "3", "--h", "x0^2", "--degrees", "1"], tmp_path
    )
    assert code == 0
    rep = json.loads(text)
    assert rep["rows"][0]["value"]["zeta_coeffs"] == [[1, 1], [2, 1]]


def test_charsum_identity_vanishes(tmp_path):
    code, text = run_cli(["charsum", "--p", "2", "--h", "x0"], tmp_path)
    rep = json.loads(text)
    for row in rep["rows"]:
        assert row["value"]["zeta_coeffs"] == [[0, 1]]


def test_euler_command(tmp_path):
    code, text = run_cli(
        ["euler", "--p", "2", "--set", "gm", "--precision", "3"], tmp_path
    )
    assert code == 0
    assert json.loads(text)["all_equal"] is True


def test_local_fourier_command(tmp_path):
    code, text = run_cli(
        ["local-fourier", "--p", "2", "--window", "1,1", "--check-inversion"],
        tmp_path,
    )
    assert code == 0
    rep = json.loads(text)
    assert rep["inversion_exact"] is True


def test_poisson_command(tmp_path):
    code, text = run_cli(
        ["poisson", "--p", "2", "--places", "t;inf", "--window", "1,1"], tmp_path
    )
    assert code == 0
    rep = json.loads(text)
    assert rep["all_equal"] is True and len(rep["rows"]) == 36


def test_alg_check_command(tmp_path):
    code, text = run_cli(
        ["alg-check", "--p", "2", "--n", "3", "--samples", "100", "--seed", "5"],
        tmp_path,
    )
    assert code == 0
    rep = json.loads(text)
    assert rep["all_equal"] is True


def test_theorem_a_command_small(tmp_path):
    code, text = run_cli(
        [
            "theorem-a",
            "--window",
            "0,1",
            "--pairs",
            "8",
            "--recipes",
            "const,psi_trace",
        ],
        tmp_path,
    )
    assert code == 0
    assert json.loads(text)["all_equal"] is True


def test_reports_are_deterministic(tmp_path):
    argv = ["poisson", "--p", "2", "--places", "t;inf", "--window", "1,1"]
    _, a = run_cli(argv, tmp_path, "a.json")
    _, b = run_cli(argv, tmp_path, "b.json")
    assert a == b
    argv2 = ["alg-check", "--samples", "50", "--seed", "9"]
    _, c = run_cli(argv2, tmp_path, "c.json")
    _, d = run_cli(argv2, tmp_path, "d.json")
    assert c == d


def test_csv_summary(tmp_path):
    out = tmp_path / "r.json"
    code = main(
        ["euler", "--p", "2", "--precision", "2", "--format", "csv", "--out", str(out)]
    )
    assert code == 0
    csv_text = (tmp_path / "r.json.csv").read_text()
    assert csv_text.splitlines()[0].startswith("equal")


def test_bad_command_errors():
    assert main(["poisson", "--p", "2", "--places", "t^2+t", "--window", "1,1"]) == 2


def test_reports_embed_config_and_version(tmp_path):
    code, text = run_cli(["charsum", "--p", "2", "--h", "0"], tmp_path)
    rep = json.loads(text)
    assert rep["version"]
    assert rep["config"]["command"] == "charsum"
    assert rep["config"]["p"] == 2


def test_local_fourier_file_roundtrip(tmp_path):
    from ffpoisson.cli import local_fn_from_json, local_fn_to_json
    from ffpoisson.localfield import LocalTestFunction, Window, fourier1
    from ffpoisson.place import PlaceData
    from ffpoisson.scalars import CycScalar

    pd = PlaceData.synthetic(F3, 1, 0)
    phi = LocalTestFunction.delta(pd, Window(1, 1), 4)
    path = tmp_path / "fn.json"
    path.write_text(json.dumps(local_fn_to_json(phi)))
    out = tmp_path / "out.json"
    code = main(
        [
            "local-fourier",
            "--p",
            "3",
            "--window",
            "1,1",
            "--in",
            str(path),
            "--out",
            str(out),
        ]
    )
    assert code == 0
    rep = json.loads(out.read_text())
    expected = fourier1(phi)
    got = local_fn_from_json(rep["result"])
    assert got.table_equal(expected)


def test_timeout_budget_fails_loudly():
    code = main(
        ["poisson", "--p", "2", "--places", "t;t+1;inf", "--window", "1,1",
         "--timeout", "0.0", "--out", "/dev/null"]
    )
    assert code == 3


def test_recipe_depth_validation():
    from ffpoisson.cyclic_algebra import (
        AlgebraDescriptor,
        RecipeCharPolyCoset,
        invariant_fn,
        target_s_charpoly,
    )
    from ffpoisson.localfield import Window

    D = AlgebraDescriptor(F2, 3, 1)
    bad = RecipeCharPolyCoset(target_s_charpoly(D, 2))
    with pytest.raises(ValueError):
        invariant_fn(D, bad, Window(0, 1))
