import json
from importlib import resources

import jsonschema
import pytest

from levimax import cli
from levimax.cli import InputError, RunConfig, main, run
from levimax.report import load_schema

DATA = resources.files("levimax").joinpath("data")
SCHEMA = load_schema()


def data(name):
    return str(DATA.joinpath(name))


def invoke(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    report = json.loads(out) if out.strip() else None
    if report is not None:
        jsonschema.validate(report, SCHEMA)
        assert report["exit_code"] == code
    return code, report, err


def test_schema_is_valid():
    jsonschema.Draft202012Validator.check_schema(SCHEMA)


def test_analyze_example1(capsys):
    code, rep, err = invoke(capsys, "analyze", data("example1.dfn"), "--q", "2")
    assert code == 0
    t, r = 2.0, 0.1
    assert rep["verdicts"]["necessary"]["value"] == pytest.approx(1 + t * (4 * r**4 + 1), rel=1e-9)
    assert rep["eigenvalues"] == pytest.approx([-t * r, r / (4 * r**4 + 1)], rel=1e-9)
    assert "necessary" in err


def test_analyze_t_override(capsys):
    code, rep, _ = invoke(capsys, "analyze", data("example1.dfn"), "--q", "2", "--t", "5")
    assert rep["params"] == {"t": 5.0}
    assert rep["verdicts"]["necessary"]["value"] == pytest.approx(1 + 5 * (4e-4 + 1), rel=1e-9)
    code, _, err = invoke(capsys, "analyze", data("flat.dfn"), "--t", "5")
    assert code == 1


def test_analyze_A_too_small(capsys):
    code, rep, _ = invoke(capsys, "analyze", data("example1.dfn"), "--q", "2", "--A", "2")
    assert code == 2
    assert rep["verdicts"]["necessary_at_A"]["kind"] == "fails"


def test_analyze_flat_trivial(capsys):
    code, rep, _ = invoke(capsys, "analyze", data("flat.dfn"))
    assert code == 0
    assert {v["kind"] for v in rep["verdicts"].values()} == {"trivial"}
    assert rep["verdicts"]["necessary"]["value"] == "trivial"


def test_malformed_input(capsys, tmp_path):
    bad = tmp_path / "bad.dfn"
    bad.write_text("re(z1\n")
    code, rep, err = invoke(capsys, "analyze", str(bad))
    assert code == 1 and rep is None
    assert "line 1, column 6" in err


def test_missing_file_and_bad_q(capsys, tmp_path):
    code, _, err = invoke(capsys, "analyze", str(tmp_path / "none.dfn"))
    assert code == 1 and "cannot read" in err
    code, _, _ = invoke(capsys, "analyze", data("example1.dfn"), "--q", "3")
    assert code == 1
    code, _, _ = invoke(capsys, "scan", data("example1.dfn"), "--samples", "0")
    assert code == 1
    code, _, _ = invoke(capsys, "bogus")
    assert code == 1


def test_division_pole_is_numerical(capsys, tmp_path):
    f = tmp_path / "pole.dfn"
    f.write_text("abs2(z1)/(abs2(z1) + abs2(z2)) - im(z3)\n")
    code, _, err = invoke(capsys, "analyze", str(f))
    assert code == 3
    assert "numerical" in err


def test_scan_example2(capsys):
    code, rep, _ = invoke(capsys, "scan", data("example2.dfn"), "--t", "2", "--samples", "300")
    assert code == 0
    assert rep["summary"]["det_nonpositive_all"] is True
    assert len(rep["records"]) == 300


def test_scan_radius_sweep(capsys):
    code, rep, _ = invoke(
        capsys, "scan", data("example1.dfn"), "--samples", "100", "--radius-sweep", "0.1,0.05,0.025", "--center", "0,0,0"
    )
    sups = [row["sup_A_min"] for row in rep["radius_sweep"]]
    assert sups[-1] == pytest.approx(3.0, rel=0.01)


def test_scan_with_failing_A(capsys):
    code, rep, _ = invoke(capsys, "scan", data("example1.dfn"), "--A", "2", "--samples", "30", "--center", "0,0,0")
    assert code == 2
    assert rep["summary"]["any_condition_failure"] is True


def test_certify_example2_pass_and_empty_window(capsys):
    code, rep, _ = invoke(capsys, "certify", data("example2.dfn"), "--samples", "40")
    assert code == 0 and rep["passed"] is True
    code, rep, _ = invoke(capsys, "certify", data("example2.dfn"), "--t", "2.7", "--samples", "40")
    assert code == 2
    assert rep["upsilon"]["b_window"]["empty"] is True
    assert rep["findings"]


@pytest.mark.parametrize("name", ["example1.dfn", "convex_tangential.dfn", "zq_example1.dfn"])
def test_certify_bundled_fields(capsys, name):
    code, rep, _ = invoke(capsys, "certify", data(name), "--samples", "30")
    assert code == 0, rep["findings"]
    assert all(rep["hypotheses"].values())


def test_certify_identity_reports_window(capsys):
    code, rep, _ = invoke(capsys, "certify", data("identity_upsilon.dfn"), "--samples", "10")
    assert code == 2
    assert rep["hypotheses"]["eigenvalue_window"] is False
    assert any("eigenvalues lie in" in f for f in rep["findings"])


def test_certify_needs_upsilon(capsys):
    code, _, err = invoke(capsys, "certify", data("flat.dfn"))
    assert code == 1


def test_model_sequence(capsys):
    code, rep, _ = invoke(capsys, "model", data("example1.dfn"), "--tau", "25,50,100", "--samples", "4000")
    assert code == 0
    seq = rep["tau_sequence"]
    assert [s["tau"] for s in seq] == [25.0, 50.0, 100.0]
    assert abs(seq[-1]["value"] - seq[-1]["model_value"]) < abs(seq[0]["value"] - seq[0]["model_value"]) + 3 * seq[0][
        "stderr"
    ]
    assert rep["certificate"]["a_lower_bound"] == pytest.approx(rep["necessary_min_A"]["value"], rel=0.02)


def test_model_flat_trivial(capsys):
    code, rep, _ = invoke(capsys, "model", data("flat.dfn"), "--tau", "10", "--samples", "200")
    assert code == 0
    assert rep["certificate"]["kind"] == "trivial"


def test_model_A_below_bound(capsys):
    code, rep, _ = invoke(capsys, "model", data("example1.dfn"), "--A", "2", "--samples", "100")
    assert code == 2


def test_reproduce(capsys):
    code, rep, err = invoke(capsys, "reproduce", "example1")
    assert code == 0 and rep["passed"]
    assert "FAIL" not in err


def test_out_file(capsys, tmp_path):
    target = tmp_path / "r.json"
    code = main(["analyze", data("sphere.dfn"), "--out", str(target)])
    out, _ = capsys.readouterr()
    assert code == 0 and out == ""
    rep = json.loads(target.read_text())
    assert rep["verdicts"]["zq"]["kind"] == "holds"


@pytest.mark.parametrize(
    "argv",
    [
        ["scan", data("example2.dfn"), "--samples", "50", "--seed", "3"],
        ["reproduce", "example2", "--seed", "1"],
        ["model", data("example1.dfn"), "--tau", "20", "--samples", "500", "--seed", "4"],
    ],
)
def test_byte_identical_runs(capsys, argv):
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    assert capsys.readouterr().out == first


def test_run_config_validation():
    with pytest.raises(InputError):
        RunConfig("scan", radius=0.0)
    with pytest.raises(InputError):
        RunConfig("scan", tau_sign=-1.0)
    with pytest.raises(InputError):
        RunConfig("nothing")
    with pytest.raises(InputError):
        run(RunConfig("analyze"))


def test_fmt():
    assert cli._fmt(1 - 2j) == "1-2i"
    assert cli._fmt(float("inf")) == "inf"
    assert cli._fmt([0.5, 2]) == "[0.5, 2]"
