import io
import json
import random
import subprocess
import sys
from fractions import Fraction

import jsonschema
import pytest

from loopline import checks, cli, diagrams, fig8_path
from loopline.algebra import RatFunc, T, parse_laurent
from loopline.checks import SuiteResult
from loopline.diagrams import DiagramSeries
from loopline.sampling import random_remainder
from loopline.serialize import SCHEMAS, poly_from_json, rational_from_json, ratfunc_from_json, series_from_json, series_to_json

FIG8 = fig8_path()


def run(*argv):
    out = io.StringIO()
    code = cli.main(list(argv), out)
    return code, out.getvalue()


def run_json(command, *argv):
    code, text = run(command, *argv, "--format", "json")
    assert code == 0
    obj = json.loads(text)
    jsonschema.validate(obj, SCHEMAS[command])
    return obj


@pytest.fixture
def r_file(tmp_path):
    r = random_remainder(random.Random(52), mu=1, terms=3, order=2)
    path = tmp_path / "r.json"
    path.write_text(json.dumps(series_to_json(r)))
    return str(path)


@pytest.fixture
def bad_special(tmp_path):
    path = tmp_path / "bad.sl"
    path.write_text("strands 1\nstrand 1: D+\n")
    return str(path)


def test_wind_text_and_json():
    code, text = run("wind", FIG8)
    assert code == 0
    assert "1*t^-1 - 3*t^0 + 1*t^1" in text
    assert "sigma+ = 0, sigma- = 1" in text
    obj = run_json("wind", FIG8)
    assert poly_from_json(obj["W"][0][0]) == T - 3 + T**-1
    assert obj["W1"] == [["-1"]]
    assert obj["sigma"] == {"plus": 0, "minus": 1}
    assert obj["special"]["isSpecial"] is True


def test_alex_text_matches_json():
    code, text = run("alex", FIG8)
    assert code == 0
    lines = dict(line.split(" = ", 1) for line in text.strip().splitlines())
    obj = run_json("alex", FIG8)
    assert parse_laurent(lines["A(t)"]) == poly_from_json(obj["alexander"]) == -T + 3 - T**-1
    assert parse_laurent(lines["det W"]) == poly_from_json(obj["det"])


def test_wheels_command():
    code, text = run("wheels", FIG8, "--order", "6")
    assert code == 0
    assert "c2 = 25/48" in text and "c4 = 1679/5760" in text and "c6 = 15221/72576" in text
    obj = run_json("wheels", FIG8, "--order", "4")
    assert [(w["m"], rational_from_json(w["coeff"])) for w in obj["wheels"]] == [
        (2, Fraction(25, 48)), (4, Fraction(1679, 5760))
    ]


def test_invert_command():
    code, text = run("invert", FIG8)
    assert code == 0 and "adj" in text
    obj = run_json("invert", FIG8)
    assert poly_from_json(obj["adjugate"][0][0]) == poly_from_json({"0": "1"})
    assert poly_from_json(obj["inverse"][0][0]["den"]) == T**2 - 3 * T + 1


def test_integrate_without_r():
    obj = run_json("integrate", FIG8, "--order", "4")
    assert obj["loops"] == []
    assert obj["sigma"] == {"plus": 0, "minus": 1}
    assert obj["metadata"]["lmoSign"] == 1
    code, text = run("integrate", FIG8)
    assert code == 0 and "c2 = 25/48" in text and "note:" in text


def test_integrate_with_r(r_file):
    obj = run_json("integrate", FIG8, r_file, "--order", "4", "--loops", "3", "--n", "2")
    assert obj["loops"]
    for group in obj["loops"]:
        terms = series_from_json(group["diagrams"])
        for d in terms.terms:
            assert d.euler_characteristic() == group["eulerChi"]
    code, text = run("integrate", FIG8, r_file)
    assert code == 0 and "loop terms" in text


def test_check_is_deterministic():
    a = run_json("check", "--seed", "3", "--trials", "3")
    b = run_json("check", "--seed", "3", "--trials", "3")
    assert a == b and a["ok"] is True
    assert {s["name"] for s in a["suites"]} == set(checks.SUITES)


def test_check_parallel_matches_serial():
    a = run_json("check", "--seed", "4", "--trials", "2")
    b = run_json("check", "--seed", "4", "--trials", "2", "--jobs", "2")
    assert a == b


def test_check_failure_exit_code(monkeypatch):
    def failing(seed, trials):
        res = SuiteResult("always-fails")
        res.record(False, "by construction")
        return res

    monkeypatch.setattr(checks, "SUITES", {"always-fails": (failing, 1)})
    code, text = run("check", "--trials", "1")
    assert code == 4
    assert "FAIL always-fails" in text


def test_exit_code_input_errors(tmp_path, capsys):
    bad = tmp_path / "bad.sl"
    bad.write_text("strands 1\nstrand 1: Q\n")
    assert run("wind", str(bad))[0] == 2
    assert "line 2, column 11" in capsys.readouterr().err
    assert run("alex", str(tmp_path / "missing.sl"))[0] == 2
    broken = tmp_path / "r.json"
    broken.write_text("{not json")
    assert run("integrate", FIG8, str(broken))[0] == 2


def test_exit_code_preconditions(bad_special, tmp_path, capsys):
    code, text = run("wind", bad_special)
    assert code == 3
    assert "special = no" in text
    for command in ("alex", "wheels", "invert", "integrate"):
        assert run(command, bad_special)[0] == 3
    malformed = tmp_path / "r.json"
    malformed.write_text(json.dumps({"terms": [{"coeff": "1"}]}))
    assert run("integrate", FIG8, str(malformed))[0] == 3


def test_usage_errors():
    with pytest.raises(SystemExit) as info:
        cli.main(["wheels", FIG8, "--order", "-1"], io.StringIO())
    assert info.value.code == 2
    with pytest.raises(SystemExit):
        cli.main([], io.StringIO())


def test_max_vertices_flag(monkeypatch, r_file):
    monkeypatch.setattr(diagrams, "DEFAULT_MAX_VERTICES", diagrams.DEFAULT_MAX_VERTICES)
    code, _ = run("integrate", FIG8, r_file, "--max-vertices", "2")
    assert code == 3


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "loopline", "alex", FIG8], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("A(t) = -1*t^-1 + 3*t^0 - 1*t^1")


def test_series_json_round_trip():
    r = random_remainder(random.Random(53), mu=2, terms=3, order=2)
    obj = series_to_json(r)
    jsonschema.validate(obj, SCHEMAS["series"])
    assert series_from_json(json.loads(json.dumps(obj))) == r


def test_integrate_bundled_list_form_r():
    from importlib.resources import files

    path = str(files("loopline") / "data" / "h_remainder.json")
    obj = run_json("integrate", FIG8, path, "--order", "2")
    assert [g["eulerChi"] for g in obj["loops"]] == [0]
    (term,) = obj["loops"][0]["diagrams"]
    assert abs(rational_from_json(term["coeff"])) == 2
    labels = sorted((ratfunc_from_json(e["label"]) for e in term["diagram"]["edges"]), key=repr)
    inv_w = RatFunc(T, parse_laurent("1*t^0 - 3*t^1 + 1*t^2"))
    assert sorted([RatFunc(1)] * 3 + [inv_w], key=repr) == labels
