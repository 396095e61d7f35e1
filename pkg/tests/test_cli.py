import json

import pytest
from flint import fmpq
from hypothesis import given
from hypothesis import strategies as st

from conftest import diffeos, jets
from levijet.cli import main
from levijet.io import (ParseError, ProblemFile, ScheduleOptions, bivector_from_json,
                        bivector_to_json, diffeo_from_json, diffeo_to_json, dumps, parse_problem,
                        poly_from_json, poly_to_json, problem_from_algebroid,
                        problem_from_bivector, structure_from_json, structure_to_json)
from levijet.jets import JetBivector, JetSpace
from levijet.levi import linear_model, perturbed_algebroid, perturbed_problem
from levijet.lie_core import so3, so3_semidirect_r3
from levijet.nash_moser import Mode
from levijet.rational import parse_rational, qstr

S3 = JetSpace(3, 4)


# -- round trips ------------------------------------------------------------------------

@given(st.integers(-10 ** 30, 10 ** 30), st.integers(1, 10 ** 12))
def test_rational_round_trip(p, q):
    x = fmpq(p, q)
    assert parse_rational(qstr(x)) == x


@pytest.mark.parametrize("bad", ["1/0", "1.5", "", "--1", "1/-2", "0x10", "1/02"])
def test_malformed_rationals(bad):
    with pytest.raises(ValueError):
        parse_rational(bad)


@given(jets(S3))
def test_poly_round_trip(f):
    assert poly_from_json(S3, json.loads(json.dumps(poly_to_json(f)))) == f


@given(jets(S3, lo=1), jets(S3, lo=1))
def test_bivector_round_trip(a, b):
    pi = JetBivector(S3, {(0, 1): a, (1, 2): b})
    assert bivector_from_json(S3, json.loads(json.dumps(bivector_to_json(pi)))) == pi


@given(diffeos(S3))
def test_diffeo_round_trip(theta):
    assert diffeo_from_json(S3, json.loads(json.dumps(diffeo_to_json(theta)))) == theta


@pytest.mark.parametrize("data", [so3(), so3_semidirect_r3()])
def test_structure_round_trip(data):
    assert structure_from_json(json.loads(json.dumps(structure_to_json(data)))) == data


def test_problem_file_round_trip():
    problem, _ = perturbed_problem(so3(), 4, seed=0)
    pf = problem_from_bivector(problem.data, problem.pi, mode=Mode.SCHEDULED,
                               schedule=ScheduleOptions(t0=fmpq(16), max_steps=7))
    text = dumps(pf.to_json())
    again = parse_problem(text)
    assert again.to_json() == pf.to_json()
    assert again.bivector_jet() == problem.pi


def test_algebroid_file_round_trip():
    problem, _ = perturbed_algebroid(so3(), 3, seed=0)
    pf = problem_from_algebroid(3, 3, 3, problem.pi)
    again = parse_problem(dumps(pf.to_json()))
    assert again.problem().pi == problem.pi


# -- parse errors --------------------------------------------------------------------------

def _file(tmp_path, obj, name="p.json"):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else dumps(obj))
    return str(path)


@pytest.fixture
def conn_file(tmp_path):
    problem, _ = perturbed_problem(so3(), 5, seed=1)
    return _file(tmp_path, problem_from_bivector(problem.data, problem.pi).to_json(), "conn.json")


def test_bad_rational_position(conn_file, tmp_path):
    text = open(conn_file).read()
    target = json.loads(text)["bivector"][2][2]
    bad = text.replace(f'"{target}"', '"1/0"', 1)
    with pytest.raises(ParseError) as exc:
        parse_problem(bad)
    err = exc.value
    line = bad.splitlines()[err.line - 1]
    assert line[err.column - 1:].startswith('"1/0"')
    assert err.path == "bivector[2][2]"


def test_json_syntax_error_position():
    with pytest.raises(ParseError) as exc:
        parse_problem('{\n  "degree": 3,\n  "kind": }')
    assert exc.value.line == 3


def test_index_and_exponent_checks(conn_file):
    obj = json.loads(open(conn_file).read())
    obj["bivector"][0][0] = [0, 7]
    with pytest.raises(ParseError, match="out of range"):
        parse_problem(dumps(obj))
    obj = json.loads(open(conn_file).read())
    obj["bivector"][0][1] = [1, 0]
    with pytest.raises(ParseError, match="exponent vector"):
        parse_problem(dumps(obj))


# -- commands ------------------------------------------------------------------------------

def _run(capsys, argv):
    code = main(argv)
    return code, json.loads(capsys.readouterr().out)


def test_validate_so3(capsys, tmp_path):
    sp = JetSpace(3, 3)
    path = _file(tmp_path, problem_from_bivector(so3(), linear_model(so3(), sp)).to_json())
    code, rep = _run(capsys, ["validate", "--input", path])
    assert code == 0 and rep["passed"]
    assert rep["tool"]["name"] == "levijet" and len(rep["input_sha256"]) == 64


def test_validate_non_poisson(capsys, tmp_path):
    sp = JetSpace(3, 3)
    pi = linear_model(so3(), sp)
    comps = dict(pi.comps)
    comps[(0, 1)] = comps[(0, 1)] + sp.var(0) ** 2
    path = _file(tmp_path, problem_from_bivector(so3(), JetBivector(sp, comps)).to_json())
    code, rep = _run(capsys, ["validate", "--input", path])
    assert code == 1
    jac = next(c for c in rep["validation"] if c["name"].startswith("jacobiator"))
    assert not jac["passed"] and len(jac["witness"]["monomial"]) == 3


def test_validate_parse_error_exit_code(capsys, conn_file, tmp_path):
    text = open(conn_file).read().replace('"1"', '"1/0"', 1)
    code, rep = _run(capsys, ["validate", "--input", _file(tmp_path, text, "bad.json")])
    assert code == 2 and rep["error"]["line"] is not None


def test_normalize_conn(capsys, conn_file, tmp_path):
    code, rep = _run(capsys, ["normalize", "--input", conn_file])
    assert code == 0 and rep["status"] == "converged"
    assert all(rep["relations"].values()) and all(rep["step_checks"].values())
    assert "timing_ms_approx" not in rep and "elapsed_ms" not in rep["steps"][0]


def test_reports_are_byte_identical(conn_file, tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"r{k}.json"
        assert main(["normalize", "--input", conn_file, "--output", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_timing_is_opt_in(capsys, conn_file):
    code, rep = _run(capsys, ["normalize", "--input", conn_file, "--timing", "--degree", "4"])
    assert code == 0 and "timing_ms_approx" in rep and rep["input"]["degree"] == 4


def test_normalize_scheduled(capsys, conn_file):
    code, rep = _run(capsys, ["normalize", "--input", conn_file, "--mode", "scheduled", "--t0", "16"])
    assert rep["status"] == "converged" and code == 0
    assert rep["audit"]["lines"] and rep["audit"]["note"]


def test_normalize_unconverged_exit(capsys, conn_file):
    code, rep = _run(capsys, ["normalize", "--input", conn_file, "--max-steps", "0"])
    assert code == 1 and rep["status"] == "unconverged"


def test_schedule_command(capsys):
    code, rep = _run(capsys, ["schedule", "--n", "3", "--variant", "main"])
    assert code == 0
    assert rep["constants"]["s"] == 2 and rep["constants"]["A"] == 21
    code, rep = _run(capsys, ["schedule", "--n", "5", "--variant", "appendix", "--tau", "1/2",
                              "--t0", "16", "--max-steps", "2"])
    assert code == 0 and [e["t"] for e in rep["schedule"]] == ["16", "64", "512"]


def test_cohomology_command(capsys, tmp_path):
    path = _file(tmp_path, ProblemFile("structure", 4, structure=so3()).to_json())
    code, rep = _run(capsys, ["cohomology", "--input", path])
    assert code == 0
    assert all(ok for row in rep["identity_by_degree"].values() for ok in row.values())


def test_algebroid_command(capsys, tmp_path):
    problem, _ = perturbed_algebroid(so3(), 4, seed=2)
    path = _file(tmp_path, problem_from_algebroid(3, 3, 3, problem.pi).to_json())
    code, rep = _run(capsys, ["algebroid", "--input", path])
    assert code == 0 and rep["relations"]["fiber-wise linear"]
    code, rep = _run(capsys, ["normalize", "--input", path])
    assert code == 2


def test_axioms_command(capsys, tmp_path):
    pf = ProblemFile("structure", 6, structure=so3())
    pf.axioms.samples = 10
    code, rep = _run(capsys, ["axioms", "--input", _file(tmp_path, pf.to_json())])
    assert code == 0 and {r["axiom"] for r in rep["results"]} >= {"smoothing", "interpolation"}
