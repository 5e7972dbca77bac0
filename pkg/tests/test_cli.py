import io
import json

import jsonschema
import pytest

from gensundman import schemas
from gensundman.cli import run

FIRST = "y'' + (1/y)*y'^2 + y*y' + 1/2 = 0"
SECOND = "y'' + x*y'^2 + y*y' + exp(-2*x*y) = 0"
NEGATIVE = "y'' + y'^2 + y' + y = 0"


def call(*argv, environ=None):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err, {} if environ is None else environ)
    return code, out.getvalue(), err.getvalue()


def call_json(command, *argv, environ=None):
    code, out, err = call(command, *argv, "--format", "json", environ=environ)
    if out:
        payload = json.loads(out)
        jsonschema.validate(payload, schemas.load(schemas.COMMAND_SCHEMA[command]))
    else:
        payload = json.loads(err)
        jsonschema.validate(payload, schemas.load("error"))
        assert payload["exit_code"] == code
    return code, payload


def test_check_first_example():
    code, rep = call_json("check", "--ode", FIRST)
    assert code == 0 and rep["case"] == "A1" and rep["verdict"] == "Linearizable"


def test_lie_check_first_example():
    code, rep = call_json("lie-check", "--ode", FIRST)
    assert code == 1 and rep["verdict"] == "NotLinearizable"


def test_dms_check_free_particle():
    assert call_json("dms-check", "--ode", "y'' = 0")[0] == 0


def test_negative_control_exit_code():
    code, rep = call_json("check", "--ode", NEGATIVE)
    assert code == 1 and rep["case"] == "B"


def test_transform_second_example():
    code, rep = call_json("transform", "--ode", SECOND)
    assert code == 0
    assert rep["transform"]["F"] == "y" and rep["transform"]["G"] == "exp(-x*y)"
    assert (rep["target"]["alpha"], rep["target"]["beta"], rep["target"]["gamma"]) == ("0", "0", "-1")
    assert rep["verification"]["ok"]


def test_transform_with_candidate():
    code, rep = call_json("transform", "--ode", FIRST, "--candidate-F", "y^3", "--candidate-G", "y")
    assert code == 0 and rep["check"] is None
    assert rep["target"]["gamma"] == "-3/2"
    code, rep = call_json("transform", "--ode", FIRST, "--candidate-F", "y^2", "--candidate-G", "y")
    assert code == 1 and rep["target"] is None


def test_transform_not_linearizable():
    code, rep = call_json("transform", "--ode", NEGATIVE)
    assert code == 1 and rep["transform"] is None


def test_parse_and_invariants():
    code, rep = call_json("parse", "--ode", FIRST)
    assert code == 0 and (rep["lambda2"], rep["lambda1"], rep["lambda0"]) == ("1/y", "y", "1/2")
    code, rep = call_json("invariants", "--ode", FIRST)
    assert code == 0 and rep["lambda3"] == "1" and rep["lambda6"] == "y"


def test_parameters_and_file_input(tmp_path):
    path = tmp_path / "ode.txt"
    path.write_text("y'' + mu*y*y' + y^k = 0\n")
    code, rep = call_json("check", "--file", str(path), "--param", "mu=1", "--param", "k=3")
    assert code == 0 and rep["case"] == "A1"


def test_verify_first_example(tmp_path):
    csv_path = tmp_path / "mapped.csv"
    code, rep = call_json(
        "verify", "--ode", FIRST, "--init=-4,2,-0.25", "--to", "-0.25", "--h", "1e-3", "--csv", str(csv_path)
    )
    assert code == 0 and rep["ok"] and rep["max_residual"] <= 1e-6
    assert csv_path.read_text().startswith("t,u,up,upp\n")


def test_verify_reports_singularity():
    code, rep = call_json("verify", "--ode", FIRST, "--init=-4,2,-0.25", "--to", "1")
    assert code == 5 and rep["error"] == "SingularEncounter"


def test_solve_first_example():
    code, rep = call_json(
        "solve", "--ode", FIRST, "--candidate-F", "y^3", "--candidate-G", "y", "--x0=-4", "--y0", "2", "--to=-1"
    )
    assert code == 0
    xs, ys = rep["table"]["x"], rep["table"]["y"]
    assert max(abs(y - (-x) ** 0.5) for x, y in zip(xs, ys)) <= 1e-6
    assert rep["anchor"]["t0"] == pytest.approx(-16 / 3)


def test_human_output():
    code, out, _ = call("check", "--ode", FIRST)
    assert code == 0 and out.startswith("sundman: Linearizable, case A1")
    assert "seed:" in out


@pytest.mark.parametrize(
    "argv, code",
    [
        (["check", "--ode", "y'' + "], 4),
        (["check", "--ode", "y'' + y'^3 = 0"], 4),
        (["check", "--ode", "y' + y = 0"], 4),
        (["frobnicate"], 3),
        ([], 3),
        (["check"], 3),
        (["check", "--ode", FIRST, "--samples", "0"], 3),
        (["verify", "--ode", FIRST], 3),
        (["verify", "--ode", FIRST, "--init", "1,2"], 3),
        (["transform", "--ode", FIRST, "--candidate-F", "y"], 3),
    ],
)
def test_error_exit_codes(argv, code):
    got, out, err = call(*argv)
    assert got == code and not out and err.startswith("error")
    got, payload = call_json(*argv) if argv else (call("--format", "json")[0], None)
    assert got == code


def test_errors_are_single_line_json():
    code, out, err = call("check", "--ode", "x +", "--format", "json")
    assert code == 4 and err.count("\n") == 1
    assert json.loads(err)["error"] == "syntax"


def test_print_config_and_environment(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("seed = 11\n")
    code, out, _ = call("check", "--print-config", environ={"SUNDMAN_CONFIG": str(path)})
    assert code == 0 and "seed = 11" in out
    code, out, _ = call("--print-config")
    assert "seed = 20100615" in out
    code, rep = call_json("check", "--ode", FIRST, environ={"SUNDMAN_CONFIG": str(path)})
    assert rep["seed"] == 11
    code, rep = call_json("check", "--ode", FIRST, "--seed", "5", environ={"SUNDMAN_CONFIG": str(path)})
    assert rep["seed"] == 5


def test_exit_codes_are_deterministic():
    runs = {call("check", "--ode", t)[0] for t in (NEGATIVE,) * 3}
    assert runs == {1}
    assert call("check", "--ode", FIRST)[1] == call("check", "--ode", FIRST)[1]
