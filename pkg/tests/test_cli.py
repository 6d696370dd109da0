import csv
import io
import json
import math
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from jacobi_ncft import cli


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture(scope="module")
def validator():
    schema = cli.load_schema()
    jsonschema.Draft202012Validator.check_schema(schema)
    return jsonschema.Draft202012Validator(schema)


CASES = [
    ("spectrum", "--N", "4"),
    ("eigvecs", "--N", "6", "--mu-sq", "2"),
    ("propagator", "--m", "3", "--l", "5", "--K", "64"),
    ("measure", "--family", "chebyshev-u", "--K", "8"),
    ("measure", "--family", "kinetic", "--interval", "-4", "0"),
    ("vacuum", "--omega-sq", "0.1", "--kappa", "-1", "--N", "12"),
    ("vacuum", "--omega-sq", "1/3", "--kappa", "-4/3"),
    ("vacuum", "--omega-sq", "0.6", "--kappa", "-1"),
    ("tadpole", "--N", "10", "--k", "3"),
    ("triple-check", "--N", "6", "--seed", "3"),
]


@pytest.mark.parametrize("argv", CASES, ids=lambda a: " ".join(a))
def test_commands_exit_zero_and_validate(argv, validator):
    code, out, err = call(*argv)
    assert code == 0, err
    doc = json.loads(out)
    validator.validate(doc)
    assert doc["command"] == argv[0]
    assert set(doc["residuals"]) <= set(doc["paper_refs"])
    assert all(v >= 0 for v in doc["residuals"].values())


def test_spectrum_example(oracles):
    code, out, _ = call("spectrum", "--mu-sq", "1", "--N", "4", "--output", "json")
    assert code == 0
    ev = json.loads(out)["results"]["eigenvalues"]
    assert len(ev) == 4
    exact = [2 * (1 - math.cos((k + 1) * math.pi / 5)) for k in range(4)]
    assert np.allclose(ev, exact, atol=1e-14, rtol=0)


def test_units_mu_sq_echoed():
    _, out, _ = call("spectrum", "--mu-sq", "2.5", "--N", "3")
    doc = json.loads(out)
    assert doc["params"]["mu_sq"] == 2.5
    assert np.allclose(doc["results"]["eigenvalues"][0], 2.5 * 2 * (1 - math.cos(math.pi / 4)))


def test_propagator_example():
    code, out, _ = call("propagator", "--m", "0", "--l", "0", "--mu-sq", "1")
    assert code == 0
    assert abs(json.loads(out)["results"]["P"] - 1.0) <= 1e-8


def test_vacuum_critical_constant():
    _, out, _ = call("vacuum", "--omega-sq", "1/3", "--kappa", "-3", "--N", "5")
    res = json.loads(out)["results"]
    assert res["regime"] == "critical"
    assert res["a"] == [1.5] * 5


def test_tadpole_value():
    _, out, _ = call("tadpole", "--N", "5", "--k", "2")
    res = json.loads(out)["results"]
    assert res["coefficient"] == 19.0
    assert res["sigma"]["re"] == 0.0
    assert res["sigma"]["im"] == pytest.approx(2 / 3 * math.sqrt(3))


def test_verify_all_example(validator):
    code, out, err = call("verify-all", "--N", "64", "--tol", "1e-8", "--seed", "7")
    assert code == 0, err
    doc = json.loads(out)
    validator.validate(doc)
    assert all(doc["results"]["passed"].values())
    assert doc["results"]["n_checks"] >= 25


@pytest.mark.parametrize("argv", [("verify-all", "--N", "12", "--seed", "5"),
                                  ("triple-check", "--N", "9", "--seed", "1"),
                                  ("measure", "--output", "csv")])
def test_byte_identical(argv):
    a = call(*argv)
    b = call(*argv)
    assert a == b


def test_seed_changes_random_checks():
    _, a, _ = call("triple-check", "--N", "9", "--seed", "1")
    _, b, _ = call("triple-check", "--N", "9", "--seed", "2")
    assert json.loads(a)["results"]["hs_min_slack"] != json.loads(b)["results"]["hs_min_slack"]


def test_csv_output_rfc4180():
    code, out, _ = call("spectrum", "--N", "5", "--output", "csv")
    assert code == 0
    assert out.endswith("\r\n")
    rows = list(csv.DictReader(io.StringIO(out, newline="")))
    assert len(rows) == 5
    assert list(rows[0]) == ["k", "closed_form", "sturm"]
    assert float(rows[4]["closed_form"]) == pytest.approx(2 * (1 - math.cos(5 * math.pi / 6)))


def test_csv_quotes_embedded_commas():
    buf = io.StringIO()
    cli._write_csv([{"x": [1, 2], "y": 'say "hi"'}], buf)
    rows = list(csv.reader(io.StringIO(buf.getvalue(), newline="")))
    assert rows == [["x", "y"], ["[1, 2]", 'say "hi"']]
    assert '"[1, 2]"' in buf.getvalue()


@pytest.mark.parametrize("argv", [
    ("spectrum", "--tol", "0"),
    ("spectrum", "--tol", "-1"),
    ("spectrum", "--N", "0"),
    ("spectrum", "--mu-sq", "-1"),
    ("measure", "--nu", "0"),
    ("measure", "--interval", "1", "0"),
    ("vacuum", "--omega-sq", "0.1", "--kappa", "1"),
    ("vacuum", "--omega-sq", "2", "--kappa", "-1"),
    ("tadpole", "--N", "3", "--k", "5"),
    ("propagator", "--m", "2", "--l", "7", "--K", "2"),
    ("spectrum", "--N", "abc"),
    ("bogus",),
])
def test_invalid_config_exit_2(argv):
    code, out, err = call(*argv)
    assert code == 2
    assert out == ""
    assert err


def test_invariant_failure_exit_1():
    code, out, err = call("eigvecs", "--N", "16", "--tol", "1e-300")
    assert code == 1
    assert "invariant violated: gram_deviation" in err
    assert "sqrt(2/(N+1))" in err
    json.loads(out)


def test_quadrature_failure_exit_1(monkeypatch):
    from jacobi_ncft import ncft_gauge as ng
    monkeypatch.setattr(ng, "_propagator_midpoint", lambda mu, m, l, K: float(K))
    code, out, err = call("propagator", "--m", "1", "--l", "1", "--K", "4")
    assert code == 1 and out == ""
    assert "invariant violated" in err


def test_verify_all_fails_with_tiny_tol():
    code, _, err = call("verify-all", "--N", "8", "--tol", "1e-300")
    assert code == 1
    assert err.count("invariant violated") >= 1


def test_env_tolerance(monkeypatch):
    monkeypatch.setenv(cli.TOL_ENV, "1e-5")
    _, out, _ = call("spectrum", "--N", "3")
    assert json.loads(out)["params"]["tol"] == 1e-5
    _, out, _ = call("spectrum", "--N", "3", "--tol", "1e-9")
    assert json.loads(out)["params"]["tol"] == 1e-9
    monkeypatch.setenv(cli.TOL_ENV, "nope")
    assert call("spectrum")[0] == 2
    monkeypatch.setenv(cli.TOL_ENV, "-1")
    assert call("spectrum")[0] == 2


def test_default_tol(monkeypatch):
    monkeypatch.delenv(cli.TOL_ENV, raising=False)
    _, out, _ = call("spectrum", "--N", "2")
    assert json.loads(out)["params"]["tol"] == cli.DEFAULT_TOL


def test_schema_rejects_extra_keys(validator):
    _, out, _ = call("spectrum", "--N", "2")
    doc = json.loads(out)
    doc["extra"] = 1
    with pytest.raises(jsonschema.ValidationError):
        validator.validate(doc)
    del doc["extra"]
    doc["residuals"]["x"] = -1.0
    with pytest.raises(jsonschema.ValidationError):
        validator.validate(doc)


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "jacobi_ncft.cli", "propagator", "--m", "1", "--l", "4"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"]["P"] == pytest.approx(2.0, rel=1e-12)
