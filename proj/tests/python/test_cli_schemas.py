import json
import subprocess

import pytest

jsonschema = pytest.importorskip("jsonschema")


def run(cli, *args, expect=0):
    proc = subprocess.run([cli, *args], capture_output=True, text=True)
    assert proc.returncode == expect, proc.stderr
    return proc


def check(doc, schema):
    jsonschema.validate(doc, schema)


@pytest.fixture(scope="module")
def data_csv(cli, tmp_path_factory):
    tmp = tmp_path_factory.mktemp("lear")
    spec = tmp / "spec.json"
    spec.write_text(json.dumps({
        "n_subjects": 120,
        "seed": 3,
        "times": [[1, 2, 3, 4, 5], [2, 3, 4]],
        "beta": [0.5],
        "covariance": {"model": "lear", "sigma2": 1.0, "rho_l": 0.6, "delta": 2.0},
    }))
    out = tmp / "data.csv"
    run(cli, "simulate", "--spec", str(spec), "--out", str(out))
    return str(out)


def test_matrix_schema(cli, schemas):
    for args in (["--rho-l", "0.5", "--delta", "1", "--times", "1,2,4"],
                 ["--model", "arma11", "--tau", "0.4", "--rho-a", "0.7", "--p", "4"]):
        doc = json.loads(run(cli, "build-matrix", "--format", "json", *args).stdout)
        check(doc, schemas["matrix"])


def test_reparam_schema(cli, schemas):
    doc = json.loads(run(cli, "reparam", "--direction", "lear2arma", "--rho-l", "0.6", "--delta", "2",
                         "--range", "2", "--verify").stdout)
    check(doc, schemas["reparam"])
    assert doc["max_matrix_difference"] < 1e-12


def test_special_case_schema(cli, schemas, data_csv):
    doc = json.loads(run(cli, "check-special-case", "--input", data_csv).stdout)
    check(doc, schemas["special_case_report"])
    assert doc["eligible"]


def test_fit_and_compare_schema(cli, schemas, data_csv):
    for param in ("lear", "arma11"):
        doc = json.loads(run(cli, "fit", "--input", data_csv, "--param", param).stdout)
        check(doc, schemas["fit_result"])
    doc = json.loads(run(cli, "compare", "--input", data_csv, "--criterion", "reml").stdout)
    check(doc, schemas["comparison_report"])


def test_error_schema(cli, schemas):
    proc = run(cli, "reparam", "--direction", "arma2lear", "--tau", "1.5", "--rho-a", "0.5", "--range", "2",
               expect=18)
    lines = proc.stdout.strip().splitlines()
    assert len(lines) == 1
    doc = json.loads(lines[0])
    check(doc, schemas["error"])
    assert doc["error"] == "OutsideLearImage"
    assert proc.stderr.startswith("lear: ")
