import csv
import io
import json
import random

import pytest

from getzler import serialize as ser
from getzler.calculus import random_curvature
from getzler.cli import EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, main
from getzler.convolution import random_torus_section


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_ahat_is_deterministic(capsys):
    code1, out1, _ = run(["ahat", "--seed", "4"], capsys)
    code2, out2, _ = run(["ahat", "--seed", "4"], capsys)
    assert code1 == code2 == EXIT_OK and out1 == out2
    doc = json.loads(out1)
    assert doc["grades"]["grade0"] == 1 and "top_coefficient" in doc


def test_ahat_reads_a_curvature_file(tmp_path, capsys):
    kappa = random_curvature(random.Random(2), 4)
    path = tmp_path / "k.json"
    path.write_text(ser.dumps(ser.curvature_to_json(kappa)))
    code, out, _ = run(["ahat", "--curvature", str(path)], capsys)
    assert code == EXIT_OK
    from getzler.supertrace import a_hat
    assert ser.multivector_from_json(json.loads(out)["a_hat"]) == a_hat(kappa)


@pytest.mark.parametrize("argv", [
    ["heat", "--n", "3"],
    ["heat", "--tau", "0.5,-1"],
    ["verify", "--n", "5"],
    ["verify", "--grid", "48"],
    ["ahat", "--jet-order", "1"],
])
def test_usage_errors_exit_2(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == EXIT_USAGE and "getzler" in err


def test_argparse_errors_exit_2(capsys):
    assert run(["nonsense"], capsys)[0] == EXIT_USAGE
    assert run(["verify", "--inject-fault", "other"], capsys)[0] == EXIT_USAGE


def test_bad_input_files_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run(["ahat", "--curvature", str(bad)], capsys)
    assert code == EXIT_USAGE and "malformed" in err
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"n": 2, "entries": "oops"}))
    code, _, err = run(["ahat", "--curvature", str(wrong)], capsys)
    assert code == EXIT_USAGE and "$" in err
    code, _, _ = run(["ahat", "--curvature", str(tmp_path / "missing.json")], capsys)
    assert code == EXIT_USAGE


def test_heat_table(capsys):
    code, out, _ = run(["heat", "--tau", "1/4,1/2,1", "--seed", "3"], capsys)
    doc = json.loads(out)
    assert code == EXIT_OK and doc["consistent"] and len(doc["table"]) == 3


def test_supertrace_csv(capsys):
    code, out, _ = run(["supertrace", "--n", "2", "--format", "csv", "--lambda", "1,0.1,0"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK
    assert [r["lambda"] for r in rows] == ["1.0", "0.1", "0.0"]


def test_supertrace_rejects_uncertified_input(tmp_path, capsys):
    doc = {"n": 2, "terms": [], "fourier": [
        {"p": -1, "a": [0, 0], "b": [0, 0], "coef": {"n": 2, "terms": [{"blades": [1, 2], "re": 1}]}}]}
    path = tmp_path / "s.json"
    path.write_text(json.dumps(doc))
    section = ser.torus_section_from_json(doc)
    assert not section.certified
    code, out, _ = run(["supertrace", "--section", str(path)], capsys)
    assert code == EXIT_VIOLATION and json.loads(out)["error"] == "certificate"


def test_compose_writes_kernel(tmp_path, capsys):
    blob = tmp_path / "k.bin"
    code, out, _ = run(["compose", "--grid", "8", "--lambda", "0.5", "--kernel-out", str(blob)], capsys)
    doc = json.loads(out)
    assert code == EXIT_OK and doc["relative_error"] < 1e-10
    assert ser.kernel_from_bytes(blob.read_bytes()).G == 8


def test_convolve_backends_agree(capsys):
    _, out_g, _ = run(["convolve", "--seed", "1"], capsys)
    _, out_n, _ = run(["convolve", "--seed", "1", "--backend", "grid", "--grid", "64"], capsys)
    gauss = json.loads(out_g)["probes"]
    grid = json.loads(out_n)["probes"]
    for a, b in zip(gauss, grid):
        assert a["X"] == b["X"]
        diff = ser.multivector_from_json(a["value"]) - ser.multivector_from_json(b["value"])
        assert diff.max_abs() < 1e-3


def test_verify_single_suite_and_output_file(tmp_path, capsys):
    target = tmp_path / "report.json"
    code, out, _ = run(["verify", "--suite", "gamma", "--suite", "clifford", "--output", str(target)], capsys)
    assert code == EXIT_OK and out == ""
    doc = json.loads(target.read_text())
    assert doc["seed"] == 0 and {r["suite"] for r in doc["results"]} == {"gamma", "clifford"}
    for r in doc["results"]:
        ser.validate({k: v for k, v in r.items() if k != "suite"}, "report")


def test_fault_is_caught_by_the_twisted_suite(capsys):
    code, out, _ = run(["verify", "--suite", "twisted", "--inject-fault", "twist-sign"], capsys)
    assert code == EXIT_VIOLATION
    failed = {r["identity"] for r in json.loads(out)["results"] if not r["passed"]}
    assert "associativity across twisted and multiplicative products" in failed
