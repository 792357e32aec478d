import json

import pytest

from kmsflow.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    return code, json.loads(out)


def test_range(capsys):
    code, out = run_json(capsys, "range", "--d", "5", "--s", "3")
    assert code == 0 and out["text"] == "[log 2, log 3]"


def test_range_bad(capsys):
    code, _, err = run(capsys, "range", "--d", "5", "--s", "1")
    assert code == 2 and "input error" in err


def test_unknown_flag_is_input_error(capsys):
    assert run(capsys, "range", "--nope")[0] == 2


@pytest.mark.parametrize(
    "argv",
    [
        ("periodic", "--word", "011"),
        ("bernoulli", "--d", "5", "--s", "3", "--beta", "log(5/2)"),
        ("m-p-y", "--d", "2", "--s", "2"),
        ("toeplitz", "--k", "3", "--n", "2"),
        ("aperiodic", "--z", '{"kind": "eventually-periodic", "left": "0", "right": "1"}', "--n", "20"),
        ("extension", "--d", "5", "--s", "3", "--beta", "log(5/2)", "--m", "2", "--n", "3"),
    ],
)
def test_construct_then_verify(capsys, tmp_path, argv):
    code, out, _ = run(capsys, "construct", *argv)
    assert code == 0
    doc = json.loads(out)
    assert doc["checks"]["passed"]
    path = tmp_path / "m.json"
    path.write_text(out)
    code, rep = run_json(capsys, "verify", str(path))
    assert code == 0 and rep["passed"]


def test_verify_failure_exit_code(capsys):
    measure = json.dumps({"kind": "bernoulli", "version": 1, "p": "1/3"})
    params = json.dumps({"d": 5, "s": 3, "beta": {"log_of": "5/2"}})
    code, rep = run_json(capsys, "verify", measure, "--params", params)
    assert code == 1 and not rep["passed"]


def test_classify(capsys):
    datum = json.dumps(
        {"params": {"d": 2, "s": 2, "beta": {"log_of": "3/2"}}, "family": {"kind": "boundary-point", "y": {"kind": "periodic", "word": "1"}}}
    )
    code, out = run_json(capsys, "classify", datum)
    assert code == 0 and out["type"] == "II_1" and out["trace_mass"] == "3/4"


def test_tail_tsv(capsys, tmp_path):
    path = tmp_path / "p.tsv"
    path.write_text("0\t1\t0\n0\t0\t1\n1\t0\t0\n")
    code, out = run_json(capsys, "tail", str(path))
    assert code == 0 and out["tail_dim"] == 3 and out["poisson_dim"] == 1


def test_tail_bad_matrix(capsys):
    assert run(capsys, "tail", '{"rows": [[1, 1]]}')[0] == 2


def test_cocycle_bound(capsys):
    code, out = run_json(capsys, "cocycle", "bound", "--thue-morse", "--window", "256")
    assert code == 0 and out["min"] == "-1/2" and out["max"] == "1/2"


def test_cocycle_values_tsv(capsys):
    code, out, _ = run(capsys, "cocycle", "values", "--thue-morse", "--kmin", "0", "--kmax", "3", "--format", "tsv")
    assert code == 0 and len(out.strip().splitlines()) >= 4


def test_toeplitz(capsys):
    code, out = run_json(capsys, "toeplitz", "--k", "3", "--n", "4")
    assert code == 0 and out["all_ok"]


def test_deterministic_bytes(capsys):
    a = run(capsys, "cocycle", "transfer", "--thue-morse", "--depth", "4", "--seed", "5")[1]
    b = run(capsys, "cocycle", "transfer", "--thue-morse", "--depth", "4", "--seed", "5")[1]
    assert a == b
