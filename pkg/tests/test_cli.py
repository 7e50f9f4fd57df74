import csv
import io
import json

import numpy as np
import pytest

from hypersolve.cli import main
from hypersolve.polynomials import PolynomialSpec
from hypersolve.problems import HyperbolicProgram, fixtures, save


@pytest.fixture
def files(tmp_path):
    out = {}
    for name, hp in fixtures().items():
        out[name] = tmp_path / f"{name}.json"
        save(hp, out[name])
    bad = HyperbolicProgram([[1.0, 1.0]], [1.0], [1.0, 0.0],
                            PolynomialSpec("sparse-monomial", terms=((1.0, (2, 0)), (1.0, (0, 2))),
                                           direction=(1.0, 0.0)),
                            [0.5, 0.5])
    out["nonhyperbolic"] = tmp_path / "nonhyperbolic.json"
    save(bad, out["nonhyperbolic"])
    out["malformed"] = tmp_path / "malformed.json"
    out["malformed"].write_text('{"format": 1,\n  "A": [[1, 1]\n')
    return out


def test_solve_lp(files, capsys):
    assert main(["solve", str(files["lp"])]) == 0
    out = capsys.readouterr()
    report = json.loads(out.out)
    assert report["status"] == "converged"
    assert report["objective"] <= 1e-5
    assert report["audit"]["passed"]
    assert len(report["trace"]) == report["iterations"]
    assert out.err == ""


def test_solve_budget_exhausted(files, tmp_path, capsys):
    trace = tmp_path / "trace.csv"
    code = main(["solve", str(files["lp"]), "--delta", "1e-30", "--max-iters", "5",
                 "--trace", "csv", "--trace-file", str(trace)])
    assert code == 2
    rows = list(csv.DictReader(io.StringIO(trace.read_text())))
    assert len(rows) == 5
    assert json.loads(capsys.readouterr().out)["status"] == "max-iterations"


def test_solve_output_file_keeps_stdout_clean(files, tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("HYPERSOLVE_LOG", "DEBUG")
    dest = tmp_path / "report.json"
    assert main(["solve", str(files["socp"]), "--trace", "none", "-o", str(dest)]) == 0
    out = capsys.readouterr()
    assert out.out == ""
    assert "objective" not in out.err
    assert "trace" not in json.loads(dest.read_text())


def test_jsonl_trace(files, tmp_path):
    trace = tmp_path / "t.jsonl"
    main(["solve", str(files["sdp2"]), "--trace", "jsonl", "--trace-file", str(trace), "-o", str(tmp_path / "r")])
    rows = [json.loads(line) for line in trace.read_text().splitlines()]
    assert rows and {"iteration", "gap", "t_step", "oracle_calls", "wall_time"} <= set(rows[0])


def test_malformed_json(files, capsys):
    assert main(["solve", str(files["malformed"])]) == 1
    err = capsys.readouterr().err
    assert "malformed.json:3:" in err


def test_bad_option_rejected_before_work(files, capsys):
    assert main(["solve", str(files["lp"]), "--alpha", "1.5"]) == 1
    assert main(["solve", str(files["lp"]), "--trace", "xml"]) == 1
    assert capsys.readouterr().out == ""


def test_missing_file(capsys):
    assert main(["solve", "/nonexistent/problem.json"]) == 1


def test_check(files, capsys):
    for name in ("lp", "sdp2", "socp"):
        assert main(["check", str(files[name]), "--points", "5"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["passed"]
    assert main(["check", str(files["nonhyperbolic"])]) == 3
    report = json.loads(capsys.readouterr().out)
    assert report["checks"][0]["name"] == "hyperbolicity_probe" and not report["checks"][0]["passed"]


def test_eigs(files, capsys):
    assert main(["eigs", str(files["socp"]), "--point", "3,4,10"]) == 0
    out = json.loads(capsys.readouterr().out)
    np.testing.assert_allclose(out["eigenvalues"], [15, 5])
    np.testing.assert_allclose(out["moments"], [20, 250, 3500, 51250])
    assert main(["eigs", str(files["socp"]), "--point", "1,2"]) == 1


def test_qp(files, capsys):
    assert main(["qp", str(files["lp"])]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["objective"] < 1.0
    assert max(v for k, v in out["residuals"].items() if k != "cone_side") < 1e-10


def test_bench_deterministic(tmp_path, capsys):
    args = ["bench", "--degrees", "4,6", "--repetitions", "2", "--seed", "3", "--no-timing"]
    assert main(args) == 0
    first = capsys.readouterr().out
    assert main(args) == 0
    assert capsys.readouterr().out == first
    rows = list(csv.DictReader(io.StringIO(first)))
    assert len(rows) == 4
    assert all(r["status"] == "converged" and r["wall_time"] == "" for r in rows)
