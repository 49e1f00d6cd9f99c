import io
import json
import subprocess
import sys

import pytest

from oscreduce.cli import main, parse_k_range


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def json_lines(text):
    return [json.loads(line) for line in text.splitlines()]


def test_k_range_parsing():
    assert parse_k_range("5") == (5,)
    assert parse_k_range("1:5") == (1, 2, 3, 4, 5)
    assert parse_k_range("8:64:8") == (8, 16, 24, 32, 40, 48, 56, 64)
    for bad in ("5:1", "1:5:0", "a", "1:2:3:4"):
        with pytest.raises(ValueError):
            parse_k_range(bad)


def test_dim_examples():
    code, out, _ = run("dim", "--weights", "1,1", "--k", "5")
    assert code == 0 and json_lines(out)[0]["dim"] == 6
    code, out, _ = run("dim", "--weights", "1,2", "--k", "1:50:1")
    rows = json_lines(out)
    assert code == 0 and all(r["schema_version"] == 1 for r in rows)
    assert [r["dim"] for r in rows] == [k // 2 + 1 for k in range(1, 51)]
    assert max(abs(r["residual"]) for r in rows) < 1e-9
    code, out, _ = run("dim", "--weights", "2,4,3", "--k", "1:200:1", "--format", "csv")
    lines = out.splitlines()
    assert lines[0] == "k,dim,model,residual" and len(lines) == 201
    assert max(abs(float(x.split(",")[3])) for x in lines[1:]) < 1e-6


def test_density_examples():
    code, out, err = run("density", "--weights", "1,2", "--symbol", "s(1)", "--f", "x", "--k", "8:64:2", "--fit-order", "1")
    rows = json_lines(out)
    assert code == 0 and "passed" in err
    assert {"k", "dim", "eigenvalues", "sums", "model", "residual"} <= set(rows[0])
    for r in rows:
        assert r["sums"]["x"] == pytest.approx((r["k"] / 2 + 1) ** 2 / r["k"], rel=1e-13)
    code, out, err = run("density", "--weights", "1,1", "--symbol", "s(1)", "--f", "x^2", "--k", "8:64:2")
    assert code == 0 and "decay check" in err and "passed" in err
    code, out_one, _ = run("density", "--weights", "1,2", "--symbol", "s(1)", "--f", "1", "--k", "8:20:2")
    assert [r["sums"]["1"] for r in json_lines(out_one)] == [k // 2 + 1 for k in range(8, 21, 2)]


def test_polytope_examples():
    code, out, _ = run("polytope", "--example", "cp1", "--k", "2")
    assert code == 0 and json_lines(out)[0]["points"] == [["0"], ["1/2"], ["1"]]
    code, out, _ = run("polytope", "--k", "2:4:2")
    rows = json_lines(out)
    assert [r["count"] for r in rows] == [28, 91]
    code, out, _ = run("polytope", "--W", "0,0;1,1;3,0;0,3", "--k", "1", "--format", "csv")
    lines = out.splitlines()
    assert lines[0] == "k,lambda_1/2pi,lambda_2/2pi" and len(lines) == 11 and "1,1,1" in lines


def test_other_commands():
    code, out, _ = run("basis", "--weights", "1,2", "--k", "4")
    row = json_lines(out)[0]
    assert code == 0 and row["indices"] == [[4, 0], [2, 1], [0, 2]]
    code, out, _ = run("op", "--weights", "1,1", "--k", "1", "--symbol", "zb(1)*z(2)")
    row = json_lines(out)[0]
    assert code == 0 and row["entries"] == [[[0.0, 0.0], [0.0, 0.0]], [[1.0, 0.0], [0.0, 0.0]]]
    assert row["normal_order_gap"] == 0.0 and "eigenvalues" not in row
    code, out, _ = run("sectors", "--weights", "1,2")
    rows = json_lines(out)
    assert code == 0 and [r["zeta"] for r in rows] == ["0/1", "1/2"]
    assert rows[1]["I0"] == pytest.approx([0.25, 0.0])
    code, out, _ = run("reduce", "--weights", "1,2", "--k", "8", "--epsilon", "0.3")
    row = json_lines(out)[0]
    assert code == 0 and len(row["d"]) == 5 and 0 < row["outside_mass"] < 1


def test_all_input_errors_reported_together():
    code, out, err = run("density", "--weights", "2,4", "--k", "9:1", "--symbol", "z(1", "--tol", "0", "--format", "xml")
    assert code == 2 and out == ""
    lines = err.splitlines()
    assert len(lines) == 5
    assert any("byte offset 3" in line for line in lines)
    code, _, err = run("dim", "--k", "4")
    assert code == 2 and "--weights is required" in err
    code, _, _ = run("bogus")
    assert code == 2


def test_numerical_failure_exit_code():
    code, _, err = run("density", "--weights", "1,2", "--symbol", "s(1)", "--k", "8:12:2", "--fit-order", "2")
    assert code == 3 and "numerical failure" in err


def test_config_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults for this run\nweights = 1,2\nk = 3:5\nformat = csv\n")
    code, out, _ = run("dim", "--config", str(cfg))
    assert code == 0 and out.splitlines()[0] == "k,dim,model,residual"
    code, out, _ = run("dim", "--config", str(cfg), "--format", "json", "--k", "7")
    assert code == 0 and json_lines(out)[0]["k"] == 7
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = red\n")
    code, _, err = run("dim", "--config", str(bad), "--weights", "1,2", "--k", "3")
    assert code == 2 and "unknown key" in err


def test_output_file_and_determinism(tmp_path):
    target = tmp_path / "out.json"
    args = ["reduce", "--weights", "1,2", "--k", "6:10:2", "--epsilon", "0.3", "--seed", "3"]
    assert run(*args, "--output", str(target))[0] == 0
    first = target.read_bytes()
    assert run(*args, "--output", str(target))[0] == 0
    assert target.read_bytes() == first


def test_verify_subset_and_fault_injection():
    code, out, err = run("verify", "--only", "wick")
    assert code == 0
    names = [r["name"] for r in json_lines(out)]
    assert "criterion 1: Wick vs normal-ordered identity" in names
    code, out, err = run("verify", "--only", "fock", "--inject-fault", "norm")
    assert code == 1
    failed = [r["name"] for r in json_lines(out) if not r["passed"]]
    assert failed == ["fock.exact_norms"]
    assert "failed: fock.exact_norms" in err
    assert run("verify", "--only", "nonsense")[0] == 2


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "oscreduce", "dim", "--weights", "1,1", "--k", "5"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["dim"] == 6
