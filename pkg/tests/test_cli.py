import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from zwinf import rules
from zwinf.cli import FAILED, OK, USAGE, main, parse_dims, parse_policy
from zwinf.dsl import print_dsl
from zwinf.qudit import Tensor

GOLDEN = Path(__file__).parent / "golden"


def write(tmp_path, name, diagram):
    p = tmp_path / name
    p.write_text(print_dsl(diagram))
    return str(p)


def test_eval_matches_golden(tmp_path):
    out = tmp_path / "split_d4.json"
    assert main(["eval", str(GOLDEN / "split.zw"), "--d", "4", "--out", str(out)]) == OK
    got = Tensor.from_json(json.loads(out.read_text()))
    want = Tensor.from_json(json.loads((GOLDEN / "split_d4.json").read_text()))
    assert (got.dim, got.in_arity, got.out_arity) == (4, 1, 2)
    assert np.abs(got.matrix - want.matrix).max() <= 1e-12


def test_eval_to_stdout(capsys):
    assert main(["eval", str(GOLDEN / "split.zw"), "--d", "2"]) == OK
    assert json.loads(capsys.readouterr().out)["dim"] == 2


def test_eval_ket_above_dimension_is_usage_error(tmp_path, capsys):
    p = tmp_path / "k.zw"
    p.write_text("diagram 0 -> 1 { layer { ket(3) } }\n")
    assert main(["eval", str(p), "--d", "2"]) == USAGE
    assert "zwinf:" in capsys.readouterr().err


def test_check_eq_policies(tmp_path):
    inst = rules.instantiate("bBA")
    a, b = write(tmp_path, "a.zw", inst.lhs), write(tmp_path, "b.zw", inst.rhs)
    out = tmp_path / "rep.json"
    assert main(["check-eq", a, b, "--d", "4", "--policy", "projector-d", "--out", str(out)]) == OK
    assert json.loads(out.read_text())["verdict"] == "equal"
    assert main(["check-eq", a, b, "--d", "4", "--policy", "bare", "--out", str(out)]) == FAILED
    assert main(["check-eq", a, b, "--d", "4", "--policy", "projector-n:2", "--out", str(out)]) == OK


def test_lift_check(tmp_path, capsys):
    inst = rules.instantiate("bSym")
    a, b = write(tmp_path, "a.zw", inst.lhs), write(tmp_path, "b.zw", inst.rhs)
    assert main(["lift-check", a, b, "--nmax", "3"]) == OK
    assert json.loads(capsys.readouterr().out)["verdict"] == "equal"
    sm = tmp_path / "sm.zw"
    sm.write_text("diagram 1 -> 1 { layer { split } layer { merge } }")
    idf = tmp_path / "id.zw"
    idf.write_text("diagram 1 -> 1 { layer { id } }")
    assert main(["lift-check", str(sm), str(idf), "--nmax", "2"]) == FAILED


def test_certify_rules_is_byte_stable(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["certify-rules", "--dims", "2..6", "--tol", "1e-9", "--out", str(a)]) == OK
    assert main(["certify-rules", "--dims", "2..6", "--tol", "1e-9", "--out", str(b)]) == OK
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["verdict"] == "pass"


def test_certify_selected_rules(tmp_path, capsys):
    assert main(["certify-rules", "--rules", "S1,bBA", "--dims", "2,3"]) == OK
    doc = json.loads(capsys.readouterr().out)
    assert [c["rule"] for c in doc["rules"]] == ["S1", "bBA"]
    assert main(["certify-rules", "--rules", "nope"]) == USAGE


def test_verify_gates(capsys):
    assert main(["verify-gates", "--dims", "3..5"]) == OK
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["certificates"]) == 12 and doc["verdict"] == "pass"


def test_export_dot(tmp_path):
    out = tmp_path / "s.dot"
    assert main(["export-dot", str(GOLDEN / "split.zw"), "--name", "sp", "--out", str(out)]) == OK
    text = out.read_text()
    assert text.startswith("digraph sp") and "L0_0" in text


def test_export_tensor_npy_and_json(tmp_path):
    npy, js = tmp_path / "t.npy", tmp_path / "t.json"
    assert main(["export-tensor", str(GOLDEN / "split.zw"), "--d", "3", "--out", str(npy)]) == OK
    assert main(["export-tensor", str(GOLDEN / "split.zw"), "--d", "3", "--out", str(js)]) == OK
    m = np.load(npy)
    assert m.shape == (9, 3)
    assert np.array_equal(m, Tensor.from_json(json.loads(js.read_text())).matrix)


@pytest.mark.parametrize("argv", [
    [], ["frobnicate"], ["eval", "x.zw"], ["eval", "missing.zw", "--d", "3"],
    ["check-eq", "a", "b", "--d", "3", "--policy", "sometimes"],
    ["certify-rules", "--dims", "1..3"], ["certify-rules", "--dims", "a..b"],
])
def test_usage_errors_exit_2(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as e:
        code = e.code
    assert code == USAGE


def test_malformed_file_reports_position(tmp_path, capsys):
    p = tmp_path / "bad.zw"
    p.write_text("diagram 1 -> 1 {\n  layer { splat }\n}\n")
    assert main(["eval", str(p), "--d", "3"]) == USAGE
    assert "bad.zw:2:11:" in capsys.readouterr().err


def test_d_below_two_rejected():
    assert main(["eval", str(GOLDEN / "split.zw"), "--d", "1"]) == USAGE


def test_flag_parsers():
    assert parse_dims("2..4") == [2, 3, 4] and parse_dims("3,5") == [3, 5]
    assert parse_policy("projector-n:3") == ("projector_n", 3)
    assert parse_policy("bare") == "bare"


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "zwinf", "eval", str(GOLDEN / "split.zw"), "--d", "2"],
                       capture_output=True, text=True, check=False)
    assert r.returncode == 0 and json.loads(r.stdout)["out_arity"] == 2
