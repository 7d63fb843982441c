import json
import os

import pytest

from k0calc.cli import main


@pytest.fixture
def group_file(tmp_path):
    def write(data, name="group.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return str(path)

    return write


COMP7 = {"divisible": {"kind": "cofinite", "primes": [7]}, "partial_exponents": {}}
COMP31 = {"divisible": {"kind": "cofinite", "primes": [31]}, "partial_exponents": {}}
COMP3 = {"divisible": {"kind": "cofinite", "primes": [3]}, "partial_exponents": {}}
FIN235 = {"divisible": {"kind": "finite", "primes": [2, 3, 5]}, "partial_exponents": {}}


def test_ring_text_output(group_file, capsys):
    assert main(["ring", "--group", group_file(COMP7)]) == 0
    out = capsys.readouterr().out
    assert "q = 3" in out
    assert "p - 1 = 6" in out
    assert "nontrivial" in out


def test_ring_json_output(group_file, capsys):
    assert main(["ring", "--group", group_file(COMP31), "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["q"] == 15
    assert data["evidence"]["kind"] == "exact-gcd"
    assert data["evidence"]["gcd_trace"] == [[31, 30, 30]]
    assert not data["trivial"]


def test_ring_fermat_note(group_file, capsys):
    assert main(["ring", "--group", group_file(COMP3)]) == 0
    out = capsys.readouterr().out
    assert "q = 1" in out
    assert "trivial" in out
    assert "3 = 2^1 + 1" in out


def test_ring_finite_witnesses(group_file, capsys):
    assert main(["ring", "--group", group_file(FIN235), "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["q"] == 1 and data["trivial"]
    assert data["evidence"]["kind"] == "dirichlet-witnesses"
    assert [3, 11] in data["evidence"]["witnesses"]
    assert any("finitely many" in note for note in data["notes"])


def test_ring_invalid_descriptor_exit_2(group_file, capsys):
    bad = {"divisible": {"kind": "cofinite", "primes": []}}
    assert main(["ring", "--group", group_file(bad)]) == 2
    assert "error" in capsys.readouterr().err


def test_ring_missing_file_exit_2(tmp_path, capsys):
    assert main(["ring", "--group", str(tmp_path / "nope.json")]) == 2


def test_eval_text_outputs(group_file, capsys):
    group = group_file(COMP7)
    for text, want in [
        ("0 < x0 and x0 < 1", "2 + 0*X (mod 3)"),
        ("0 < x0", "0 + 1*X (mod 3)"),
        ("x0 = x0", "1 + 2*X (mod 3)"),
    ]:
        assert main(["eval", "--group", group, text]) == 0
        assert capsys.readouterr().out.strip() == want


def test_eval_trace_and_json(group_file, capsys):
    group = group_file(COMP7)
    assert main(["eval", "--group", group, "div(7, x0)", "--trace"]) == 0
    out = capsys.readouterr().out
    assert "1 + 2*X (mod 3)" in out and "L=7" in out
    assert main(["eval", "--group", group, "div(7, x0)", "--format", "json", "--trace"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["value"] == {"q": 3, "a": 1, "b": 2}
    assert data["trace"]["L"] == 7


def test_eval_text_and_json_agree(group_file, capsys):
    group = group_file(COMP7)
    for text in ["0 < x0", "div(7, x0 + 2)", "0 < 7*x0 and 7*x0 < 1"]:
        assert main(["eval", "--group", group, text]) == 0
        plain = capsys.readouterr().out.strip()
        assert main(["eval", "--group", group, text, "--format", "json"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["text"] == plain
        v = data["value"]
        assert plain == f"{v['a']} + {v['b']}*X (mod {v['q']})"


def test_eval_formula_file(group_file, tmp_path, capsys):
    path = tmp_path / "f.txt"
    path.write_text("0 < 7*x0 and 7*x0 < 1\n")
    assert main(["eval", "--group", group_file(COMP7), "--formula-file", str(path)]) == 0
    assert capsys.readouterr().out.strip() == "1 + 0*X (mod 3)"


def test_eval_parse_error_exit_2(group_file, capsys):
    assert main(["eval", "--group", group_file(COMP7), "exists x0 . x0 > 0"]) == 2
    assert "quantifier" in capsys.readouterr().err


def test_eval_no_formula_exit_2(group_file, capsys):
    assert main(["eval", "--group", group_file(COMP7)]) == 2


def test_eval_resource_cap_exit_3(group_file, capsys):
    code = main(
        ["eval", "--group", group_file(COMP7), "div(7, x0) and div(7, x1)", "--max-tuples", "3"]
    )
    assert code == 3
    assert "residue" in capsys.readouterr().err


def test_check_default_suite(group_file, capsys, tmp_path):
    config = {
        "groups": [COMP7],
        "seed": 5,
        "pair_trials": 5,
        "fact_div_trials": 50,
        "modulus_bound": 20,
    }
    cfg = tmp_path / "suite.json"
    cfg.write_text(json.dumps(config))
    assert main(["check", "--config", str(cfg)]) == 0
    out = capsys.readouterr().out
    assert "additivity" in out and "ok" in out


def test_check_missing_config_exit_2(tmp_path, capsys):
    assert main(["check", "--config", str(tmp_path / "none.json")]) == 2


def test_check_inject_fault_exit_1(group_file, capsys, tmp_path):
    config = {
        "groups": [COMP7],
        "seed": 5,
        "pair_trials": 4,
        "fact_div_trials": 20,
        "modulus_bound": 20,
    }
    cfg = tmp_path / "suite.json"
    cfg.write_text(json.dumps(config))
    assert main(["check", "--config", str(cfg), "--inject-fault"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_witness_examples(capsys):
    assert main(["witness", "7", "3"]) == 0
    out = capsys.readouterr().out
    assert "20 (mod 21)" in out
    assert "Q = 41" in out
    assert main(["witness", "2", "3", "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["prime"] == 5 and data["residue"] == 5 and data["modulus"] == 6


def test_witness_rejects_common_factor(capsys):
    assert main(["witness", "3", "3"]) == 2
    assert "coprime" in capsys.readouterr().err
    assert main(["witness", "7", "4"]) == 2  # even q


def test_witness_bound_exhausted_exit_3(capsys):
    assert main(["witness", "7", "3", "--bound", "30"]) == 3


def test_report_writes_csv_and_figures(group_file, tmp_path, capsys):
    out_dir = str(tmp_path / "report")
    cfg = tmp_path / "suite.json"
    cfg.write_text(
        json.dumps(
            {"seed": 5, "pair_trials": 3, "fact_div_trials": 20, "modulus_bound": 20}
        )
    )
    code = main(
        [
            "report",
            "--group",
            group_file(COMP7),
            "--out",
            out_dir,
            "--formula",
            "0 < x0 and x0 < 1 and x0 < x1 and x1 < 2",
            "--config",
            str(cfg),
        ]
    )
    assert code == 0
    names = set(os.listdir(out_dir))
    assert {"checks.csv", "checks.png", "eval.csv", "cells.png"} <= names
    header, row = open(os.path.join(out_dir, "eval.csv")).read().strip().splitlines()
    assert header.startswith("formula,q,a,b")
    assert "1 + 0*X (mod 3)" in row  # trapezoid class: (-1) * (-1) = 1


def test_report_skips_cells_for_divisibility_formula(group_file, tmp_path):
    out_dir = str(tmp_path / "rep2")
    cfg = tmp_path / "suite.json"
    cfg.write_text(
        json.dumps(
            {"seed": 5, "pair_trials": 2, "fact_div_trials": 10, "modulus_bound": 10}
        )
    )
    code = main(
        [
            "report",
            "--group",
            group_file(COMP7),
            "--out",
            out_dir,
            "--formula",
            "div(7, x0)",
            "--config",
            str(cfg),
        ]
    )
    assert code == 0
    names = set(os.listdir(out_dir))
    assert "eval.csv" in names and "cells.png" not in names
