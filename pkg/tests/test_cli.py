import json
from importlib import resources

import pytest

from revc.cli import main


def corpus_path(name: str) -> str:
    return str(resources.files("revc") / "corpus" / name)


def test_compile_writes_circuit_and_stats(tmp_path, capsys):
    out = tmp_path / "adder.tfc"
    stats = tmp_path / "stats.json"
    rc = main(["compile", corpus_path("adder_ripple.rev"), "--param", "n=10",
               "--strategy", "eager", "-o", str(out), "--stats", str(stats)])
    assert rc == 0
    assert out.exists()
    rep = json.loads(stats.read_text())
    assert rep["toffoli_count"] == 34
    assert rep["qubit_count"] == 40
    assert rep["compile_seconds"] >= 0


def test_compile_emit_mdd(tmp_path):
    dot = tmp_path / "g.dot"
    rc = main(["compile", corpus_path("adder_ripple.rev"), "--param", "n=4",
               "-o", str(tmp_path / "a.tfc"), "--emit-mdd", str(dot)])
    assert rc == 0
    assert dot.read_text().startswith("digraph")


def test_sim_adds_integers(capsys):
    rc = main(["sim", corpus_path("adder_ripple.rev"), "--param", "n=4",
               "--inputs", "11001010"])  # a=3, b=5 little-endian
    assert rc == 0
    assert capsys.readouterr().out.strip() == "0001"  # 8


def test_verify_ok(capsys):
    rc = main(["verify", corpus_path("adder_ripple.rev"), "--param", "n=6",
               "--strategy", "eager", "--samples", "50"])
    assert rc == 0
    assert "ok" in capsys.readouterr().out


def test_stats_constant_sha_width(capsys):
    rc = main(["stats", corpus_path("sha2.rev"), "--param", "rounds=2",
               "--strategy", "eager"])
    assert rc == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["qubit_count"] == 353
    assert rep["toffoli_count"] == 2 * 690


def test_empty_file_is_user_error(tmp_path, capsys):
    empty = tmp_path / "empty.rev"
    empty.write_text("")
    rc = main(["compile", str(empty)])
    assert rc == 1
    assert "error" in capsys.readouterr().err


def test_infeasible_budget_is_user_error(capsys):
    rc = main(["compile", corpus_path("adder_ripple.rev"), "--param", "n=10",
               "--strategy", "incremental", "--qubits", "25",
               "-o", "/dev/null"])
    assert rc == 1
    assert "minimum" in capsys.readouterr().err


def test_pebble_reports(capsys):
    rc = main(["pebble", "--time", "10", "--strategy", "bennett"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "19 steps" in out and "peak 10" in out


def test_pebble_table(tmp_path):
    out = tmp_path / "t.csv"
    rc = main(["pebble-table", "--time-max", "5", "--pebbles", "2,3",
               "-o", str(out)])
    assert rc == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "pebbles,gates,min_steps"
    assert len(lines) == 11


def test_blif_batch_report(tmp_path, capsys):
    report = tmp_path / "rows.json"
    rc = main(["blif", corpus_path("example3.blif"), corpus_path("majority.blif"),
               "--optimize-xor", "--report", str(report)])
    assert rc == 0
    rows = json.loads(report.read_text())
    assert len(rows) == 2
    assert all(r["toffoli_optimized"] <= r["toffoli_unoptimized"] for r in rows)


def test_bad_param_is_user_error(capsys):
    rc = main(["compile", corpus_path("adder_ripple.rev"), "--param", "n=ten"])
    assert rc == 1
