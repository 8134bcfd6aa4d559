"""Exit-code and report-artifact tests for the command-line front end."""

import json
import subprocess
import sys

import pytest

from barrierlp.cli import main
from barrierlp.lpsolve import parse_lp_text


def write_problem(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def unit_disc_doc():
    return {
        "schema": 1,
        "variables": ["x"],
        "drift": ["0"],
        "input_matrix": [["1"]],
        "candidates": ["1 - x^2"],
    }


def disjoint_pair_doc():
    doc = unit_disc_doc()
    doc["candidates"] = ["1 - x^2", "x^2 - 4"]
    return doc


def overlapping_pair_doc():
    doc = unit_disc_doc()
    doc["candidates"] = ["1 - x^2", "x^2 - 0.25"]
    return doc


def negative_doc():
    return {
        "schema": 1,
        "variables": ["x"],
        "drift": ["-1"],
        "input_matrix": [["0"]],
        "candidates": ["x"],
    }


def test_verify_positive_exit_zero(tmp_path, capsys):
    path = write_problem(tmp_path, "p.json", unit_disc_doc())
    code = main(["verify", path])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["verdict"] == "Verified"


def test_verify_negative_exit_one(tmp_path):
    path = write_problem(tmp_path, "p.json", negative_doc())
    assert main(["verify", path, "--report", str(tmp_path / "r.json")]) == 1


def test_verify_empty_pair_exit_two(tmp_path, capsys):
    path = write_problem(tmp_path, "p.json", disjoint_pair_doc())
    code = main(["verify", path])
    assert code == 2
    report = json.loads(capsys.readouterr().out)
    assert report["verdict"] == "EmptinessCertified"


def test_verify_multi_exit_zero(tmp_path, capsys):
    path = write_problem(tmp_path, "p.json", overlapping_pair_doc())
    assert main(["verify", path]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["verdict"] == "MultiVerified"


def test_empty_check_exit_codes(tmp_path):
    empty = write_problem(tmp_path, "a.json", disjoint_pair_doc())
    nonempty = write_problem(tmp_path, "b.json", overlapping_pair_doc())
    assert main(["empty-check", empty, "--report", str(tmp_path / "r1.json")]) == 2
    assert main(["empty-check", nonempty, "--report", str(tmp_path / "r2.json")]) == 1


def test_usage_errors_exit_three(tmp_path):
    path = write_problem(tmp_path, "p.json", unit_disc_doc())
    assert main([]) == 3
    assert main(["verify"]) == 3
    assert main(["verify", path, "--bogus-flag"]) == 3
    assert main(["verify", str(tmp_path / "missing.json")]) == 3
    assert main(["bench-satellite", "--L", "0"]) == 3


def test_malformed_problem_exit_three(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["verify", str(bad)]) == 3
    doc = unit_disc_doc()
    del doc["drift"]
    path = write_problem(tmp_path, "p.json", doc)
    assert main(["verify", path]) == 3
    doc = unit_disc_doc()
    doc["candidates"] = ["1 - q^2"]
    path2 = write_problem(tmp_path, "q.json", doc)
    assert main(["verify", path2]) == 3


def test_bad_schedule_flags_exit_three(tmp_path):
    path = write_problem(tmp_path, "p.json", unit_disc_doc())
    assert main(["verify", path, "--deg-s", "2,1"]) == 3
    assert main(["verify", path, "--a-values", "x"]) == 3


def test_export_lp_round_trip(tmp_path):
    path = write_problem(tmp_path, "p.json", unit_disc_doc())
    out = tmp_path / "program.lp"
    assert main(["export-lp", path, "--out", str(out)]) == 0
    text = out.read_text()
    assert "Minimize" in text  # a comment line may precede it
    lp = parse_lp_text(text)
    assert lp.nvars > 0
    assert lp.nrows > 0


def test_export_lp_emptiness(tmp_path, capsys):
    path = write_problem(tmp_path, "p.json", disjoint_pair_doc())
    assert main(["export-lp", path, "--emptiness"]) == 0
    text = capsys.readouterr().out
    lp = parse_lp_text(text)
    assert lp.nvars > 0


def test_export_lp_bad_candidate_index(tmp_path):
    path = write_problem(tmp_path, "p.json", unit_disc_doc())
    assert main(["export-lp", path, "--candidate", "5"]) == 3


def test_deterministic_reports_byte_identical(tmp_path):
    path = write_problem(tmp_path, "p.json", overlapping_pair_doc())
    r1, r2 = tmp_path / "r1.json", tmp_path / "r2.json"
    assert main(["verify", path, "--deterministic", "--report", str(r1)]) == 0
    assert main(["verify", path, "--deterministic", "--no-parallel",
                 "--report", str(r2)]) == 0
    assert r1.read_bytes() == r2.read_bytes()


def test_report_dir_environment_variable(tmp_path, monkeypatch):
    monkeypatch.setenv("BARRIERLP_REPORT_DIR", str(tmp_path))
    path = write_problem(tmp_path, "p.json", unit_disc_doc())
    assert main(["verify", path, "--report", "out.json"]) == 0
    assert (tmp_path / "out.json").exists()


def test_text_report_format(tmp_path, capsys):
    path = write_problem(tmp_path, "p.json", unit_disc_doc())
    assert main(["verify", path, "--format", "text"]) == 0
    out = capsys.readouterr().out
    assert "verdict: Verified" in out


def test_bench_satellite_table_and_report(tmp_path, capsys):
    report_path = tmp_path / "bench.json"
    code = main(["bench-satellite", "--L", "2", "--deterministic",
                 "--report", str(report_path)])
    assert code == 0
    out = capsys.readouterr().out
    lines = [ln for ln in out.splitlines() if ln.strip()]
    assert lines[0].split() == ["L", "verdict", "seconds"]
    assert len(lines) == 4  # header, rule, two rows
    assert "Verified" in lines[2]
    assert "MultiVerified" in lines[3]
    report = json.loads(report_path.read_text())
    assert [row["L"] for row in report["rows"]] == [1, 2]
    assert all(row["seconds"] == 0.0 for row in report["rows"])


def test_bench_flag_overrides(capsys):
    code = main(["bench-satellite", "--L", "1", "--mass", "3.0",
                 "--thrust", "0.75", "--deterministic"])
    assert code == 0
    out = capsys.readouterr().out
    assert "Verified" in out


def test_module_entry_point(tmp_path):
    path = write_problem(tmp_path, "p.json", unit_disc_doc())
    proc = subprocess.run(
        [sys.executable, "-m", "barrierlp.cli", "verify", path],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["verdict"] == "Verified"
