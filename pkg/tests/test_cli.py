"""CLI surface: exit codes, output schemas, determinism."""

import json

import pytest

from sqflab import cli_runner
from sqflab.cli_runner import CSV_HEADER, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_error_term_json(capsys):
    code, out, _ = run_cli(capsys, "error-term", "--x", "30", "--q", "5", "--a", "1")
    assert code == 0
    payload = json.loads(out)
    assert payload["error"] == "5/4"
    assert payload["count_ap"] == 5
    assert payload["count_coprime"] == 15
    assert payload["phi"] == 4


def test_error_term_decompose_flag(capsys):
    code, out, _ = run_cli(
        capsys, "error-term", "--x", "1000", "--q", "13", "--a", "4", "--decompose"
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["error_decomposed"] == payload["error"]
    assert payload["identity_ok"] is True


def test_error_term_rejects_nonsquarefree(capsys):
    code, _, err = run_cli(capsys, "error-term", "--x", "30", "--q", "12", "--a", "1")
    assert code == 2
    assert "divisible" in err


def test_error_term_rejects_noncoprime(capsys):
    code, _, err = run_cli(capsys, "error-term", "--x", "30", "--q", "10", "--a", "5")
    assert code == 2
    assert "coprime" in err


def test_identity_violation_is_exit_3(capsys, monkeypatch):
    from fractions import Fraction

    monkeypatch.setattr(cli_runner, "decompose_error", lambda *a, **k: Fraction(1, 7))
    code, _, err = run_cli(
        capsys, "error-term", "--x", "30", "--q", "5", "--a", "1", "--decompose"
    )
    assert code == 3
    assert "internal error" in err


def test_scan_header_and_rows(capsys):
    code, out, _ = run_cli(capsys, "scan", "--x", "1000", "--q-max", "10", "--a", "all")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == CSV_HEADER
    # one row per unit class of each squarefree q <= min(10, x)
    # q: 1,2,3,5,6,7,10 with phi 1,1,2,4,2,6,4 = 20 rows
    assert len(lines) == 1 + 20
    first = lines[1].split(",")
    assert first[:3] == ["1000", "1", "0"]


def test_scan_empty_range(capsys):
    code, out, _ = run_cli(
        capsys, "scan", "--x", "50", "--q-min", "60", "--q-max", "70"
    )
    assert code == 0
    assert out == CSV_HEADER + "\n"


def test_scan_deterministic_and_resumable(capsys):
    args = ["scan", "--x", "500", "--q-max", "30", "--a", "sample:2", "--seed", "9"]
    code1, out1, _ = run_cli(capsys, *args)
    code2, out2, _ = run_cli(capsys, *args)
    assert code1 == code2 == 0
    assert out1 == out2  # byte-identical at fixed seed

    code3, out3, _ = run_cli(capsys, *args, "--start-row", "5")
    body = out1.strip().split("\n")[1:]
    resumed = out3.strip().split("\n")[1:]
    assert resumed == body[5:]


def test_scan_workers_do_not_change_output(capsys):
    args = ["scan", "--x", "300", "--q-max", "40"]
    _, serial, _ = run_cli(capsys, *args, "--workers", "1")
    _, parallel, _ = run_cli(capsys, *args, "--workers", "2")
    assert serial == parallel


def test_scan_bad_range(capsys):
    code, _, err = run_cli(capsys, "scan", "--x", "100", "--q-min", "9", "--q-max", "3")
    assert code == 2
    assert "q range" in err


def test_count_box(capsys):
    code, out, _ = run_cli(
        capsys,
        "count-box",
        "--u", "1", "--v", "-2", "--m", "10", "--n", "10", "--q", "7", "--a", "1",
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["count"] == 15
    assert payload["symmetry"]["equal"] is True
    assert payload["bounds"]["trivial"] == pytest.approx(100 / 7 + 10)


def test_pipeline_report_json(capsys):
    code, out, _ = run_cli(
        capsys, "pipeline", "--x", "10000", "--q", "101", "--a", "3"
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["identity_ok"] is True
    assert payload["majorization_ok"] is True
    assert payload["e_direct"] == payload["e_decomposed"]
    assert payload["boxes"]
    assert set(payload["boxes"][0]) == {
        "m_anchor", "n_anchor", "count", "regime", "bound", "ratio",
        "amplification_applicable",
    }


def test_optimize_default_menu(capsys):
    code, out, _ = run_cli(capsys, "optimize")
    assert code == 0
    payload = json.loads(out)
    assert payload["theta"] == "25/36"
    assert payload["corollary_exponent"] == "36/25"
    assert payload["binding_constraint"] == "box-supremum"
    assert payload["anchor_checks"]["all_passed"] is True


def test_optimize_one_sided_menu(capsys):
    code, out, _ = run_cli(capsys, "optimize", "--menu", "one-sided")
    assert code == 0
    payload = json.loads(out)
    assert payload["theta"] == "28/45"


def test_optimize_menu_file(tmp_path, capsys):
    menu = tmp_path / "menu.txt"
    menu.write_text("solo 1/2 -3/8\n")
    code, out, _ = run_cli(capsys, "optimize", "--menu-file", str(menu))
    assert code == 0
    payload = json.loads(out)
    assert payload["theta"] == "4/5"

    bad = tmp_path / "bad.txt"
    bad.write_text("broken-line 1/2\n")
    code, _, err = run_cli(capsys, "optimize", "--menu-file", str(bad))
    assert code == 2


def test_output_file(tmp_path, capsys):
    target = tmp_path / "out.json"
    code, out, _ = run_cli(
        capsys, "error-term", "--x", "30", "--q", "5", "--a", "1",
        "--output", str(target),
    )
    assert code == 0
    assert out == ""
    assert json.loads(target.read_text())["error"] == "5/4"
