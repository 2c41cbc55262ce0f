from __future__ import annotations

import json
import subprocess
import sys

import pytest

from bvjet.cli import main


@pytest.mark.parametrize("argv, code", [
    (["bracket", "p*q*q_xx", "p_xx*cos(q)"], 0),
    (["bracket", "q", "p", "--expect", "1"], 0),
    (["bracket", "q", "p", "--expect", "2"], 1),
    (["bracket", "--mode", "functional", "p*q*q_xx", "p_xx*cos(q)"], 0),
    (["laplacian", "p*q*q_xx", "--expect", "0"], 0),
    (["laplacian", "p*q*q_xx", "--form", "partial", "--expect", "q_xx"], 0),
    (["laplacian", "--mode", "functional", "p*q | p_x*q_x", "--expect", "0"], 1),
    (["verify", "counterexample"], 0),
    (["verify", "excounter2"], 0),
    (["yangmills", "--algebra", "su2", "--dim", "2"], 0),
    (["yangmills", "--algebra", "solvable2", "--dim", "2"], 1),
    (["qme", "--order", "2", "--dim", "2"], 0),
    (["qme", "--fields", "q parity 0; p antifield_of q; c parity 1; b antifield_of c", "p*c_x"], 0),
    (["qme", "--fields", "q parity 0; p antifield_of q; c parity 1; b antifield_of c", "p*c_x + q^2*b"], 1),
    # usage and input errors
    ([], 2),
    (["frobnicate"], 2),
    (["bracket", "q"], 2),
    (["bracket", "q*", "p"], 2),
    (["bracket", "q", "r"], 2),
    (["laplacian", "--fields", "q parity 0", "q"], 2),
    (["laplacian", "--mode", "sideways", "q"], 2),
    (["yangmills", "--algebra", "no-such-algebra"], 2),
    (["verify", "nonsense"], 2),
    (["bracket", "--input", "/no/such/file"], 2),
])
def test_exit_codes(argv, code, capsys):
    assert main(argv) == code


def test_verify_with_empty_fields_skips_everything(tmp_path, capsys):
    out = tmp_path / "report.json"
    assert main(["verify", "all", "--fields", "", "--json", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["command"] == "verify"
    assert {c["verdict"] for c in report["checks"]} == {"skipped"}
    assert len(report["checks"]) > 20


def test_json_report_shape(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["yangmills", "--dim", "2", "--json", str(out)]) == 0
    report = json.loads(out.read_text())
    assert set(report) == {"command", "checks", "elapsed_ms"}
    assert report["command"] == "yangmills"
    for check in report["checks"]:
        assert set(check) == {"name", "anchor", "verdict", "detail"}
        assert check["verdict"] == "pass"
    assert report["elapsed_ms"] >= 0


def test_unwritable_json_path_is_an_input_error(tmp_path, capsys):
    assert main(["bracket", "q", "p", "--json", str(tmp_path / "missing" / "r.json")]) == 2


def test_seed_changes_samples_but_not_verdicts(monkeypatch, tmp_path, capsys):
    reports = []
    for seed in ("1", "2"):
        monkeypatch.setenv("BVJET_SEED", seed)
        out = tmp_path / f"{seed}.json"
        assert main(["verify", "laplacian", "--cases", "4", "--json", str(out)]) == 0
        reports.append(json.loads(out.read_text()))
    assert all(c["verdict"] == "pass" for r in reports for c in r["checks"])


def test_bad_seed_is_rejected(monkeypatch, capsys):
    monkeypatch.setenv("BVJET_SEED", "abc")
    assert main(["verify", "schouten", "--cases", "1"]) == 2
    assert "BVJET_SEED" in capsys.readouterr().err


def test_verify_with_custom_fields(capsys):
    fields = "u parity 0; us antifield_of u; g parity 1; gs antifield_of g"
    assert main(["verify", "laplacian", "--cases", "5", "--fields", fields]) == 0


def test_input_file_with_headers(tmp_path, capsys):
    src = tmp_path / "pair.txt"
    src.write_text("fields: q parity 0; p antifield_of q\ndim: 1\n# F then G\np*q*q_xx\np_xx*cos(q)\n")
    assert main(["bracket", "--input", str(src)]) == 0
    printed = capsys.readouterr().out
    assert printed.startswith("-int[")


def test_input_errors_name_the_line(tmp_path, capsys):
    src = tmp_path / "bad.txt"
    src.write_text("p*q\n\nq*(p\n")
    assert main(["laplacian", "--input", str(src)]) == 2
    assert "line 3" in capsys.readouterr().err


def test_printed_output_for_counterexample(capsys):
    assert main(["laplacian", "p*q*q_xx"]) == 0
    assert capsys.readouterr().out.strip() == "2*int[q_xx]"


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "bvjet", "bracket", "q", "p"], capture_output=True, text=True)
    assert r.returncode == 0
    assert r.stdout.strip() == "int[1]"
