from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from contextus import builtin
from contextus.cli import VERDICTS, Report, main

GOLDEN = Path(__file__).with_name("golden")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture(autouse=True)
def _no_color(monkeypatch):
    monkeypatch.setenv("CONTEXTUS_COLOR", "never")


def test_pentagram_default(capsys):
    code, out, _ = run(capsys, "pentagram")
    assert code == 0
    assert "certificate rows [1, 2, 3, 4, 5]" in out
    assert "  1 = −1\n" in out
    assert out.endswith("verdict: INCONSISTENT\n")


def test_pentagram_all_faces_golden(capsys):
    code, out, _ = run(capsys, "pentagram", "--state-dependent", "--presheaf", "--pspec", "--algebra")
    assert code == 0
    assert "generated algebra dimension 64 ≅ M₈(ℂ)" in out
    assert "functor has no points" in out
    assert out == (GOLDEN / "pentagram_all.txt").read_text(encoding="utf-8")


def test_output_is_deterministic(capsys):
    first = run(capsys, "roots", "--colouring")
    second = run(capsys, "roots", "--colouring")
    assert first == second


@pytest.mark.parametrize("name", ["ghz", "prbox"])
def test_bundled_scenarios(capsys, name):
    code, out, _ = run(capsys, "scenario", name)
    assert code == 0 and out.endswith("verdict: STRONG\n")


def test_scenario_level_only(capsys):
    code, out, _ = run(capsys, "scenario", "ghz", "--level")
    assert code == 0 and "classification" not in out


def test_scenario_file_and_json(capsys, tmp_path):
    path = tmp_path / "coin.json"
    path.write_text(
        json.dumps(
            {
                "observables": ["A", "B"],
                "contexts": [["A", "B"]],
                "model": [{"context": 0, "rows": {"++": "1/2", "--": "1/2"}}],
            }
        )
    )
    code, out, _ = run(capsys, "scenario", str(path), "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["verdict"] == "NONCONTEXTUAL" and doc["no_signalling"] is True


def test_signalling_file_exits_2(capsys, tmp_path):
    path = tmp_path / "signal.json"
    path.write_text(
        json.dumps(
            {
                "observables": ["A", "B", "C"],
                "contexts": [["A", "B"], ["B", "C"]],
                "model": [
                    {"context": 0, "rows": {"++": "1"}},
                    {"context": 1, "rows": {"-+": "1"}},
                ],
            }
        )
    )
    code, out, _ = run(capsys, "scenario", str(path))
    assert code == 2 and out.endswith("verdict: VIOLATION\n")


def test_malformed_file_reports_position(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "observables": [1,\n}')
    code, _, err = run(capsys, "scenario", str(path))
    assert code == 2 and "line 3" in err


def test_missing_file(capsys):
    code, _, err = run(capsys, "scenario", "/nonexistent/x.json")
    assert code == 2 and "error" in err


def test_avn_ghz(capsys):
    code, out, _ = run(capsys, "avn", "--generators", "XXX;XYY;YXY", "--state", "ghz")
    assert code == 0
    assert "AvN triple: yes" in out and "system INCONSISTENT" in out and "model STRONG" in out


def test_avn_noncommuting(capsys):
    code, _, err = run(capsys, "avn", "--generators", "XX;XZ")
    assert code == 2 and "precondition" in err


def test_avn_degenerate(capsys):
    code, out, _ = run(capsys, "avn", "--generators", "III")
    assert code == 0 and "system CONSISTENT" in out


def test_avn_parse_error(capsys):
    code, _, err = run(capsys, "avn", "--generators", "XQX")
    assert code == 2 and "XQX" in err


def test_roots_pipeline(capsys, tmp_path):
    out_path = tmp_path / "roots.txt"
    code, out, _ = run(capsys, "roots", "--complete", "--identify", "--export", str(out_path))
    assert code == 0
    assert "40 rays → 240 roots; diagram: E8" in out
    assert len(out_path.read_text().splitlines()) == 240


def test_roots_colouring(capsys):
    code, out, _ = run(capsys, "roots", "--colouring", "--json")
    doc = json.loads(out)
    assert code == 0 and doc["colouring"] == "INFEASIBLE" and doc["nodes"] > 0


def test_color_modes(capsys, monkeypatch):
    monkeypatch.setenv("CONTEXTUS_COLOR", "always")
    _, out, _ = run(capsys, "pentagram")
    assert "\x1b[32mINCONSISTENT" in out
    monkeypatch.setenv("CONTEXTUS_COLOR", "sometimes")
    code, _, err = run(capsys, "pentagram")
    assert code == 2 and "CONTEXTUS_COLOR" in err


def test_report_rejects_unknown_verdict():
    with pytest.raises(ValueError):
        Report("t", "MAYBE")
    assert "STRONG" in VERDICTS


def test_bundled_data_matches_generator():
    for name, text in builtin.generated().items():
        assert (builtin.DATA_DIR / name).read_text(encoding="utf-8") == text


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "contextus", "pentagram", "--json"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["parity"]["certificate"] == [1, 2, 3, 4, 5]
