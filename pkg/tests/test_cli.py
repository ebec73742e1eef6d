from __future__ import annotations

import json
import subprocess
import sys

import pytest

from trustcat.catalog import catalog_to_json
from trustcat.cli import main

from .conftest import CORPUS, GOLDEN_DOC

DATA = ["--data", f"predictions={CORPUS / 'data' / 'credit-predictions.csv'}",
        "--data", f"limits={CORPUS / 'data' / 'credit-limits.csv'}"]


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_catalog_validate_ok(capsys):
    code, out, err = run(capsys, "catalog", "validate")
    assert code == 0 and out == ""
    assert "242 items, 0 defect(s)" in err


def test_catalog_validate_defects(capsys, tmp_path, catalog):
    data = catalog_to_json(catalog)
    data["dimensions"][3]["protection"]["levels"] = ["low", "medium", "high"]
    p = tmp_path / "c.json"
    p.write_text(json.dumps(data))
    code, out, _ = run(capsys, "catalog", "validate", p)
    assert code == 1 and "ProtectionLevels" in out


def test_catalog_validate_bad_json(capsys, tmp_path):
    p = tmp_path / "c.json"
    p.write_text("{")
    code, out, err = run(capsys, "catalog", "validate", p)
    assert code == 3 and out == "" and err.startswith("trustcat: ")


def test_catalog_show(capsys):
    code, out, _ = run(capsys, "catalog", "show", "s-r-fs-me-12")
    assert code == 0
    assert out.startswith("[S-R-FS-ME-12] Option for human intervention")


@pytest.mark.parametrize("ident", ["FN-R-FN-ME-99", "XX-P"])
def test_catalog_show_unknown(capsys, ident):
    code, out, err = run(capsys, "catalog", "show", ident)
    assert code == 3 and out == "" and err


def test_init_and_lint_round_trip(capsys, tmp_path):
    p = tmp_path / "doc.json"
    code, out, _ = run(capsys, "assess", "init", "--levels", "FN=high,AC=medium,TR=low,RE=medium,S=low,DP=low",
                       "--name", "demo", "-o", p)
    assert code == 0 and out == ""
    doc = json.loads(p.read_text())
    assert doc["meta"]["name"] == "demo"
    code, out, err = run(capsys, "assess", "lint", p)
    assert code == 0 and "StubEmpty" in out and "0 error(s)" in err
    code, out, _ = run(capsys, "assess", "verdict", p)
    assert code == 1 and out.startswith("NotAssessable")


@pytest.mark.parametrize("levels", ["FN=high", "FN=high,AC=high,TR=high,RE=low,S=high,DP=high",
                                    "FN=extreme,AC=high,TR=high,RE=high,S=high,DP=high", "QQ=high"])
def test_init_bad_levels(capsys, levels):
    code, out, _ = run(capsys, "assess", "init", "--levels", levels)
    assert code == 3 and out == ""


def test_lint_golden(capsys):
    code, out, err = run(capsys, "assess", "lint", GOLDEN_DOC)
    assert (code, out) == (0, "")
    assert "0 error(s), 0 warning(s)" in err


def test_lint_json_format(capsys):
    code, out, _ = run(capsys, "assess", "lint", CORPUS / "mutations" / "01-required-measure-missing.assessment.json",
                       "--format", "json")
    assert code == 1
    assert json.loads(out) == [{"rule": "RequiredItemMissing", "severity": "error", "item": "FN-R-FN-ME-05",
                                "message": json.loads(out)[0]["message"]}]


def test_lint_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "assess", "lint", tmp_path / "none.json")
    assert code == 3 and "No such file" in err


def test_metrics_reproduces_golden(capsys, tmp_path):
    out_path = tmp_path / "doc.json"
    code, out, err = run(capsys, "assess", "metrics", GOLDEN_DOC, *DATA, "-o", out_path)
    assert (code, out, err) == (0, "", "")
    assert out_path.read_text() == GOLDEN_DOC.read_text()


def test_metrics_unresolved_dataset(capsys):
    code, out, err = run(capsys, "assess", "metrics", GOLDEN_DOC)
    assert code == 3 and out == "" and "--data" in err


def test_metrics_bad_data_arg(capsys):
    code, _, _ = run(capsys, "assess", "metrics", GOLDEN_DOC, "--data", "nonsense")
    assert code == 3


def test_verdict_exit_codes(capsys):
    code, out, _ = run(capsys, "assess", "verdict", GOLDEN_DOC)
    assert code == 0 and out.startswith("TrustworthyWithResiduals")
    code, out, _ = run(capsys, "assess", "verdict", CORPUS / "mutations" / "11-unacceptable-residual.assessment.json")
    assert code == 2 and out.startswith("NotTrustworthy")
    code, out, err = run(capsys, "assess", "verdict", CORPUS / "mutations" / "01-required-measure-missing.assessment.json")
    assert code == 1 and out == "" and "RequiredItemMissing" in err


def test_verdict_json(capsys):
    code, out, _ = run(capsys, "assess", "verdict", GOLDEN_DOC, "--format", "json")
    assert code == 0 and json.loads(out)["outcome"] == "TrustworthyWithResiduals"


def test_report_stdout_matches_golden():
    r = subprocess.run([sys.executable, "-m", "trustcat", "assess", "report", str(GOLDEN_DOC)],
                       capture_output=True)
    assert (r.returncode, r.stderr) == (0, b"")
    assert r.stdout == (CORPUS / "golden" / "credit-scoring.report.md").read_bytes()


def test_report_to_file(capsys, tmp_path):
    for fmt, name in (("md", "credit-scoring.report.md"), ("json", "credit-scoring.report.json")):
        p = tmp_path / name
        code, out, _ = run(capsys, "assess", "report", GOLDEN_DOC, "--format", fmt, "-o", p)
        assert code == 0 and out == ""
        assert p.read_bytes() == (CORPUS / "golden" / name).read_bytes()


def test_report_bad_date(capsys):
    code, out, err = run(capsys, "assess", "report", GOLDEN_DOC, "--date", "yesterday")
    assert code == 3 and out == "" and "--date" in err


def test_report_for_document_with_errors(capsys, tmp_path):
    p = tmp_path / "r.json"
    code, _, _ = run(capsys, "assess", "report", CORPUS / "mutations" / "01-required-measure-missing.assessment.json",
                     "--format", "json", "-o", p)
    assert code == 0
    assert json.loads(p.read_text())["verdict"] is None


@pytest.mark.parametrize("argv", [[], ["assess"], ["assess", "lint"], ["nonsense"],
                                  ["assess", "report", "x", "--format", "html"]])
def test_usage_errors_exit_3(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 3 and err


def test_help_exits_0(capsys):
    code, out, _ = run(capsys, "--help")
    assert code == 0 and "catalog" in out


def test_env_catalog_override(capsys, monkeypatch, tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("[]")
    monkeypatch.setenv("TRUSTCAT_CATALOG", str(p))
    code, _, err = run(capsys, "assess", "lint", GOLDEN_DOC)
    assert code == 3 and err


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "trustcat", "assess", "verdict", str(GOLDEN_DOC)],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert r.stdout.startswith("TrustworthyWithResiduals")
