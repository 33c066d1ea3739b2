from __future__ import annotations

import csv

from mercury.cli import main
from mercury.phasing import compute_phases
from mercury.report import report_rows, write_report
from mercury.verify import verify_parameterized

from conftest import load, model_path


def test_write_report_produces_csv_and_figure(tmp_path):
    text, spec = load("fig5_serializer_final")
    pr = verify_parameterized(text, spec)
    out = write_report(pr, compute_phases(pr.ts), tmp_path)
    names = {p.name for p in out}
    assert names == {"report.csv", "states.png"}
    png = tmp_path / "states.png"
    assert png.stat().st_size > 1000
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_report_rows_carry_verdict(tmp_path):
    text, spec = load("fig1_store")
    pr = verify_parameterized(text, spec)
    rows = dict(report_rows(pr))
    assert rows["mode"] == "parameterized"
    assert rows["phases"] == "2" and rows["cutoff"] == "3"
    assert rows["result"] == "safe"


def test_report_csv_parses(tmp_path, capsys):
    code = main(["report", str(model_path("lock_service")),
                 "-o", str(tmp_path)])
    assert code == 0
    with open(tmp_path / "report.csv", newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["key", "value"]
    assert ["result", "safe"] in rows
