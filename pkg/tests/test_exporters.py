from __future__ import annotations

import csv
import json
from pathlib import Path

from openpyxl import load_workbook

from ncup.exporters.excel import build_workbook
from ncup.exporters.report import CSV_FIELDS, report_rows, write_csv, write_json, write_report
from ncup.models.element import ElementLiteral
from ncup.models.report import (
    CheckReport,
    Counterexample,
    Histogram,
    ProbeReport,
    SuiteReport,
)

SEED = 7


def _check(name: str, violation: float, cex: list[Counterexample] | None = None) -> CheckReport:
    return CheckReport(
        name=name,
        model="group:cyclic:2",
        suite="young",
        kind="inequality",
        tolerance=1e-9,
        samples=3,
        min_margin=-violation,
        max_violation=violation,
        histogram=Histogram(counts=[0] * 12),
        counterexamples=cex or [],
    )


def _report() -> SuiteReport:
    literal = ElementLiteral(algebra="group:cyclic:2", side="plus", data=[(1.0, 0.0), (0.0, 0.0)])
    cex = Counterexample(index=2, seed=99, margin=-0.25, elements={"x": literal})
    return SuiteReport(
        seed=SEED,
        samples=3,
        models=["group:cyclic:2"],
        checks=[_check("young[1,1,1]", 0.0), _check("young[2,2,inf]", 0.25, [cex])],
        probes=[ProbeReport(name="tao", model="group:cyclic:5", findings={"min_sum": 6})],
    )


def test_report_rows() -> None:
    rows = report_rows(_report())
    assert [r["verdict"] for r in rows] == ["pass", "fail"]
    assert list(rows[0]) == CSV_FIELDS


def test_write_json(tmp_path: Path) -> None:
    path = write_json(_report(), tmp_path / "out" / "report.json")
    doc = json.loads(path.read_text(encoding="utf-8"))
    assert doc["passed"] is False
    assert doc["checks"][1]["counterexamples"][0]["elements"]["x"]["side"] == "plus"
    assert "wall_time_s" not in doc


def test_write_csv(tmp_path: Path) -> None:
    path = write_csv(_report(), tmp_path / "report.csv")
    with path.open(encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    assert [r["name"] for r in rows] == ["young[1,1,1]", "young[2,2,inf]"]
    assert rows[1]["verdict"] == "fail"


def test_workbook_layout(tmp_path: Path) -> None:
    wb = build_workbook(_report())
    assert wb.sheetnames == ["Checks", "Counterexamples", "Probes", "Notes"]
    checks = wb["Checks"]
    assert [c.value for c in checks[1]] == CSV_FIELDS
    assert checks["A3"].fill.fill_type == "solid"
    assert checks["A2"].fill.fill_type is None
    assert checks.freeze_panes == "A2"
    assert checks.oddFooter.center.text == f"seed {SEED} - fail"
    cex = wb["Counterexamples"]
    assert cex.max_row == 2
    assert cex["G2"].value == "x"
    assert wb["Probes"]["C2"].value == "min_sum"

    path = write_report(_report(), tmp_path / "report.xlsx", "xlsx")
    assert load_workbook(path)["Notes"].max_row == 1 + len(_report().notes)
