from __future__ import annotations

from typing import cast

from openpyxl import Workbook
from openpyxl.styles import Font, PatternFill
from openpyxl.utils import get_column_letter
from openpyxl.worksheet.worksheet import Worksheet

from ..models.report import SuiteReport
from .report import CSV_FIELDS, report_rows

FAIL_FILL = PatternFill(start_color="FFC7CE", end_color="FFC7CE", fill_type="solid")


def _auto_fit(ws: Worksheet) -> None:
    widths: dict[int, int] = {}
    for row in ws.rows:
        for cell in row:
            value = str(cell.value) if cell.value is not None else ""
            col_idx = int(getattr(cell, "col_idx", getattr(cell, "column", 0)))
            widths[col_idx] = max(widths.get(col_idx, 0), len(value) + 2)
    for col, width in widths.items():
        ws.column_dimensions[get_column_letter(col)].width = min(60, width)


def _header(ws: Worksheet, names: list[str]) -> None:
    ws.append(names)
    for h in ws[1]:
        h.font = Font(bold=True)


def _finish(ws: Worksheet) -> None:
    ws.auto_filter.ref = ws.dimensions
    ws.freeze_panes = "A2"
    _auto_fit(ws)


def build_workbook(report: SuiteReport) -> Workbook:
    wb = Workbook()
    ws_checks = cast(Worksheet, wb.active)
    ws_checks.title = "Checks"
    ws_cex = cast(Worksheet, wb.create_sheet("Counterexamples"))
    ws_probes = cast(Worksheet, wb.create_sheet("Probes"))
    ws_notes = cast(Worksheet, wb.create_sheet("Notes"))

    _header(ws_checks, CSV_FIELDS)
    for row in report_rows(report):
        ws_checks.append([row[k] for k in CSV_FIELDS])
        if row["verdict"] == "fail":
            for cell in ws_checks[ws_checks.max_row]:
                cell.fill = FAIL_FILL
    _finish(ws_checks)

    _header(ws_cex, ["model", "suite", "check", "index", "seed", "margin", "elements"])
    for c in report.checks:
        for cex in c.counterexamples:
            keys = ",".join(cex.elements)
            ws_cex.append([c.model, c.suite, c.name, cex.index, str(cex.seed), cex.margin, keys])
    _finish(ws_cex)

    _header(ws_probes, ["probe", "model", "finding", "value"])
    for p in report.probes:
        for key, value in p.findings.items():
            ws_probes.append([p.name, p.model, key, value])
        for note in p.notes:
            ws_probes.append([p.name, p.model, "note", note])
    _finish(ws_probes)

    _header(ws_notes, ["note"])
    for note in report.notes:
        ws_notes.append([note])
    _finish(ws_notes)

    verdict = "pass" if report.passed else "fail"
    for ws in (ws_checks, ws_cex, ws_probes, ws_notes):
        ws.oddFooter.center.text = f"seed {report.seed} - {verdict}"  # type: ignore[union-attr]
    return wb
