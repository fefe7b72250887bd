from __future__ import annotations

import csv
from pathlib import Path
from typing import Any

from ..models.report import SuiteReport

CSV_FIELDS = [
    "model",
    "suite",
    "name",
    "kind",
    "samples",
    "min_margin",
    "max_violation",
    "tolerance",
    "verdict",
]


def report_rows(report: SuiteReport) -> list[dict[str, Any]]:
    return [
        {
            "model": c.model,
            "suite": c.suite,
            "name": c.name,
            "kind": c.kind,
            "samples": c.samples,
            "min_margin": c.min_margin,
            "max_violation": c.max_violation,
            "tolerance": c.tolerance,
            "verdict": "pass" if c.passed else "fail",
        }
        for c in report.checks
    ]


def write_json(report: SuiteReport, path: str | Path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(report.model_dump_json(indent=2, exclude_none=True) + "\n", encoding="utf-8")
    return p


def write_csv(report: SuiteReport, path: str | Path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with p.open("w", encoding="utf-8", newline="") as f:
        w = csv.DictWriter(f, fieldnames=CSV_FIELDS)
        w.writeheader()
        w.writerows(report_rows(report))
    return p


def write_report(report: SuiteReport, path: str | Path, fmt: str) -> Path:
    if fmt == "csv":
        return write_csv(report, path)
    if fmt == "xlsx":
        from .excel import build_workbook

        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        build_workbook(report).save(p)
        return p
    return write_json(report, path)
