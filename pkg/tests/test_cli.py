from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np
import pytest
from openpyxl import load_workbook

from ncup import cli
from ncup.cli import EXIT_CHECK, EXIT_OK, EXIT_USAGE, main, normalize_model_spec
from ncup.models.element import ElementBundle
from ncup.models.report import CheckReport, Histogram, SuiteReport
from ncup.models.suite import DEFAULT_P_GRID, SuiteConfig
from ncup.services.algebra import AlgebraElement
from ncup.services.extremizers import biprojection_from_subgroup
from ncup.services.groups import enumerate_subgroups, subgroup_of
from ncup.services.inequalities import (
    Tolerances,
    donoho_stark,
    hausdorff_young,
    hirschman_beckner,
)
from ncup.services.two_box import (
    TwoBoxPair,
    element_from_literal,
    jones_element,
    jones_projection,
    model_from_spec,
)

QUICK = ["--samples", "4", "--suite", "plancherel", "--suite", "donoho_stark"]


def test_normalize_model_spec() -> None:
    assert normalize_model_spec("group cyclic:4") == "group:cyclic:4"
    assert normalize_model_spec("spin:3") == "spin:3"


def test_verify_prints_json(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["verify", "--model", "group cyclic:4", *QUICK]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["models"] == ["group:cyclic:4"]
    assert report["passed"] is True
    assert {c["suite"] for c in report["checks"]} == {"plancherel", "donoho_stark"}
    assert report["probes"] == []


def test_verify_writes_csv_and_xlsx(tmp_path: Path) -> None:
    out_csv = tmp_path / "report.csv"
    args = ["verify", "--model", "spin:2", *QUICK, "--out", str(out_csv), "--format", "csv"]
    assert main(args) == EXIT_OK
    with out_csv.open(encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    assert rows
    assert {r["verdict"] for r in rows} == {"pass"}
    out_xlsx = tmp_path / "report.xlsx"
    args = ["verify", "--model", "spin:2", *QUICK, "--out", str(out_xlsx), "--format", "xlsx"]
    assert main(args) == EXIT_OK
    assert load_workbook(out_xlsx).sheetnames == ["Checks", "Counterexamples", "Probes", "Notes"]


def test_verify_config_file(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    path = tmp_path / "suite.json"
    path.write_text(
        json.dumps({"models": ["group:cyclic:3"], "samples": 2, "suites": ["young"], "probes": []}),
        encoding="utf-8",
    )
    assert main(["verify", "--config", str(path), "--seed", "11"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["seed"] == 11
    assert report["samples"] == 2


def test_verify_usage_errors() -> None:
    with pytest.raises(SystemExit) as exc:
        main(["verify"])
    assert exc.value.code == EXIT_USAGE
    assert main(["verify", "--model", "torus:3"]) == EXIT_USAGE
    assert main(["verify", "--model", "spin:2", "--samples", "0"]) == EXIT_USAGE


def test_verify_failure_exit_code(
    monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture[str]
) -> None:
    failing = CheckReport(
        name="plancherel",
        model="spin:2",
        suite="plancherel",
        kind="equality",
        tolerance=1e-8,
        samples=1,
        min_margin=0.5,
        max_violation=0.5,
        histogram=Histogram(counts=[0] * 12),
    )

    def fake_run(cfg: SuiteConfig) -> SuiteReport:
        return SuiteReport(seed=cfg.seed, samples=cfg.samples, models=cfg.models, checks=[failing])

    monkeypatch.setattr(cli, "run_suite", fake_run)
    assert main(["verify", "--model", "spin:2"]) == EXIT_CHECK
    assert json.loads(capsys.readouterr().out)["passed"] is False


def test_minimizers(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["minimizers", "--model", "group:cyclic:4"]) == EXIT_OK
    certificates = json.loads(capsys.readouterr().out)
    assert len(certificates) == 12
    assert all(c["consistent"] for c in certificates)
    assert main(["minimizers", "--model", "group:cyclic:4", "--subgroup", "0,2"]) == EXIT_OK
    assert len(json.loads(capsys.readouterr().out)) == 4
    assert main(["minimizers", "--model", "spin:2"]) == EXIT_USAGE


def test_expected_bishift_count() -> None:
    pair = model_from_spec("group:symmetric:3")
    assert pair.group is not None
    assert cli.expected_bishift_count(enumerate_subgroups(pair.group)) == 32


def test_uniqueness(capsys: pytest.CaptureFixture[str]) -> None:
    args = ["uniqueness", "--model", "group:cyclic:4", "--subgroup", "0,2"]
    assert main([*args, "--g", "1", "--chi", "1"]) == EXIT_OK
    (row,) = json.loads(capsys.readouterr().out)
    assert row["dimension"] == 1
    assert row["collinearity"] <= 1e-9
    assert row["basis"]["side"] == "plus"

    assert main(["uniqueness", "--model", "group:cyclic:4", "--all-pairs"]) == EXIT_OK
    assert len(json.loads(capsys.readouterr().out)) == 12


def test_uniqueness_errors() -> None:
    base = ["uniqueness", "--model", "group:cyclic:4", "--subgroup", "0,2"]
    assert main([*base, "--tilde-subgroup", "0,1,2,3"]) == EXIT_CHECK
    assert main([*base, "--chi", "5"]) == EXIT_USAGE
    assert main(["uniqueness", "--model", "group:cyclic:4"]) == EXIT_USAGE
    assert main(["uniqueness", "--model", "group:cyclic:4", "--subgroup", "0,1"]) == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["uniqueness", "--model", "group:cyclic:4", "--subgroup", "a,b"])
    assert exc.value.code == EXIT_USAGE


@pytest.mark.parametrize(("spec", "count"), [("group:cyclic:2", 8), ("spin:2", 8)])
def test_dump(tmp_path: Path, spec: str, count: int) -> None:
    assert main(["dump", "--model", spec, "--out", str(tmp_path)]) == EXIT_OK
    with (tmp_path / "fourier_plus.csv").open(encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["row", "col", "re", "im"]
    pair = model_from_spec(spec)
    assert len(rows) == 1 + pair.plus.n_coords**2
    assert (tmp_path / "fourier_minus.csv").exists()
    with (tmp_path / "fourier_plus_entries.csv").open(encoding="utf-8") as f:
        entries = list(csv.reader(f))
    assert len(entries) == 1 + pair.minus.dim**2 * pair.plus.dim**2
    bundle = ElementBundle.model_validate_json((tmp_path / "elements.json").read_text("utf-8"))
    assert bundle.model == spec
    assert len(bundle.elements) == count
    for lit in bundle.elements.values():
        element_from_literal(pair, lit)


def test_dump_bad_path(tmp_path: Path) -> None:
    blocker = tmp_path / "file"
    blocker.write_text("x", encoding="utf-8")
    assert main(["dump", "--model", "spin:2", "--out", str(blocker / "sub")]) == EXIT_USAGE


def _margins(pair: TwoBoxPair, x: AlgebraElement) -> list[float]:
    tol = Tolerances.from_settings()
    ms = [
        *donoho_stark(pair, x, tol),
        *hirschman_beckner(pair, x, tol),
        *hausdorff_young(pair, x, DEFAULT_P_GRID, tol),
    ]
    return [m.margin for m in ms]


def _dumped_source(pair: TwoBoxPair, name: str) -> AlgebraElement:
    kind, _, rest = name.partition(":")
    if kind.startswith("jones_projection_"):
        return jones_projection(pair, "plus" if kind.endswith("plus") else "minus")
    if kind.startswith("jones_element_"):
        return jones_element(pair, "plus" if kind.endswith("plus") else "minus")
    assert pair.group is not None
    b = biprojection_from_subgroup(pair, subgroup_of(pair.group, map(int, rest.split(","))))
    return b.tilde if kind == "biprojection_tilde" else b.element


@pytest.mark.parametrize("spec", ["group:cyclic:6", "group:symmetric:3", "group:dihedral:4"])
def test_dump_reload_keeps_margins(tmp_path: Path, spec: str) -> None:
    assert main(["dump", "--model", spec, "--out", str(tmp_path)]) == EXIT_OK
    pair = model_from_spec(spec)
    assert pair.group is not None
    bundle = ElementBundle.model_validate_json((tmp_path / "elements.json").read_text("utf-8"))
    assert len(bundle.elements) == 4 + 2 * len(enumerate_subgroups(pair.group))
    for name, lit in bundle.elements.items():
        reloaded = _margins(pair, element_from_literal(pair, lit))
        original = _margins(pair, _dumped_source(pair, name))
        assert np.allclose(reloaded, original, rtol=0.0, atol=1e-12)
