from __future__ import annotations

import json
from pathlib import Path

import pytest

from ncup.config import settings
from ncup.errors import ConfigError, UnsupportedModel
from ncup.jobs.suite import (
    Outcome,
    aggregate,
    load_suite_config,
    probe_spin_young_constant,
    probe_tao_sum,
    run_suite,
    run_suite_async,
    tolerances_for,
)
from ncup.models.report import MARGIN_EDGES
from ncup.models.suite import SuiteConfig
from ncup.services.inequalities import Measurement
from ncup.services.two_box import TwoBoxPair

SEED = 20240601


def _config(**overrides: object) -> SuiteConfig:
    base: dict[str, object] = {
        "models": ["group:cyclic:4"],
        "samples": 8,
        "seed": SEED,
        "probes": [],
    }
    base.update(overrides)
    return SuiteConfig.model_validate(base)


@pytest.mark.asyncio
async def test_run_suite_passes_on_small_models() -> None:
    cfg = _config(models=["group:cyclic:4", "spin:2"])
    report = await run_suite_async(cfg)
    failed = [(c.model, c.name) for c in report.checks if not c.passed]
    assert failed == []
    assert report.passed
    suites = {(c.model, c.suite) for c in report.checks}
    assert ("group:cyclic:4", "minimizers") in suites
    assert ("spin:2", "minimizers") not in suites
    assert report.wall_time_s is None
    assert len(report.notes) == 3


def test_parallelism_does_not_change_report() -> None:
    one = run_suite(_config(parallel=1, suites=["young", "structure"]))
    three = run_suite(_config(parallel=3, suites=["young", "structure"]))
    assert one.model_dump_json() == three.model_dump_json()


def test_constructed_witnesses_are_reported() -> None:
    report = run_suite(_config(models=["spin:3"], suites=["donoho_stark"], samples=2))
    witness = next(c for c in report.checks if c.name == "donoho_stark_witness")
    assert witness.samples == 1
    assert witness.passed


@pytest.mark.asyncio
async def test_tao_probe_only() -> None:
    cfg = _config(models=["group:cyclic:5"], suites=[], probes=["tao"], tao_budget=2000)
    report = await run_suite_async(cfg)
    assert report.checks == []
    assert len(report.probes) == 1
    findings = report.probes[0].findings
    assert findings["min_sum"] == 6
    assert findings["matches_prediction"] is True
    assert findings["min_sum_support_1"] == 6


def test_tao_probe_needs_prime_cyclic(c4: TwoBoxPair) -> None:
    with pytest.raises(UnsupportedModel):
        probe_tao_sum(c4, 10, SEED)


def test_spin_young_probe(regular_c3: TwoBoxPair, c4: TwoBoxPair) -> None:
    probe = probe_spin_young_constant(regular_c3, 4, SEED, [(1.0, 1.0, 1.0), (2.0, 1.0, 2.0)])
    assert probe.findings["n0"] == 3
    assert abs(float(probe.findings["identity_margin_n0"])) < 1e-12
    assert abs(float(probe.findings["identity_violation_factor_n0_squared"]) - 3.0) < 1e-9
    assert probe.notes
    with pytest.raises(UnsupportedModel):
        probe_spin_young_constant(c4, 1, SEED, [(1.0, 1.0, 1.0)])


def test_aggregate_caps_counterexamples(c4: TwoBoxPair) -> None:
    outcomes = [
        Outcome(
            index=i,
            seed=i,
            measurements=[Measurement("demo", -1.0 if i < 15 else 0.5, "inequality", 1e-9)],
            elements={"x": c4.plus.identity()},
        )
        for i in reversed(range(20))
    ]
    (report,) = aggregate("group:cyclic:4", "demo", c4, outcomes)
    assert report.samples == 20
    assert not report.passed
    assert report.max_violation == 1.0
    assert report.min_margin == -1.0
    assert len(report.counterexamples) == settings.COUNTEREXAMPLE_CAP
    assert [c.index for c in report.counterexamples] == list(range(10))
    assert report.counterexamples[0].elements["x"].side == "plus"
    counts = report.histogram.counts
    assert len(counts) == len(MARGIN_EDGES) + 1
    assert counts[0] == 15
    assert counts[9] == 5


def test_tolerance_overrides() -> None:
    tol = tolerances_for(_config(tol_equality=1e-5))
    assert tol.equality == 1e-5
    assert tol.inequality == settings.TOL_INEQUALITY


def test_load_suite_config(tmp_path: Path) -> None:
    good = tmp_path / "suite.json"
    good.write_text(json.dumps({"models": ["spin:2"], "samples": 3}), encoding="utf-8")
    cfg = load_suite_config(str(good))
    assert cfg.models == ["spin:2"]
    assert cfg.samples == 3
    with pytest.raises(ConfigError):
        load_suite_config(str(tmp_path / "missing.json"))
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"p_grid": [0.5]}), encoding="utf-8")
    with pytest.raises(ConfigError):
        load_suite_config(str(bad))
    triples = tmp_path / "triples.json"
    triples.write_text(json.dumps({"young_triples": [[2, 2, 2]]}), encoding="utf-8")
    with pytest.raises(ConfigError):
        load_suite_config(str(triples))
    zero = tmp_path / "zero.json"
    zero.write_text(json.dumps({"young_triples": [[0, 1, 1]]}), encoding="utf-8")
    with pytest.raises(ConfigError):
        load_suite_config(str(zero))


def test_unknown_model_is_a_config_error() -> None:
    with pytest.raises(ConfigError):
        run_suite(_config(models=["torus:3"]))
