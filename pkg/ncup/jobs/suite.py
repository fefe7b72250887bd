from __future__ import annotations

import asyncio
import math
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from pydantic import ValidationError
from tqdm import tqdm

from ..config import settings
from ..errors import ConfigError, NcupError, UnsupportedModel
from ..logging import get_logger
from ..models.element import ElementLiteral
from ..models.report import (
    MARGIN_EDGES,
    CheckReport,
    Counterexample,
    Histogram,
    ProbeReport,
    SuiteReport,
)
from ..models.suite import ElementClass, SampleSpec, SuiteConfig, SuiteName, parse_element_class
from ..services import inequalities as ineq
from ..services.algebra import AlgebraElement, p_norm
from ..services.inequalities import Measurement, Tolerances
from ..services.sampling import sample_element, sample_seed, sample_side
from ..services.two_box import (
    TwoBoxPair,
    cached_model,
    element_to_literal,
    fixed_point_model,
    right_regular_action,
)

_log = get_logger()

CHUNK = 25
TAO_CHUNK = 10_000
TAO_STREAM = 7
SPIN_PROBE_STREAM = 11
CONSTRUCTED = -1


@dataclass
class Outcome:
    index: int
    seed: int
    measurements: list[Measurement]
    elements: dict[str, AlgebraElement] = field(default_factory=dict)


@dataclass(frozen=True)
class _Plan:
    pair: TwoBoxPair
    config: SuiteConfig
    tol: Tolerances
    classes: tuple[tuple[ElementClass, int | None], ...]


def load_suite_config(path: str) -> SuiteConfig:
    try:
        return SuiteConfig.model_validate_json(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except ValidationError as exc:
        raise ConfigError(f"invalid config {path}: {exc}") from exc


def tolerances_for(cfg: SuiteConfig) -> Tolerances:
    base = Tolerances.from_settings()
    return Tolerances(
        equality=base.equality if cfg.tol_equality is None else cfg.tol_equality,
        inequality=base.inequality if cfg.tol_inequality is None else cfg.tol_inequality,
        rank=base.rank if cfg.tol_rank is None else cfg.tol_rank,
    )


def _spec(plan: _Plan, index: int, cls: ElementClass | None = None) -> SampleSpec:
    name, k = plan.classes[index % len(plan.classes)]
    if cls is not None:
        name, k = cls, None
    return SampleSpec(
        model=plan.pair.label,
        count=plan.config.samples,
        master_seed=plan.config.seed,
        element_class=name,
        sparse_k=k,
        side=plan.config.side,
    )


def _draw(plan: _Plan, spec: SampleSpec, index: int, stream: int = 0) -> AlgebraElement:
    return sample_element(spec, index, pair=plan.pair, stream=stream)


# Per-sample kernels


def _plancherel(plan: _Plan, index: int) -> Outcome:
    spec = _spec(plan, index)
    x = _draw(plan, spec, index)
    ms = ineq.plancherel_checks(plan.pair, x, plan.config.p_grid, plan.tol)
    if plan.pair.model == "group" and sample_side(spec, index) == "minus":
        assert plan.pair.group is not None
        fixed = _regular_fixed_point(plan.pair)
        ms += ineq.group_fixed_point_isomorphism(plan.pair, fixed, x, plan.tol)
    return Outcome(index, sample_seed(plan.config.seed, index), ms, {"x": x})


def _hausdorff_young(plan: _Plan, index: int) -> Outcome:
    x = _draw(plan, _spec(plan, index), index)
    ms = ineq.hausdorff_young(plan.pair, x, plan.config.p_grid, plan.tol)
    return Outcome(index, sample_seed(plan.config.seed, index), ms, {"x": x})


def _young(plan: _Plan, index: int) -> Outcome:
    spec = _spec(plan, index)
    x, y = _draw(plan, spec, index), _draw(plan, spec, index, stream=1)
    ms = ineq.young(plan.pair, x, y, plan.config.young_triples, plan.tol)
    ms += ineq.coproduct_bounds(plan.pair, x, y, plan.config.p_grid, plan.tol)
    return Outcome(index, sample_seed(plan.config.seed, index), ms, {"x": x, "y": y})


def _donoho_stark(plan: _Plan, index: int) -> Outcome:
    spec = _spec(plan, index)
    x = _draw(plan, spec, index)
    ms = ineq.donoho_stark(plan.pair, x, plan.tol)
    if _is_cyclic_group(plan.pair) and sample_side(spec, index) == "plus":
        ms += ineq.classical_donoho_stark(plan.pair, x, plan.tol)
    return Outcome(index, sample_seed(plan.config.seed, index), ms, {"x": x})


def _hirschman_beckner(plan: _Plan, index: int) -> Outcome:
    x = _draw(plan, _spec(plan, index), index)
    ms = ineq.hirschman_beckner(plan.pair, x, plan.tol)
    return Outcome(index, sample_seed(plan.config.seed, index), ms, {"x": x})


def _structure(plan: _Plan, index: int) -> Outcome:
    spec = _spec(plan, index)
    x, y, z = (_draw(plan, spec, index, stream=s) for s in (0, 1, 2))
    pair, tol = plan.pair, plan.tol
    ms = ineq.schur_product(pair, x.H @ x, y.H @ y, tol)
    ms += ineq.trace_change(pair, x, y, z, tol)
    ms += ineq.range_domination(pair, x, y)
    ms += ineq.fourier_l1_bound(pair, x, tol)
    ms += ineq.holder(x, y, z, plan.config.p_grid, tol)
    ms += ineq.coproduct_agreement(pair, x, y, tol)
    return Outcome(index, sample_seed(plan.config.seed, index), ms, {"x": x, "y": y, "z": z})


def _minimizers(plan: _Plan, index: int) -> Outcome:
    x = _draw(plan, _spec(plan, index, "generic"), index)
    ms = ineq.generic_not_minimizer(plan.pair, x, plan.tol)
    return Outcome(index, sample_seed(plan.config.seed, index), ms, {"x": x})


def _entropy_max(plan: _Plan, index: int) -> Outcome:
    cls: ElementClass | None = "biunitary_candidate" if (index // 2) % 2 == 0 else None
    x = _draw(plan, _spec(plan, index, cls), index)
    ms = ineq.entropy_max(plan.pair, x, plan.tol)
    return Outcome(index, sample_seed(plan.config.seed, index), ms, {"x": x})


SAMPLED: dict[SuiteName, Callable[[_Plan, int], Outcome]] = {
    "plancherel": _plancherel,
    "hausdorff_young": _hausdorff_young,
    "young": _young,
    "donoho_stark": _donoho_stark,
    "hirschman_beckner": _hirschman_beckner,
    "structure": _structure,
    "minimizers": _minimizers,
    "entropy_max": _entropy_max,
}


def _constructed(plan: _Plan, suite: SuiteName) -> Outcome:
    pair, tol = plan.pair, plan.tol
    ms: list[Measurement] = []
    if suite == "young":
        ms = ineq.young_sharpness(pair, plan.config.young_triples, tol)
    elif suite == "donoho_stark":
        ms = ineq.donoho_stark_witness(pair, tol)
    elif suite == "hirschman_beckner":
        ms = ineq.hirschman_beckner_witness(pair, tol)
    elif suite == "minimizers":
        ms = ineq.minimizer_battery(pair, tol, plan.config.corollary_max_order)
    return Outcome(CONSTRUCTED, 0, ms)


def _chunk(plan: _Plan, suite: SuiteName, indices: Sequence[int]) -> list[Outcome]:
    fn = SAMPLED[suite]
    return [fn(plan, i) for i in indices]


def _is_cyclic_group(pair: TwoBoxPair) -> bool:
    g = pair.group
    return pair.model == "group" and g is not None and g.name.startswith("cyclic:")


@lru_cache(maxsize=16)
def _regular_fixed_point(pair: TwoBoxPair) -> TwoBoxPair:
    assert pair.group is not None
    return fixed_point_model(right_regular_action(pair.group), f"{pair.label}/right-regular")


def _applicable(pair: TwoBoxPair, suite: SuiteName) -> bool:
    if suite == "minimizers":
        return pair.model == "group"
    return True


# Aggregation


def aggregate(
    model: str,
    suite: str,
    pair: TwoBoxPair,
    outcomes: Sequence[Outcome],
    wall_time: float | None = None,
) -> list[CheckReport]:
    """Merge outcomes in index order into one report per check name."""
    ordered = sorted(outcomes, key=lambda o: o.index)
    buckets: dict[str, list[tuple[Outcome, Measurement]]] = {}
    for o in ordered:
        for m in o.measurements:
            buckets.setdefault(m.check, []).append((o, m))

    reports = []
    edges = np.asarray(MARGIN_EDGES)
    for name, rows in buckets.items():
        margins = np.asarray([m.margin for _, m in rows], dtype=np.float64)
        violations = [m.violation for _, m in rows]
        tol = rows[0][1].tolerance
        bins = np.searchsorted(edges, margins, side="right")
        counts = np.bincount(bins, minlength=len(edges) + 1)
        failing = [(o, m) for o, m in rows if m.violation > m.tolerance]
        cex = [
            Counterexample(
                index=o.index,
                seed=o.seed,
                margin=m.margin,
                elements=_literals(pair, o),
            )
            for o, m in failing[: settings.COUNTEREXAMPLE_CAP]
        ]
        reports.append(
            CheckReport(
                name=name,
                model=model,
                suite=suite,
                kind=rows[0][1].kind,
                tolerance=tol,
                samples=len(rows),
                min_margin=float(margins.min()) if len(margins) else None,
                max_violation=float(max(violations)),
                histogram=Histogram(counts=[int(c) for c in counts]),
                counterexamples=cex,
                wall_time_s=wall_time,
            )
        )
    return reports


def _literals(pair: TwoBoxPair, o: Outcome) -> dict[str, ElementLiteral]:
    return {
        key: element_to_literal(pair, x, note=f"index={o.index} seed={o.seed}")
        for key, x in o.elements.items()
    }


# Probes


def probe_tao_sum(pair: TwoBoxPair, budget: int, seed: int) -> ProbeReport:
    """Smallest ``S(x) + S(ℱ(x))`` over random sparse functions, every support size in turn."""
    g = pair.group
    p = pair.n_points
    if pair.model != "group" or g is None or not g.name.startswith("cyclic:") or not _is_prime(p):
        raise UnsupportedModel(f"tao probe needs a cyclic group of prime order, got {pair.label}")
    rng = np.random.default_rng(sample_seed(seed, 0, TAO_STREAM))
    rel = settings.RANK_REL_TOL
    minima = {k: p + p for k in range(1, p + 1)}
    done = 0
    while done < budget:
        m = min(TAO_CHUNK, budget - done)
        sizes = 1 + (np.arange(done, done + m) % p)
        coeffs = (rng.standard_normal((m, p)) + 1j * rng.standard_normal((m, p))) / math.sqrt(2)
        keep = rng.random((m, p)).argsort(axis=1) < sizes[:, None]
        f = np.where(keep, coeffs, 0)
        spectrum = np.abs(np.fft.fft(f, axis=1))
        top = spectrum.max(axis=1, keepdims=True)
        sums = sizes + np.count_nonzero(spectrum > rel * top, axis=1)
        for k in range(1, p + 1):
            mask = sizes == k
            if mask.any():
                minima[k] = min(minima[k], int(sums[mask].min()))
        done += m
    observed = min(minima.values())
    findings: dict[str, float | int | bool | str] = {
        "budget": budget,
        "min_sum": observed,
        "predicted": p + 1,
        "matches_prediction": observed == p + 1,
    }
    findings.update({f"min_sum_support_{k}": v for k, v in minima.items()})
    _log.info("probe_tao_done", model=pair.label, budget=budget, min_sum=observed)
    return ProbeReport(
        name="tao",
        model=pair.label,
        findings=findings,
        notes=["S(x) + S(F(x)) >= delta^2 + 1 is reported, not asserted"],
    )


def probe_spin_young_constant(
    pair: TwoBoxPair,
    samples: int,
    seed: int,
    triples: Sequence[tuple[float, float, float]],
) -> ProbeReport:
    """Margins of ``‖A∘B‖_r ≤ c‖A‖_p‖B‖_q`` for ``c = 1/n₀`` and ``1/n₀²``."""
    if pair.model not in ("spin", "fixed_point"):
        msg = f"spin Young probe needs a spin or fixed-point model, got {pair.label}"
        raise UnsupportedModel(msg)
    n0 = round(pair.delta0 * math.sqrt(pair.n_points))
    plus = pair.plus
    ident = plus.identity()
    spec = SampleSpec(model=pair.label, count=max(samples, 1), master_seed=seed, side="plus")
    pairs = [(ident, ident)] + [
        (
            sample_element(spec, i, pair=pair, stream=SPIN_PROBE_STREAM),
            sample_element(spec, i, pair=pair, stream=SPIN_PROBE_STREAM + 1),
        )
        for i in range(samples)
    ]
    worst = {"n0": math.inf, "n0_squared": math.inf}
    identity_n0 = math.inf
    identity_factor = 0.0
    for j, (a, b) in enumerate(pairs):
        had = plus.element(a.data * b.data, check=False)
        for p, q, r in triples:
            ineq.check_exponents(p, q, r)
            base = p_norm(a, p) * p_norm(b, q)
            lhs = p_norm(had, r)
            m1 = (base / n0 - lhs) / (base / n0)
            m2 = (base / n0**2 - lhs) / (base / n0**2)
            if j == 0:
                identity_n0 = min(identity_n0, m1)
                identity_factor = max(identity_factor, lhs / (base / n0**2))
            else:
                worst["n0"] = min(worst["n0"], m1)
                worst["n0_squared"] = min(worst["n0_squared"], m2)
    findings: dict[str, float | int | bool | str] = {
        "n0": n0,
        "identity_margin_n0": identity_n0,
        "identity_violation_factor_n0_squared": identity_factor,
        "random_pairs": samples,
    }
    if samples:
        findings["random_min_margin_n0"] = worst["n0"]
        findings["random_min_margin_n0_squared"] = worst["n0_squared"]
    notes = []
    if identity_factor > 1.0 + 1e-9:
        notes.append(
            f"identity substitution exceeds the 1/n0^2 constant by a factor {identity_factor:.6g}"
        )
    return ProbeReport(name="spin_young", model=pair.label, findings=findings, notes=notes)


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % d for d in range(2, math.isqrt(n) + 1))


# Runner


async def run_suite_async(cfg: SuiteConfig) -> SuiteReport:
    started = time.perf_counter()
    tol = tolerances_for(cfg)
    classes = tuple(parse_element_class(c) for c in cfg.element_classes)
    plans: dict[str, _Plan] = {}
    for spec in cfg.models:
        try:
            pair = cached_model(spec)
        except ConfigError:
            raise
        except NcupError as exc:
            raise ConfigError(f"cannot build model {spec!r}: {exc}") from exc
        plans[spec] = _Plan(pair, cfg, tol, classes)

    sem = asyncio.Semaphore(cfg.parallel)

    async def _run(
        key: tuple[str, str, int], fn: Callable[..., object], *args: object
    ) -> tuple[tuple[str, str, int], object, float]:
        async with sem:
            t0 = time.perf_counter()
            result = await asyncio.to_thread(fn, *args)
            return key, result, time.perf_counter() - t0

    jobs = []
    for spec, plan in plans.items():
        for suite in cfg.suites:
            if not _applicable(plan.pair, suite):
                continue
            jobs.append(_run((spec, suite, CONSTRUCTED), _constructed, plan, suite))
            samples = cfg.samples if not (suite == "minimizers" and plan.pair.n_points == 1) else 0
            for start in range(0, samples, CHUNK):
                indices = range(start, min(start + CHUNK, samples))
                jobs.append(_run((spec, suite, start), _chunk, plan, suite, indices))
        if "tao" in cfg.probes and _is_cyclic_group(plan.pair) and _is_prime(plan.pair.n_points):
            budget = cfg.tao_budget or settings.TAO_BUDGET
            jobs.append(_run((spec, "probe:tao", 0), probe_tao_sum, plan.pair, budget, cfg.seed))
        if "spin_young" in cfg.probes and plan.pair.model in ("spin", "fixed_point"):
            jobs.append(
                _run(
                    (spec, "probe:spin_young", 0),
                    probe_spin_young_constant,
                    plan.pair,
                    cfg.spin_probe_samples,
                    cfg.seed,
                    cfg.young_triples,
                )
            )

    results: dict[tuple[str, str, int], object] = {}
    elapsed: dict[tuple[str, str], float] = {}
    with tqdm(total=len(jobs), desc="ncup", unit="task", disable=not settings.PROGRESS) as bar:
        for fut in asyncio.as_completed(jobs):
            key, result, dt = await fut
            results[key] = result
            elapsed[key[:2]] = elapsed.get(key[:2], 0.0) + dt
            bar.update(1)

    report = SuiteReport(seed=cfg.seed, samples=cfg.samples, models=list(cfg.models))
    timing = settings.REPORT_INCLUDE_TIMING
    for spec, plan in plans.items():
        for suite in cfg.suites:
            keys = sorted(k for k in results if k[0] == spec and k[1] == suite)
            if not keys:
                continue
            outcomes: list[Outcome] = []
            for k in keys:
                r = results[k]
                outcomes.extend(r if isinstance(r, list) else [r])  # type: ignore[arg-type]
            wall = round(elapsed[(spec, suite)], 6) if timing else None
            checks = aggregate(spec, suite, plan.pair, outcomes, wall)
            report.checks.extend(checks)
            _log.info(
                "suite_check_done",
                model=spec,
                suite=suite,
                checks=len(checks),
                failed=sum(not c.passed for c in checks),
            )
        for probe in ("tao", "spin_young"):
            found = results.get((spec, f"probe:{probe}", 0))
            if isinstance(found, ProbeReport):
                report.probes.append(found)
    if timing:
        report.wall_time_s = round(time.perf_counter() - started, 6)
    return report


def run_suite(cfg: SuiteConfig) -> SuiteReport:
    return asyncio.run(run_suite_async(cfg))
