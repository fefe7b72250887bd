from __future__ import annotations

import argparse
import csv
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import NoReturn

import numpy as np
from pydantic import TypeAdapter, ValidationError

from .errors import CheckFailure, ConfigError, MismatchedBiprojection, NcupError
from .exporters.report import write_report
from .jobs.suite import load_suite_config, run_suite
from .logging import configure_logging, get_logger, run_context
from .models.element import Complex, ElementBundle, ElementLiteral
from .models.report import BishiftCertificate, UniquenessRow
from .models.suite import ALL_PROBES, ALL_SUITES, SuiteConfig
from .services.algebra import ComplexArray
from .services.extremizers import (
    biprojection_from_subgroup,
    coset_shift,
    enumerate_bishifts,
    is_biprojection,
    minimizer_report,
    tilde_shift,
    uniqueness_space,
)
from .services.groups import (
    Character,
    FiniteGroup,
    Subgroup,
    commutator_subgroup,
    enumerate_subgroups,
    one_dim_characters,
    right_cosets,
    subgroup_of,
)
from .services.inequalities import COLLINEARITY_TOL
from .services.two_box import (
    Side,
    TwoBoxPair,
    element_to_literal,
    fourier_entry_matrix,
    jones_element,
    jones_projection,
    model_from_spec,
)

_log = get_logger()

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CHECK = 2


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with status 1."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def normalize_model_spec(spec: str) -> str:
    """``"group cyclic:6"`` and ``"group:cyclic:6"`` name the same model."""
    return ":".join(spec.split())


def _members(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        msg = f"expected comma-separated integers, got {text!r}"
        raise argparse.ArgumentTypeError(msg) from exc


def _complex(z: complex) -> Complex:
    return (float(z.real), float(z.imag))


def _character_literal(group: FiniteGroup, chi: Character) -> dict[str, Complex]:
    return {group.label(h): _complex(v) for h, v in chi.values.items()}


def _group_pair(spec: str) -> tuple[TwoBoxPair, FiniteGroup]:
    pair = model_from_spec(normalize_model_spec(spec))
    if pair.model != "group" or pair.group is None:
        raise ConfigError(f"{spec!r} is not a group model")
    return pair, pair.group


def _emit(text: str, out: str | None) -> None:
    if out is None:
        print(text)
        return
    p = Path(out)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text + "\n", encoding="utf-8")
    print(f"Wrote {p}", file=sys.stderr)


# verify


def suite_config_from_args(args: argparse.Namespace) -> SuiteConfig:
    """Config file fields first, then CLI overrides."""
    base = load_suite_config(args.config) if args.config else SuiteConfig()
    fields = base.model_dump()
    if args.model:
        fields["models"] = [normalize_model_spec(m) for m in args.model]
    if args.samples is not None:
        fields["samples"] = args.samples
    if args.seed is not None:
        fields["seed"] = args.seed
    if args.tol is not None:
        fields["tol_equality"] = args.tol
        fields["tol_inequality"] = args.tol
    if args.suite:
        fields["suites"] = [s for s in args.suite if s in ALL_SUITES]
        fields["probes"] = [s for s in args.suite if s in ALL_PROBES]
    if args.parallel is not None:
        fields["parallel"] = args.parallel
    if args.out is not None:
        fields["out"] = args.out
    if args.format is not None:
        fields["format"] = args.format
    try:
        return SuiteConfig.model_validate(fields)
    except ValidationError as exc:
        raise ConfigError(f"invalid suite configuration: {exc}") from exc


def cmd_verify(args: argparse.Namespace) -> int:
    cfg = suite_config_from_args(args)
    report = run_suite(cfg)
    if cfg.out:
        path = write_report(report, cfg.out, cfg.format)
        print(f"Wrote {cfg.format.upper()}: {path} ({len(report.checks)} checks)", file=sys.stderr)
    else:
        print(report.model_dump_json(indent=2, exclude_none=True))
    failed = [c for c in report.checks if not c.passed]
    for c in failed:
        _log.warning(
            "check_failed", model=c.model, suite=c.suite, check=c.name, violation=c.max_violation
        )
    return EXIT_OK if not failed else EXIT_CHECK


# minimizers


def expected_bishift_count(subgroups: Sequence[Subgroup]) -> int:
    """``Σ_H |H/[H,H]|·[G:H]``."""
    return sum(h.size // commutator_subgroup(h).size * h.index for h in subgroups)


def cmd_minimizers(args: argparse.Namespace) -> int:
    pair, group = _group_pair(args.model)
    if args.subgroup is not None:
        subgroups = [subgroup_of(group, args.subgroup)]
    else:
        subgroups = enumerate_subgroups(group)
    certificates: list[BishiftCertificate] = []
    for bs in enumerate_bishifts(pair, subgroups):
        assert bs.base.subgroup is not None and bs.character is not None
        assert bs.coset_rep is not None and bs.constant is not None
        rep = minimizer_report(pair, bs.element)
        certificates.append(
            BishiftCertificate(
                group=pair.label,
                subgroup=list(bs.base.subgroup.members),
                character=_character_literal(group, bs.character),
                coset_rep=bs.coset_rep,
                constant=_complex(bs.constant),
                checks=bs.checks,
                verdicts=rep.verdicts,
                consistent=rep.consistent and rep.all_true,
            )
        )
    expected = expected_bishift_count(subgroups)
    _emit(
        TypeAdapter(list[BishiftCertificate]).dump_json(certificates, indent=2).decode(), args.out
    )
    if len(certificates) != expected:
        raise CheckFailure(f"{len(certificates)} bi-shifts enumerated, expected {expected}")
    bad = [c for c in certificates if not c.consistent]
    if bad:
        raise CheckFailure(f"{len(bad)} of {len(certificates)} bi-shifts fail a minimizer verdict")
    _log.info("minimizers_done", model=pair.label, certificates=len(certificates))
    return EXIT_OK


# uniqueness


def _pick(items: Sequence[Character], index: int, what: str) -> Character:
    if not 0 <= index < len(items):
        raise ConfigError(f"{what} index {index} out of range 0..{len(items) - 1}")
    return items[index]


def uniqueness_row(
    pair: TwoBoxPair,
    h: Subgroup,
    g: int,
    chi: Character,
    conjugator: int,
    tilde_subgroup: Subgroup | None = None,
) -> UniquenessRow:
    group = pair.group
    assert group is not None
    if not 0 <= g < group.order:
        raise ConfigError(f"coset representative {g} is not an element of {group.name}")
    if not 0 <= conjugator < group.order:
        raise ConfigError(f"conjugator {conjugator} is not an element of {group.name}")
    base = biprojection_from_subgroup(pair, h)
    tilde_base = base
    if tilde_subgroup is not None:
        tilde_base = biprojection_from_subgroup(pair, tilde_subgroup)
    bg = coset_shift(pair, base, g)
    if bg is None:
        raise CheckFailure(f"indicator of coset {h.members}·{g} is not a right shift")
    bh = tilde_shift(pair, tilde_base, chi, None if conjugator == group.identity else conjugator)
    if bh is None:
        raise CheckFailure(f"conjugated character projection by {conjugator} is not a right shift")
    result = uniqueness_space(pair, bg, bh)
    return UniquenessRow(
        group=pair.label,
        subgroup=list(h.members),
        coset_rep=g,
        character=_character_literal(group, chi),
        conjugator=conjugator,
        dimension=result.dimension,
        collinearity=result.collinearity,
        basis=None if result.basis is None else element_to_literal(pair, result.basis),
    )


def cmd_uniqueness(args: argparse.Namespace) -> int:
    pair, group = _group_pair(args.model)
    rows: list[UniquenessRow] = []
    if args.all_pairs:
        subgroups = (
            [subgroup_of(group, args.subgroup)] if args.subgroup else enumerate_subgroups(group)
        )
        for h in subgroups:
            for coset in right_cosets(h):
                for chi in one_dim_characters(h):
                    rows.append(uniqueness_row(pair, h, coset[0], chi, group.identity))
    else:
        if args.subgroup is None:
            raise ConfigError("--subgroup is required unless --all-pairs is given")
        h = subgroup_of(group, args.subgroup)
        tilde = subgroup_of(group, args.tilde_subgroup) if args.tilde_subgroup else None
        chi = _pick(one_dim_characters(tilde or h), args.chi, "character")
        conjugator = group.identity if args.h is None else args.h
        rows.append(uniqueness_row(pair, h, args.g, chi, conjugator, tilde))

    _emit(TypeAdapter(list[UniquenessRow]).dump_json(rows, indent=2).decode(), args.out)
    bad = [
        r for r in rows
        if r.dimension != 1 or (r.collinearity is not None and r.collinearity > COLLINEARITY_TOL)
    ]
    if bad:
        raise CheckFailure(f"{len(bad)} of {len(rows)} pairs without a unique collinear solution")
    return EXIT_OK


# dump


def _write_matrix(path: Path, m: ComplexArray) -> None:
    with path.open("w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(["row", "col", "re", "im"])
        for (i, j), v in np.ndenumerate(m):
            w.writerow([i, j, repr(float(v.real)), repr(float(v.imag))])


def dump_elements(pair: TwoBoxPair) -> ElementBundle:
    elements: dict[str, ElementLiteral] = {}
    sides: tuple[Side, ...] = ("plus", "minus")
    for side in sides:
        elements[f"jones_projection_{side}"] = element_to_literal(
            pair, jones_projection(pair, side), note="trace 1"
        )
        elements[f"jones_element_{side}"] = element_to_literal(
            pair, jones_element(pair, side), note="delta-scaled"
        )
    if pair.model == "group":
        assert pair.group is not None
        for h in enumerate_subgroups(pair.group):
            b = biprojection_from_subgroup(pair, h)
            key = ",".join(str(m) for m in h.members)
            elements[f"biprojection:{key}"] = element_to_literal(pair, b.element)
            elements[f"biprojection_tilde:{key}"] = element_to_literal(pair, b.tilde)
    else:
        candidates = {
            "identity_plus": pair.plus.identity(),
            "jones_plus": jones_projection(pair, "plus"),
            "identity_minus": pair.minus.identity(),
            "jones_minus": jones_projection(pair, "minus"),
        }
        for name, x in candidates.items():
            if is_biprojection(pair, x):
                elements[f"biprojection:{name}"] = element_to_literal(pair, x)
    return ElementBundle(model=pair.label, elements=elements)


def cmd_dump(args: argparse.Namespace) -> int:
    pair = model_from_spec(normalize_model_spec(args.model))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_matrix(out / "fourier_plus.csv", pair.f_plus)
    _write_matrix(out / "fourier_minus.csv", pair.f_minus)
    sides: tuple[Side, ...] = ("plus", "minus")
    for side in sides:
        _write_matrix(out / f"fourier_{side}_entries.csv", fourier_entry_matrix(pair, side))
    bundle = dump_elements(pair)
    text = bundle.model_dump_json(indent=2, exclude_none=True)
    (out / "elements.json").write_text(text + "\n", encoding="utf-8")
    print(f"Wrote {out} ({len(bundle.elements)} elements)", file=sys.stderr)
    return EXIT_OK


# Entry point


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="ncup", description="Fourier calculus and uncertainty checks on 2-box models")
    ap.add_argument("--log-level", default=None)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="run the verification suites")
    v.add_argument(
        "--model", action="append", help="e.g. group:cyclic:6, spin:4, fixedpoint:regular:cyclic:3"
    )
    v.add_argument("--config", help="suite configuration JSON")
    v.add_argument("--samples", type=int)
    v.add_argument("--seed", type=int)
    v.add_argument("--tol", type=float, help="equality and inequality tolerance")
    v.add_argument("--suite", action="append", choices=[*ALL_SUITES, *ALL_PROBES])
    v.add_argument("--parallel", type=int)
    v.add_argument("--out")
    v.add_argument("--format", choices=["json", "csv", "xlsx"])
    v.set_defaults(handler=cmd_verify)

    m = sub.add_parser("minimizers", help="enumerate and certify bi-shifts of a group model")
    m.add_argument("--model", required=True)
    m.add_argument("--subgroup", type=_members)
    m.add_argument("--out")
    m.set_defaults(handler=cmd_minimizers)

    u = sub.add_parser("uniqueness", help="null space of the bi-shift support constraints")
    u.add_argument("--model", required=True)
    u.add_argument("--subgroup", type=_members)
    u.add_argument("--tilde-subgroup", type=_members, help="subgroup of the Fourier-side shift")
    u.add_argument("--g", type=int, default=0, help="right coset representative")
    u.add_argument("--chi", type=int, default=0, help="character index")
    u.add_argument("--h", type=int, help="conjugator of the character projection")
    u.add_argument("--all-pairs", action="store_true")
    u.add_argument("--out")
    u.set_defaults(handler=cmd_uniqueness)

    d = sub.add_parser("dump", help="write Fourier coordinates and named elements")
    d.add_argument("--model", required=True)
    d.add_argument("--out", required=True, help="output directory")
    d.set_defaults(handler=cmd_dump)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "verify" and not args.model and not args.config:
        ap.error("verify needs --model or --config")
    configure_logging(args.log_level)
    with run_context(args.command):
        try:
            return int(args.handler(args))
        except (CheckFailure, MismatchedBiprojection) as exc:
            _log.error("check_failure", command=args.command, error=str(exc))
            print(f"ncup: {exc}", file=sys.stderr)
            return EXIT_CHECK
        except (NcupError, ValidationError, OSError) as exc:
            _log.error("command_failed", command=args.command, error=str(exc))
            print(f"ncup: {exc}", file=sys.stderr)
            return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
