from __future__ import annotations

import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.linalg import null_space

from ..config import settings
from ..errors import (
    MismatchedBiprojection,
    ModelMismatch,
    NotAProjection,
    PreconditionFailed,
    ShiftSideMismatch,
    ZeroElement,
)
from ..logging import get_logger
from .algebra import (
    AlgebraElement,
    adjoint,
    entropy,
    flatness,
    is_positive,
    is_projection,
    p_norm,
    support_size,
    trace,
)
from .groups import (
    Character,
    Subgroup,
    closure,
    left_cosets,
    one_dim_characters,
    right_cosets,
    validate_character,
)
from .two_box import TwoBoxPair, contragredient, coproduct, fourier, fourier_inv

_log = get_logger()

ShiftSide = Literal["left", "right"]

SHIFT_TOL = 1e-9
DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class Verdict:
    ok: bool
    residuals: dict[str, float] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True, eq=False)
class Biprojection:
    element: AlgebraElement
    tilde: AlgebraElement
    subgroup: Subgroup | None = None


@dataclass(frozen=True, eq=False)
class ShiftCertificate:
    shift: AlgebraElement
    base: Biprojection
    side: ShiftSide
    on_tilde: bool
    residuals: dict[str, float]
    coset_rep: int | None = None
    character: Character | None = None
    conjugator: int | None = None


@dataclass(frozen=True, eq=False)
class BiShift:
    element: AlgebraElement
    base: Biprojection
    checks: dict[str, float]
    coset_rep: int | None = None
    character: Character | None = None
    constant: complex | None = None
    witnesses: tuple[ShiftCertificate, ShiftCertificate, AlgebraElement] | None = None


@dataclass(frozen=True)
class Degenerate:
    norm: float
    threshold: float


@dataclass(frozen=True)
class MinimizerReport:
    ds_product: float
    ds_slack: float
    hb_margin: float
    hb_margin_unnormalized: float
    verdicts: dict[str, bool | None]

    @property
    def consistent(self) -> bool:
        known = [v for v in self.verdicts.values() if v is not None]
        return all(known) or not any(known)

    @property
    def all_true(self) -> bool:
        return all(v for v in self.verdicts.values() if v is not None)

    @property
    def all_false(self) -> bool:
        return not any(v for v in self.verdicts.values() if v is not None)


@dataclass(frozen=True)
class UniquenessResult:
    dimension: int
    basis: AlgebraElement | None
    collinearity: float | None


def _norm2(x: AlgebraElement) -> float:
    return p_norm(x, 2)


def _frob(x: AlgebraElement) -> float:
    return float(np.linalg.norm(x.data))


def _require_group(pair: TwoBoxPair) -> None:
    if pair.model != "group" or pair.group is None:
        raise ModelMismatch(f"{pair.label} is not a group model")


# Biprojections


def biprojection_from_subgroup(pair: TwoBoxPair, h: Subgroup) -> Biprojection:
    _require_group(pair)
    if h.parent is not pair.group:
        raise ModelMismatch("subgroup of a different group")
    n = pair.n_points
    b = np.zeros(n, dtype=np.complex128)
    b[list(h.members)] = 1.0
    coeffs = np.zeros(n, dtype=np.complex128)
    coeffs[list(h.members)] = 1.0 / h.size
    return Biprojection(
        element=pair.plus.element(b, check=False),
        tilde=pair.minus.from_coords(coeffs),
        subgroup=h,
    )


def is_biprojection(pair: TwoBoxPair, x: AlgebraElement, tol: float = 1e-8) -> Verdict:
    """``x`` a projection and ``ℱ(x)`` a scalar multiple of a projection."""
    ref = max(_frob(x), 1.0)
    idem = _frob(x @ x - x) / ref
    sa = _frob(x - adjoint(x)) / ref
    f = fourier(pair, x)
    t = trace(f)
    if _frob(x) == 0.0 or abs(t) <= 1e-12 * max(_frob(f), 1e-300) * math.sqrt(pair.n_points):
        return Verdict(False, {"idempotent": idem, "self_adjoint": sa, "fourier_trace": abs(t)})
    s = trace(f @ f) / t
    p = f / s
    pref = max(_frob(p), 1.0)
    residuals = {
        "idempotent": idem,
        "self_adjoint": sa,
        "fourier_idempotent": _frob(p @ p - p) / pref,
        "fourier_self_adjoint": _frob(p - adjoint(p)) / pref,
    }
    return Verdict(all(v <= tol for v in residuals.values()), residuals)


# Shifts


def is_shift(
    pair: TwoBoxPair,
    x: AlgebraElement,
    base: Biprojection,
    side: ShiftSide,
    tol: float = SHIFT_TOL,
) -> ShiftCertificate | None:
    """Left: ``x*B = (tr(B)/δ)x``; right: ``B*x = (tr(B)/δ)x``. Minus-side ``x`` uses ``B̃``."""
    if not is_projection(x, tol):
        raise NotAProjection(f"{x.algebra.label}: element is not a projection")
    on_tilde = pair.side_of(x) == "minus"
    b = base.tilde if on_tilde else base.element
    tb = trace(b).real
    prod = coproduct(pair, x, b) if side == "left" else coproduct(pair, b, x)
    target = x * (tb / pair.delta)
    residuals = {
        "trace": abs(trace(x).real - tb) / max(abs(tb), 1.0),
        "coproduct": _frob(prod - target) / max(_frob(x), 1e-300),
    }
    if residuals["trace"] > tol or residuals["coproduct"] > tol:
        return None
    return ShiftCertificate(x, base, side, on_tilde, residuals)


def character_projection(
    pair: TwoBoxPair, chi: Character, conjugator: int | None = None
) -> AlgebraElement:
    """``λ(k)·(1/|H|)Σ_h χ(h)λ(h)·λ(k)⁻¹`` on the minus side."""
    _require_group(pair)
    g = pair.group
    assert g is not None
    k = g.identity if conjugator is None else conjugator
    h = chi.subgroup
    coeffs = np.zeros(pair.n_points, dtype=np.complex128)
    for m in h.members:
        coeffs[g.mul(g.mul(k, m), g.inv(k))] = chi.value(m) / h.size
    return pair.minus.from_coords(coeffs)


def tilde_shift(
    pair: TwoBoxPair, base: Biprojection, chi: Character, conjugator: int | None = None
) -> ShiftCertificate | None:
    q = character_projection(pair, chi, conjugator)
    cert = is_shift(pair, q, base, "right")
    if cert is None:
        return None
    return ShiftCertificate(
        cert.shift, base, "right", True, cert.residuals, character=chi, conjugator=conjugator
    )


def coset_shift(pair: TwoBoxPair, base: Biprojection, g: int) -> ShiftCertificate | None:
    """Certificate for the indicator of ``Hg``."""
    _require_group(pair)
    assert base.subgroup is not None and pair.group is not None
    data = np.zeros(pair.n_points, dtype=np.complex128)
    data[[pair.group.mul(h, g) for h in base.subgroup.members]] = 1.0
    cert = is_shift(pair, pair.plus.element(data, check=False), base, "right")
    if cert is None:
        return None
    return ShiftCertificate(cert.shift, base, "right", False, cert.residuals, coset_rep=g)


def enumerate_shifts(
    pair: TwoBoxPair, base: Biprojection, side: ShiftSide = "right"
) -> list[ShiftCertificate]:
    """Plus-side coset indicators followed by the minus-side character projections."""
    _require_group(pair)
    h = base.subgroup
    if h is None:
        raise ModelMismatch("biprojection has no subgroup witness")
    out: list[ShiftCertificate] = []
    cosets = right_cosets(h) if side == "right" else left_cosets(h)
    for coset in cosets:
        data = np.zeros(pair.n_points, dtype=np.complex128)
        data[list(coset)] = 1.0
        cert = is_shift(pair, pair.plus.element(data, check=False), base, side)
        if cert is not None:
            out.append(
                ShiftCertificate(cert.shift, base, side, False, cert.residuals, coset_rep=coset[0])
            )
    for chi in one_dim_characters(h):
        q = character_projection(pair, chi)
        cert = is_shift(pair, q, base, side)
        if cert is not None:
            out.append(ShiftCertificate(q, base, side, True, cert.residuals, character=chi))
    _log.debug("shifts_enumerated", model=pair.label, subgroup=h.members, count=len(out))
    return out


# Predicates


def is_extremal(pair: TwoBoxPair, x: AlgebraElement, tol: float = 1e-8) -> Verdict:
    """``‖ℱ(x)‖_∞ = ‖x‖₁/δ₀``; the residual is relative to the bound."""
    l1 = p_norm(x, 1)
    if l1 == 0.0:
        raise ZeroElement("extremality of the zero element")
    bound = l1 / pair.delta0
    margin = (bound - p_norm(fourier(pair, x), math.inf)) / bound
    return Verdict(abs(margin) <= tol, {"margin": margin})


def is_partial_isometry_multiple(x: AlgebraElement, tol: float = 1e-8) -> Verdict:
    top, dev = flatness(x)
    if top == 0.0:
        raise ZeroElement("flatness of the zero element")
    return Verdict(dev <= tol, {"flatness": dev})


def is_bipartial_isometry(pair: TwoBoxPair, x: AlgebraElement, tol: float = 1e-8) -> Verdict:
    a = is_partial_isometry_multiple(x, tol)
    b = is_partial_isometry_multiple(fourier(pair, x), tol)
    residuals = {"flatness": a.residuals["flatness"], "fourier_flatness": b.residuals["flatness"]}
    return Verdict(a.ok and b.ok, residuals)


def is_biunitary(pair: TwoBoxPair, x: AlgebraElement, tol: float = 1e-8) -> Verdict:
    """``x`` and ``ℱ(x)`` both unitary."""
    residuals: dict[str, float] = {}
    for name, y in (("unitary", x), ("fourier_unitary", fourier(pair, x))):
        eye = y.algebra.identity()
        residuals[name] = _frob(adjoint(y) @ y - eye) / max(_frob(eye), 1.0)
    return Verdict(all(v <= tol for v in residuals.values()), residuals)


def bishift_form(pair: TwoBoxPair, x: AlgebraElement, tol: float = 1e-8) -> bool:
    """Group model: the plus-side member of ``{x, ℱ(x)}`` equals ``c·Σ_h χ(h)δ_{hg}``."""
    _require_group(pair)
    g = pair.group
    assert g is not None
    p = x if pair.side_of(x) == "plus" else fourier(pair, x)
    vals = p.data
    top = float(np.abs(vals).max())
    if top == 0.0:
        return False
    support = [int(k) for k in np.flatnonzero(np.abs(vals) > settings.RANK_REL_TOL * top)]
    rep = support[0]
    members = sorted({g.mul(t, g.inv(rep)) for t in support})
    if closure(g, members) != tuple(members) or len(members) != len(support):
        return False
    chi = {h: vals[g.mul(h, rep)] / vals[rep] for h in members}
    if any(abs(abs(v) - 1.0) > tol for v in chi.values()):
        return False
    return all(
        abs(chi[a] * chi[b] - chi[g.mul(a, b)]) <= tol for a in members for b in members
    )


def minimizer_report(pair: TwoBoxPair, x: AlgebraElement) -> MinimizerReport:
    norm = _norm2(x)
    if norm == 0.0:
        raise ZeroElement("minimizer report of the zero element")
    fx = fourier(pair, x)
    product = support_size(x) * support_size(fx)
    if pair.model == "group":
        if abs(product - round(product)) <= settings.TOL_RANK:
            product = float(round(product))
    slack = product - pair.delta0**2

    y = x / norm
    hb = entropy(y) + entropy(fourier(pair, y)) - 2 * math.log(pair.delta0)

    extremal = is_extremal(pair, x, settings.TOL_EQUALITY).ok
    bipartial = is_bipartial_isometry(pair, x, settings.TOL_EQUALITY).ok
    flat = is_partial_isometry_multiple(x, settings.TOL_EQUALITY).ok
    dual_extremal = is_extremal(pair, fourier_inv(pair, x), settings.TOL_EQUALITY).ok
    verdicts: dict[str, bool | None] = {
        "donoho_stark": abs(slack) <= settings.TOL_RANK,
        "hirschman_beckner": abs(hb) <= settings.TOL_EQUALITY,
        "extremal_bipartial_isometry": extremal and bipartial,
        "partial_isometry_dual_extremal": flat and dual_extremal,
        "bishift_form": bishift_form(pair, x) if pair.model == "group" else None,
    }
    return MinimizerReport(product, slack, hb, norm**2 * hb, verdicts)


# Bi-shifts


def bishift_checks(pair: TwoBoxPair, x: AlgebraElement) -> dict[str, float]:
    rep = minimizer_report(pair, x)
    bip = is_bipartial_isometry(pair, x, settings.TOL_EQUALITY)
    return {
        "donoho_stark_slack": rep.ds_slack,
        "hirschman_beckner_margin": rep.hb_margin,
        "extremal_margin": is_extremal(pair, x).residuals["margin"],
        "flatness": bip.residuals["flatness"],
        "fourier_flatness": bip.residuals["fourier_flatness"],
    }


def bishift_group(
    pair: TwoBoxPair, h: Subgroup, chi: Character, g: int, c: complex = 1.0
) -> BiShift:
    """``x = c·Σ_{h∈H} χ(h)λ(hg)`` on the minus side."""
    _require_group(pair)
    validate_character(chi, h)
    grp = pair.group
    assert grp is not None
    if c == 0:
        raise ZeroElement("bi-shift constant must be nonzero")
    coeffs = np.zeros(pair.n_points, dtype=np.complex128)
    for m in h.members:
        coeffs[grp.mul(m, g)] = c * chi.value(m)
    x = pair.minus.from_coords(coeffs)
    return BiShift(
        element=x,
        base=biprojection_from_subgroup(pair, h),
        checks=bishift_checks(pair, x),
        coset_rep=g,
        character=chi,
        constant=complex(c),
    )


def bishift_generic(
    pair: TwoBoxPair, bg: ShiftCertificate, bh: ShiftCertificate, y: AlgebraElement
) -> BiShift | Degenerate:
    """``x = ℱ(B̃h)*(y·Bg)``, normalized to ``‖x‖₂ = ‖Bg‖₂``."""
    if bg.on_tilde or bg.side != "right":
        raise ShiftSideMismatch("Bg must be a plus-side right shift of B")
    if not bh.on_tilde or bh.side != "right":
        raise ShiftSideMismatch("B̃h must be a minus-side right shift of B̃")
    _check_matched(bg, bh)
    x = coproduct(pair, fourier(pair, bh.shift), y @ bg.shift)
    threshold = DEGENERATE_TOL * _norm2(y) * _norm2(bg.shift)
    nx = _norm2(x)
    if nx <= threshold:
        return Degenerate(nx, threshold)
    x = x * (_norm2(bg.shift) / nx)
    return BiShift(
        element=x, base=bg.base, checks=bishift_checks(pair, x), witnesses=(bg, bh, y)
    )


def _check_matched(bg: ShiftCertificate, bh: ShiftCertificate) -> None:
    if bg.base is bh.base:
        return
    a, b = bg.base, bh.base
    if a.subgroup is not None and b.subgroup is not None and a.subgroup != b.subgroup:
        raise MismatchedBiprojection(
            f"shifts of different biprojections: {a.subgroup.members} vs {b.subgroup.members}"
        )
    if not a.element.allclose(b.element):
        raise MismatchedBiprojection("shifts of different biprojections")


def enumerate_bishifts(pair: TwoBoxPair, subgroups: Iterable[Subgroup]) -> list[BiShift]:
    """Every ``(H, χ, g)`` with ``g`` running over right coset representatives."""
    out: list[BiShift] = []
    for h in subgroups:
        chars = one_dim_characters(h)
        for coset in right_cosets(h):
            out.extend(bishift_group(pair, h, chi, coset[0]) for chi in chars)
    return out


# Square relation and uniqueness


def square_relation_check(
    pair: TwoBoxPair, w: AlgebraElement, tol: float = 1e-8
) -> dict[str, float]:
    top, dev = flatness(w)
    if top == 0.0:
        raise ZeroElement("square relation of the zero element")
    if dev > tol:
        raise PreconditionFailed("partial_isometry", flatness=dev)
    w = w / top
    dual = is_extremal(pair, fourier_inv(pair, w), tol)
    if not dual:
        raise PreconditionFailed("inverse_fourier_extremal", **dual.residuals)

    d = pair.delta0
    wb = contragredient(pair, w)
    n2 = _norm2(w) ** 2
    lhs = coproduct(pair, adjoint(w), wb) @ coproduct(pair, w, adjoint(wb))
    rhs = coproduct(pair, adjoint(w) @ w, wb @ adjoint(wb)) * (n2 / d)
    v = coproduct(pair, w, adjoint(wb)) * (d / n2)
    vtop, vdev = flatness(v)
    l1 = p_norm(w, 1)
    return {
        "identity": _frob(lhs - rhs) / max(_frob(rhs), 1e-300),
        "partial_isometry": max(vdev, abs(vtop - 1.0)),
        "l1_preserved": abs(l1 - p_norm(v, 1)) / l1,
    }


def uniqueness_space(
    pair: TwoBoxPair, bg: ShiftCertificate, bh: ShiftCertificate
) -> UniquenessResult:
    """Solutions of ``x·(1 − Bg) = 0`` and ``(1 − B̃h)·ℱ⁻¹(x) = 0`` on plus coordinates."""
    if bg.on_tilde or not bh.on_tilde:
        raise MismatchedBiprojection("expected a plus-side shift of B and a shift of B̃")
    _check_matched(bg, bh)
    plus, minus = pair.plus, pair.minus
    comp_g = plus.identity() - bg.shift
    comp_h = minus.identity() - bh.shift
    columns = []
    for j in range(plus.n_coords):
        e = plus.basis_element(j)
        r1 = (e @ comp_g).data.ravel()
        r2 = (comp_h @ fourier_inv(pair, e)).data.ravel()
        columns.append(np.concatenate([r1, r2]))
    system = np.stack(columns, axis=1)
    kernel = null_space(system, rcond=settings.RANK_REL_TOL)
    dim = int(kernel.shape[1])
    if dim != 1:
        _log.info("uniqueness_dimension", model=pair.label, dimension=dim)
        return UniquenessResult(dim, None, None)
    basis = plus.from_coords(kernel[:, 0])

    refs: list[AlgebraElement] = []
    if pair.model == "group" and bg.coset_rep is not None:
        assert pair.group is not None
        point = np.zeros(pair.n_points, dtype=np.complex128)
        point[bg.coset_rep] = 1.0
        generic = bishift_generic(pair, bg, bh, plus.element(point, check=False))
        if isinstance(generic, BiShift):
            refs.append(generic.element)
        if bh.character is not None and bh.conjugator in (None, pair.group.identity):
            h = bh.character.subgroup
            refs.append(fourier(pair, bishift_group(pair, h, bh.character, bg.coset_rep).element))
    collinearity = max((_collinearity(basis, r) for r in refs), default=None)
    return UniquenessResult(dim, basis, collinearity)


def _collinearity(u: AlgebraElement, v: AlgebraElement) -> float:
    a, b = u.data.ravel(), v.data.ravel()
    proj = b * (np.vdot(b, a) / np.vdot(b, b))
    return float(np.linalg.norm(a - proj) / np.linalg.norm(a))


def positive_biprojection_check(
    pair: TwoBoxPair, x: AlgebraElement
) -> tuple[bool, AlgebraElement]:
    """A positive minimizer with positive Fourier transform is a multiple of a biprojection."""
    fx = fourier(pair, x)
    if not is_positive(x, settings.TOL_INEQUALITY):
        raise PreconditionFailed("positive")
    if not is_positive(fx, settings.TOL_INEQUALITY):
        raise PreconditionFailed("fourier_positive")
    slack = support_size(x) * support_size(fx) - pair.delta0**2
    if abs(slack) > settings.TOL_RANK:
        raise PreconditionFailed("donoho_stark_equality", slack=slack)
    normalized = x / p_norm(x, math.inf)
    return is_biprojection(pair, normalized).ok, normalized


def subset_corollary(pair: TwoBoxPair, subset: Iterable[int]) -> dict[str, bool]:
    """For ``x = Σ_{g∈S} λ(g)``: coset, extremal, ``‖x‖₁ = |G|``, subgroup, positive."""
    _require_group(pair)
    g = pair.group
    assert g is not None
    s = sorted(set(subset))
    if not s:
        raise PreconditionFailed("nonempty_subset")
    coeffs = np.zeros(pair.n_points, dtype=np.complex128)
    coeffs[s] = 1.0
    x = pair.minus.from_coords(coeffs)
    shifted = sorted({g.mul(t, g.inv(s[0])) for t in s})
    return {
        "coset": closure(g, shifted) == tuple(shifted),
        "extremal": is_extremal(pair, x).ok,
        "l1_is_order": abs(p_norm(x, 1) - pair.n_points) <= 1e-8 * pair.n_points,
        "subgroup": closure(g, s) == tuple(s),
        "positive": is_positive(x),
    }


def phased_subset_check(pair: TwoBoxPair, phases: Mapping[int, complex]) -> dict[str, bool]:
    """For ``x = Σ_{g∈S} ω_g λ(g)`` with ``|ω_g| = 1``: extremal iff bi-shift.

    ``biprojection`` is tested on ``x/‖x‖_∞``.
    """
    _require_group(pair)
    if not phases:
        raise PreconditionFailed("nonempty_subset")
    coeffs = np.zeros(pair.n_points, dtype=np.complex128)
    for g, w in phases.items():
        if abs(abs(w) - 1.0) > SHIFT_TOL:
            raise PreconditionFailed("unimodular_phase", modulus=abs(w))
        coeffs[g] = w
    x = pair.minus.from_coords(coeffs)
    return {
        "extremal": is_extremal(pair, x).ok,
        "bishift": bishift_form(pair, x),
        "biprojection": is_biprojection(pair, x / p_norm(x, math.inf)).ok,
    }
