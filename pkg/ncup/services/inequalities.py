"""Check kernels: each returns signed margins for one sample or one constructed witness.

Inequality margins are ``(rhs - lhs) / scale`` and are violated when negative. Equality
margins are signed residuals and are violated by their absolute value.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from ..config import settings
from ..errors import InvalidExponents
from ..models.report import CheckKind
from .algebra import (
    AlgebraElement,
    adjoint,
    eigenvalues,
    entropy,
    flatness,
    is_positive,
    p_norm,
    range_projection,
    rank,
    support_size,
    trace,
)
from .extremizers import (
    biprojection_from_subgroup,
    coset_shift,
    enumerate_bishifts,
    enumerate_shifts,
    is_biunitary,
    is_extremal,
    minimizer_report,
    positive_biprojection_check,
    square_relation_check,
    phased_subset_check,
    subset_corollary,
    tilde_shift,
    uniqueness_space,
)
from .groups import enumerate_subgroups, one_dim_characters, right_cosets, whole_group
from .two_box import (
    TwoBoxPair,
    contragredient,
    coproduct,
    coproduct_closed_form,
    fourier,
    fourier_inv,
    min_orbit_indicator,
)

PQR_TOL = 1e-7
COLLINEARITY_TOL = 1e-9
GENERIC_DS_SLACK = 0.5
HOLDER_TRIPLES: tuple[tuple[float, float, float], ...] = (
    (3.0, 3.0, 3.0),
    (2.0, 4.0, 4.0),
    (2.0, 2.0, math.inf),
    (1.0, math.inf, math.inf),
)


@dataclass(frozen=True)
class Tolerances:
    equality: float
    inequality: float
    rank: float

    @classmethod
    def from_settings(cls) -> Tolerances:
        return cls(settings.TOL_EQUALITY, settings.TOL_INEQUALITY, settings.TOL_RANK)


@dataclass(frozen=True)
class Measurement:
    check: str
    margin: float
    kind: CheckKind
    tolerance: float

    @property
    def violation(self) -> float:
        if self.kind == "equality":
            return abs(self.margin)
        return max(0.0, -self.margin)


def fmt_p(p: float) -> str:
    return "inf" if math.isinf(p) else f"{p:g}"


def conjugate_exponent(p: float) -> float:
    if math.isinf(p):
        return 1.0
    if p == 1.0:
        return math.inf
    return p / (p - 1.0)


def _rel(rhs: float, lhs: float) -> float:
    return (rhs - lhs) / max(abs(rhs), 1e-300)


def _frob(x: AlgebraElement) -> float:
    return float(np.linalg.norm(x.data))


def _eq(check: str, residual: float, tol: float) -> Measurement:
    return Measurement(check, residual, "equality", tol)


def _ineq(check: str, margin: float, tol: float) -> Measurement:
    return Measurement(check, margin, "inequality", tol)


# Plancherel and the Fourier transform


def plancherel_checks(
    pair: TwoBoxPair, x: AlgebraElement, p_grid: Sequence[float], tol: Tolerances
) -> list[Measurement]:
    nx = p_norm(x, 2)
    fx = fourier(pair, x)
    scale = max(_frob(x), 1e-300)
    period = fourier(pair, fourier(pair, contragredient(pair, x)))
    xbar = contragredient(pair, x)
    out = [
        _eq("plancherel", (p_norm(fx, 2) - nx) / nx, tol.equality),
        _eq("fourier_period", _frob(period - x) / scale, tol.equality),
        _eq("fourier_inverse", _frob(fourier_inv(pair, fx) - x) / scale, tol.equality),
        _eq(
            "fourier_adjoint",
            _frob(fourier_inv(pair, adjoint(x)) - adjoint(fx)) / scale,
            tol.equality,
        ),
    ]
    worst = max(abs(p_norm(xbar, p) - p_norm(x, p)) / p_norm(x, p) for p in p_grid)
    out.append(_eq("contragredient_norms", worst, tol.equality))
    return out


def group_fixed_point_isomorphism(
    pair: TwoBoxPair, fixed: TwoBoxPair, x: AlgebraElement, tol: Tolerances
) -> list[Measurement]:
    """``x`` on the group minus side equals a plus-side element of the right-regular
    fixed-point model; the two Fourier transforms agree through ``(i, j) ↦ i·j⁻¹``."""
    g = pair.group
    assert g is not None
    y = fixed.plus.element(x.data)
    fg = fourier(pair, x).data
    ff = fourier(fixed, y).data.reshape(pair.n_points, pair.n_points)
    residual = float(np.linalg.norm(ff - fg[g.table[:, g.inverse]])) / max(
        float(np.linalg.norm(ff)), 1e-300
    )
    norms = max(abs(p_norm(fourier(pair, x), p) - p_norm(fourier(fixed, y), p)) for p in (1.0, 2.0))
    return [
        _eq("group_fixed_point_fourier", residual, tol.equality),
        _eq("group_fixed_point_norms", norms / max(p_norm(x, 2), 1e-300), tol.equality),
    ]


# Hausdorff-Young and Young


def hausdorff_young(
    pair: TwoBoxPair, x: AlgebraElement, p_grid: Sequence[float], tol: Tolerances
) -> list[Measurement]:
    """``‖ℱ(x)‖_p ≤ (1/δ₀)^(1-2/p) ‖x‖_q`` with ``1/p + 1/q = 1``."""
    fx = fourier(pair, x)
    out: list[Measurement] = []
    for p in p_grid:
        q = conjugate_exponent(p)
        power = 1.0 if math.isinf(p) else 1.0 - 2.0 / p
        lhs = p_norm(fx, p)
        rhs = pair.delta0 ** (-power) * p_norm(x, q)
        out.append(_ineq(f"hausdorff_young[p={fmt_p(p)}]", _rel(rhs, lhs), tol.inequality))
        if p == 2.0:
            out.append(_eq("hausdorff_young_p2", _rel(rhs, lhs), tol.equality))
        if math.isinf(p) and pair.irreducible and is_positive(x):
            out.append(_eq("hausdorff_young_positive_inf", _rel(rhs, lhs), tol.equality))
    return out


def check_exponents(p: float, q: float, r: float) -> None:
    if min(p, q, r) < 1 or abs(1 / p + 1 / q - 1 / r - 1) > 1e-12:
        raise InvalidExponents(f"(p, q, r) = {(p, q, r)} violates 1/p + 1/q = 1/r + 1")


def young(
    pair: TwoBoxPair,
    x: AlgebraElement,
    y: AlgebraElement,
    triples: Iterable[tuple[float, float, float]],
    tol: Tolerances,
    prefix: str = "young",
) -> list[Measurement]:
    """``‖x*y‖_r ≤ ‖x‖_p ‖y‖_q / δ₀``."""
    xy = coproduct(pair, x, y)
    out = []
    for p, q, r in triples:
        check_exponents(p, q, r)
        rhs = p_norm(x, p) * p_norm(y, q) / pair.delta0
        name = f"{prefix}[{fmt_p(p)},{fmt_p(q)},{fmt_p(r)}]"
        out.append(_ineq(name, _rel(rhs, p_norm(xy, r)), tol.inequality))
    return out


def coproduct_bounds(
    pair: TwoBoxPair,
    x: AlgebraElement,
    y: AlgebraElement,
    p_grid: Sequence[float],
    tol: Tolerances,
) -> list[Measurement]:
    xy = coproduct(pair, x, y)
    d = pair.delta0
    y1 = p_norm(y, 1)
    out = [
        _ineq(
            "coproduct_inf_l1",
            _rel(p_norm(x, math.inf) * y1 / d, p_norm(xy, math.inf)),
            tol.inequality,
        ),
        _ineq("coproduct_l1_l1", _rel(p_norm(x, 1) * y1 / d, p_norm(xy, 1)), tol.inequality),
    ]
    for p in p_grid:
        q = conjugate_exponent(p)
        lhs = _rel(p_norm(x, p) * y1 / d, p_norm(xy, p))
        out.append(_ineq(f"coproduct_p_l1[p={fmt_p(p)}]", lhs, tol.inequality))
        out.append(
            _ineq(
                f"coproduct_inf_dual[p={fmt_p(p)}]",
                _rel(p_norm(x, p) * p_norm(y, q) / d, p_norm(xy, math.inf)),
                tol.inequality,
            )
        )
    return out


def young_sharpness(
    pair: TwoBoxPair, triples: Iterable[tuple[float, float, float]], tol: Tolerances
) -> list[Measurement]:
    """Equality for ``x = y = w`` and ``x = y = ℱ(w)`` with ``w`` the minimal-orbit indicator."""
    w = min_orbit_indicator(pair)
    out: list[Measurement] = []
    for side, v in (("plus", w), ("minus", fourier(pair, w))):
        for m in young(pair, v, v, triples, tol, prefix=f"young_sharpness_{side}"):
            out.append(_eq(m.check, m.margin, tol.equality))
    return out


# Support and entropy


def donoho_stark(pair: TwoBoxPair, x: AlgebraElement, tol: Tolerances) -> list[Measurement]:
    product = support_size(x) * support_size(fourier(pair, x))
    return [_ineq("donoho_stark", product - pair.delta0**2, tol.rank)]


def donoho_stark_witness(pair: TwoBoxPair, tol: Tolerances) -> list[Measurement]:
    w = min_orbit_indicator(pair)
    product = support_size(w) * support_size(fourier(pair, w))
    return [_eq("donoho_stark_witness", product - pair.delta0**2, tol.rank)]


def classical_donoho_stark(
    pair: TwoBoxPair, x: AlgebraElement, tol: Tolerances
) -> list[Measurement]:
    """Cyclic groups: ``|supp f|·|supp f̂| ≥ |G|`` with ``numpy.fft``."""
    f = x.data
    spectrum = np.fft.fft(f)
    rel = settings.RANK_REL_TOL

    def _supp(v: np.ndarray) -> int:
        a = np.abs(v)
        top = float(a.max())
        return 0 if top == 0.0 else int(np.count_nonzero(a > rel * top))

    sf, sft = _supp(f), _supp(spectrum)
    return [
        _ineq("classical_donoho_stark", float(sf * sft - pair.n_points), tol.rank),
        _eq("dft_support_matches_fourier", float(rank(fourier(pair, x)) - sft), tol.rank),
    ]


def hirschman_beckner(pair: TwoBoxPair, x: AlgebraElement, tol: Tolerances) -> list[Measurement]:
    """Normalized form on ``y = x/‖x‖₂`` plus the support chain ``log S(y) ≥ H(|y|²)``."""
    y = x / p_norm(x, 2)
    fy = fourier(pair, y)
    hy, hf = entropy(y), entropy(fy)
    ly, lf = math.log(support_size(y)), math.log(support_size(fy))
    two_log = 2 * math.log(pair.delta0)
    return [
        _ineq("hirschman_beckner", hy + hf - two_log, tol.equality),
        _ineq("support_entropy", ly - hy, tol.inequality),
        _ineq("support_entropy_fourier", lf - hf, tol.inequality),
        _ineq("support_entropy_chain", (ly + lf) - (hy + hf), tol.inequality),
    ]


def hirschman_beckner_witness(pair: TwoBoxPair, tol: Tolerances) -> list[Measurement]:
    w = min_orbit_indicator(pair)
    y = w / p_norm(w, 2)
    margin = entropy(y) + entropy(fourier(pair, y)) - 2 * math.log(pair.delta0)
    return [_eq("hirschman_beckner_witness", margin, tol.equality)]


def entropy_max(pair: TwoBoxPair, x: AlgebraElement, tol: Tolerances) -> list[Measurement]:
    """For ``‖z‖₂ = δ``: ``H(|z|²) ≤ 0`` and ``H(|z|²) + H(|ℱ(z)|²) ≤ 0``."""
    z = x * (pair.delta / p_norm(x, 2))
    hz, hf = entropy(z), entropy(fourier(pair, z))
    out = [
        _ineq("entropy_max", -hz, tol.inequality),
        _ineq("entropy_max_sum", -(hz + hf), tol.inequality),
    ]
    bu = is_biunitary(pair, z, tol.equality)
    if bu.residuals["unitary"] <= tol.equality:
        out.append(_eq("entropy_max_unitary", hz, tol.equality))
    if bu:
        out.append(_eq("entropy_max_biunitary", hz + hf, tol.equality))
    return out


# Structure lemmas


def schur_product(
    pair: TwoBoxPair, a: AlgebraElement, b: AlgebraElement, tol: Tolerances
) -> list[Measurement]:
    """``a*b ≥ 0`` for positive ``a, b``."""
    c = coproduct(pair, a, b)
    c = (c + adjoint(c)) * 0.5
    top = p_norm(c, math.inf)
    low = float(eigenvalues(c)[-1]) if top > 0 else 0.0
    return [_ineq("schur_product", low / max(top, 1e-300), tol.inequality)]


def trace_change(
    pair: TwoBoxPair, a: AlgebraElement, b: AlgebraElement, c: AlgebraElement, tol: Tolerances
) -> list[Measurement]:
    """The six rotated forms of ``tr((a*b)c̄)`` agree."""

    def bar(v: AlgebraElement) -> AlgebraElement:
        return contragredient(pair, v)

    def cp(u: AlgebraElement, v: AlgebraElement) -> AlgebraElement:
        return coproduct(pair, u, v)

    values = [
        trace(cp(a, b) @ bar(c)),
        trace(cp(b, c) @ bar(a)),
        trace(cp(c, a) @ bar(b)),
        trace(cp(bar(c), bar(b)) @ a),
        trace(cp(bar(a), bar(c)) @ b),
        trace(cp(bar(b), bar(a)) @ c),
    ]
    scale = max(p_norm(a, 2) * p_norm(b, 2) * p_norm(c, 2), 1e-300)
    spread = max(abs(v - values[0]) for v in values) / scale
    return [_eq("trace_change", spread, tol.inequality)]


def range_domination(
    pair: TwoBoxPair, x: AlgebraElement, y: AlgebraElement
) -> list[Measurement]:
    """``R(x*y) ≤ R(R(x)*R(y))`` as ``‖PQ - P‖``.

    ``P`` is cut at ``TOL_RANK``, the looser threshold; ``Q`` at ``RANK_REL_TOL``.
    """
    p = range_projection(coproduct(pair, x, y), settings.TOL_RANK)
    q = range_projection(
        coproduct(pair, range_projection(x), range_projection(y)), settings.RANK_REL_TOL
    )
    residual = _frob(p @ q - p) / max(_frob(p), 1.0)
    return [_eq("range_domination", residual, PQR_TOL)]


def fourier_l1_bound(pair: TwoBoxPair, x: AlgebraElement, tol: Tolerances) -> list[Measurement]:
    """``‖ℱ(x)‖_∞ ≤ ‖x‖₁/δ₀``, with equality for positive ``x`` on irreducible pairs."""
    rhs = p_norm(x, 1) / pair.delta0
    margin = _rel(rhs, p_norm(fourier(pair, x), math.inf))
    out = [_ineq("fourier_l1_bound", margin, tol.inequality)]
    if pair.irreducible and is_positive(x):
        out.append(_eq("fourier_l1_positive", margin, tol.equality))
    return out


def holder(
    x: AlgebraElement,
    y: AlgebraElement,
    z: AlgebraElement,
    p_grid: Sequence[float],
    tol: Tolerances,
) -> list[Measurement]:
    out = []
    for p in p_grid:
        q = conjugate_exponent(p)
        rhs = p_norm(x, p) * p_norm(y, q)
        margin = _rel(rhs, abs(trace(x @ y)))
        out.append(_ineq(f"holder_trace[p={fmt_p(p)}]", margin, tol.inequality))
        if p >= 2:
            r = p / 2
            rhs2 = p_norm(x, p) * p_norm(y, p)
            margin = _rel(rhs2, p_norm(x @ y, r))
            out.append(_ineq(f"holder_product[p={fmt_p(p)}]", margin, tol.inequality))
    for p, q, s in HOLDER_TRIPLES:
        rhs = p_norm(x, p) * p_norm(y, q) * p_norm(z, s)
        name = f"holder_triple[{fmt_p(p)},{fmt_p(q)},{fmt_p(s)}]"
        out.append(_ineq(name, _rel(rhs, abs(trace(x @ y @ z))), tol.inequality))
    return out


def coproduct_agreement(
    pair: TwoBoxPair, x: AlgebraElement, y: AlgebraElement, tol: Tolerances
) -> list[Measurement]:
    pulled = coproduct(pair, x, y)
    closed = coproduct_closed_form(pair, x, y)
    residual = _frob(pulled - closed) / max(_frob(pulled), p_norm(x, 2) * p_norm(y, 2), 1e-300)
    return [_eq("coproduct_closed_form", residual, tol.equality)]


# Minimizers (group models)


def minimizer_battery(
    pair: TwoBoxPair, tol: Tolerances, corollary_max_order: int = 8
) -> list[Measurement]:
    """Every constructed bi-shift, shift enumeration and uniqueness space of a group model."""
    g = pair.group
    assert g is not None
    subgroups = enumerate_subgroups(g)
    out: list[Measurement] = []

    for bs in enumerate_bishifts(pair, subgroups):
        x = bs.element
        rep = minimizer_report(pair, x)
        out.append(_eq("bishift_verdicts", 0.0 if rep.all_true else 1.0, 0.0))
        out.append(_eq("bishift_donoho_stark", rep.ds_slack, tol.rank))
        out.append(_eq("bishift_hirschman_beckner", rep.hb_margin, tol.equality))
        out.append(_eq("bishift_extremal", bs.checks["extremal_margin"], tol.equality))
        flat = max(bs.checks["flatness"], bs.checks["fourier_flatness"])
        out.append(_eq("bishift_flatness", flat, tol.equality))
        for name, value in square_relation_check(pair, x, tol.equality).items():
            out.append(_eq(f"square_relation_{name}", value, tol.equality))
        for name, v in (("adjoint", adjoint(x)), ("contragredient", contragredient(pair, x))):
            margin = is_extremal(pair, v).residuals["margin"]
            out.append(_eq(f"extremal_{name}", margin, tol.equality))
            out.append(_eq(f"l1_{name}", p_norm(v, 1) / p_norm(x, 1) - 1.0, tol.equality))

    for h in subgroups:
        base = biprojection_from_subgroup(pair, h)
        right = enumerate_shifts(pair, base, "right")
        plus_right = [c for c in right if not c.on_tilde]
        minus_right = [c for c in right if c.on_tilde]
        out.append(_eq("shift_count_plus", float(len(plus_right) - h.index), 0.0))
        n_chars = len(one_dim_characters(h))
        out.append(_eq("shift_count_minus", float(len(minus_right) - n_chars), 0.0))
        if g.is_abelian():
            left = enumerate_shifts(pair, base, "left")
            reps = {c.coset_rep for c in plus_right}
            same = {c.coset_rep for c in left if not c.on_tilde} == reps
            out.append(_eq("shift_left_right", 0.0 if same else 1.0, 0.0))
        ok, _ = positive_biprojection_check(pair, base.element * 2.0)
        out.append(_eq("positive_biprojection", 0.0 if ok else 1.0, 0.0))

        for coset in right_cosets(h):
            bg = coset_shift(pair, base, coset[0])
            for chi in one_dim_characters(h):
                bh = tilde_shift(pair, base, chi)
                if bg is None or bh is None:
                    out.append(_eq("uniqueness_dimension", 1.0, 0.0))
                    continue
                result = uniqueness_space(pair, bg, bh)
                out.append(_eq("uniqueness_dimension", float(result.dimension - 1), 0.0))
                if result.collinearity is not None:
                    c = result.collinearity
                    out.append(_eq("uniqueness_collinearity", c, COLLINEARITY_TOL))

    if pair.n_points <= corollary_max_order:
        # modulation by a linear character is a trace-preserving automorphism
        chi = one_dim_characters(whole_group(g))[-1]
        for size in range(1, pair.n_points + 1):
            for subset in itertools.combinations(range(pair.n_points), size):
                flags = subset_corollary(pair, subset)
                coset_ok = flags["coset"] == flags["extremal"] == flags["l1_is_order"]
                out.append(_eq("subset_coset_extremal", 0.0 if coset_ok else 1.0, 0.0))
                sub_ok = flags["subgroup"] == flags["positive"]
                out.append(_eq("subset_subgroup_positive", 0.0 if sub_ok else 1.0, 0.0))
                phased = phased_subset_check(pair, {k: chi.value(k) for k in subset})
                ph_ok = phased["extremal"] == phased["bishift"] == flags["coset"]
                out.append(_eq("subset_phased_extremal", 0.0 if ph_ok else 1.0, 0.0))
    return out


def generic_not_minimizer(
    pair: TwoBoxPair, x: AlgebraElement, tol: Tolerances
) -> list[Measurement]:
    rep = minimizer_report(pair, x)
    return [
        _eq("generic_verdicts", 0.0 if rep.all_false else 1.0, 0.0),
        _ineq("generic_donoho_stark_slack", rep.ds_slack - GENERIC_DS_SLACK, tol.inequality),
    ]
