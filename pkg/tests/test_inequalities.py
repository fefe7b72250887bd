from __future__ import annotations

import math

import numpy as np
import pytest

from ncup.config import settings
from ncup.errors import InvalidExponents
from ncup.models.suite import DEFAULT_P_GRID, DEFAULT_YOUNG_TRIPLES, SampleSpec
from ncup.services.algebra import AlgebraElement
from ncup.services.groups import cyclic, symmetric
from ncup.services.inequalities import (
    Measurement,
    Tolerances,
    check_exponents,
    classical_donoho_stark,
    conjugate_exponent,
    coproduct_agreement,
    coproduct_bounds,
    donoho_stark,
    donoho_stark_witness,
    entropy_max,
    fourier_l1_bound,
    generic_not_minimizer,
    group_fixed_point_isomorphism,
    hausdorff_young,
    hirschman_beckner,
    hirschman_beckner_witness,
    holder,
    minimizer_battery,
    plancherel_checks,
    range_domination,
    schur_product,
    trace_change,
    young,
    young_sharpness,
)
from ncup.services.sampling import generic, sample_element
from ncup.services.two_box import (
    TwoBoxPair,
    fixed_point_model,
    group_model,
    right_regular_action,
)

MARGIN_TOL = 1e-9


def _passes(measurements: list[Measurement]) -> bool:
    return all(m.violation <= m.tolerance for m in measurements)


def _by_name(measurements: list[Measurement], name: str) -> Measurement:
    return next(m for m in measurements if m.check == name)


def _plus(pair: TwoBoxPair, values: list[complex]) -> AlgebraElement:
    return pair.plus.element(np.array(values, dtype=np.complex128))


def test_conjugate_exponents() -> None:
    assert conjugate_exponent(2.0) == 2.0
    assert conjugate_exponent(1.0) == math.inf
    assert conjugate_exponent(math.inf) == 1.0
    assert abs(conjugate_exponent(4.0) - 4.0 / 3.0) < 1e-15


def test_hausdorff_young_positive_equality(c4: TwoBoxPair, tol: Tolerances) -> None:
    ms = hausdorff_young(c4, _plus(c4, [1, 2, 3, 4]), [2.0, math.inf], tol)
    assert _passes(ms)
    assert abs(_by_name(ms, "hausdorff_young_positive_inf").margin) <= MARGIN_TOL
    assert abs(_by_name(ms, "hausdorff_young_p2").margin) <= MARGIN_TOL


def test_young_sharpness_witnesses(
    c4: TwoBoxPair, spin3: TwoBoxPair, regular_c3: TwoBoxPair, tol: Tolerances
) -> None:
    for pair in (c4, spin3, regular_c3):
        ms = young_sharpness(pair, DEFAULT_YOUNG_TRIPLES, tol)
        assert len(ms) == 2 * len(DEFAULT_YOUNG_TRIPLES)
        assert _passes(ms)
    plus = _by_name(young_sharpness(c4, [(1.0, 1.0, 1.0)], tol), "young_sharpness_plus[1,1,1]")
    assert abs(plus.margin) <= MARGIN_TOL


def test_donoho_stark_example(c4: TwoBoxPair, tol: Tolerances) -> None:
    x = _plus(c4, [1, 1, 0, 0])
    assert abs(donoho_stark(c4, x, tol)[0].margin - 2.0) <= MARGIN_TOL
    classical = classical_donoho_stark(c4, x, tol)
    assert classical[0].margin == 2.0
    assert classical[1].margin == 0.0


def test_support_and_entropy_witnesses(
    c4: TwoBoxPair, spin3: TwoBoxPair, regular_c3: TwoBoxPair, tol: Tolerances
) -> None:
    for pair in (c4, spin3, regular_c3):
        assert abs(donoho_stark_witness(pair, tol)[0].margin) <= 1e-12
        assert abs(hirschman_beckner_witness(pair, tol)[0].margin) <= MARGIN_TOL


def test_random_elements_satisfy_bounds(
    c6: TwoBoxPair, s3: TwoBoxPair, spin3: TwoBoxPair, regular_c3: TwoBoxPair, tol: Tolerances
) -> None:
    rng = np.random.default_rng(17)
    for pair in (c6, s3, spin3, regular_c3):
        for algebra in (pair.plus, pair.minus):
            x, y, z = (generic(algebra, rng) for _ in range(3))
            pos_a, pos_b = x.H @ x, y.H @ y
            batches = [
                plancherel_checks(pair, x, DEFAULT_P_GRID, tol),
                hausdorff_young(pair, x, DEFAULT_P_GRID, tol),
                young(pair, x, y, DEFAULT_YOUNG_TRIPLES, tol),
                coproduct_bounds(pair, x, y, DEFAULT_P_GRID, tol),
                donoho_stark(pair, x, tol),
                hirschman_beckner(pair, x, tol),
                entropy_max(pair, x, tol),
                schur_product(pair, pos_a, pos_b, tol),
                trace_change(pair, x, y, z, tol),
                range_domination(pair, x, y),
                fourier_l1_bound(pair, pos_a, tol),
                holder(x, y, z, DEFAULT_P_GRID, tol),
                coproduct_agreement(pair, x, y, tol),
            ]
            for ms in batches:
                assert _passes(ms), [m for m in ms if m.violation > m.tolerance]


def test_fourier_l1_bound_equality_for_positive(c4: TwoBoxPair, tol: Tolerances) -> None:
    ms = fourier_l1_bound(c4, _plus(c4, [0, 1, 2, 0]), tol)
    assert [m.check for m in ms] == ["fourier_l1_bound", "fourier_l1_positive"]
    assert abs(ms[1].margin) <= MARGIN_TOL


def test_entropy_max_biunitary(tol: Tolerances) -> None:
    spec = SampleSpec(
        model="group:cyclic:4", count=1, master_seed=5, element_class="biunitary_candidate"
    )
    pair = group_model(cyclic(4))
    ms = entropy_max(pair, sample_element(spec, 0, pair=pair), tol)
    assert abs(_by_name(ms, "entropy_max_unitary").margin) <= MARGIN_TOL
    assert abs(_by_name(ms, "entropy_max_biunitary").margin) <= MARGIN_TOL


def test_group_matches_fixed_point_model(tol: Tolerances) -> None:
    rng = np.random.default_rng(4)
    for group in (cyclic(3), symmetric(3)):
        pair = group_model(group)
        fixed = fixed_point_model(right_regular_action(group))
        x = generic(pair.minus, rng)
        assert _passes(group_fixed_point_isomorphism(pair, fixed, x, tol))


def test_minimizer_battery(c4: TwoBoxPair, tol: Tolerances) -> None:
    ms = minimizer_battery(c4, tol)
    assert _passes(ms), [m for m in ms if m.violation > m.tolerance][:5]
    assert sum(m.check == "bishift_verdicts" for m in ms) == 12
    assert sum(m.check == "subset_coset_extremal" for m in ms) == 15
    assert sum(m.check == "subset_phased_extremal" for m in ms) == 15


def test_generic_not_minimizer(c4: TwoBoxPair, tol: Tolerances) -> None:
    x = generic(c4.minus, np.random.default_rng(8))
    ms = generic_not_minimizer(c4, x, tol)
    assert _passes(ms)
    assert ms[1].margin == 12.0 - 0.5


def test_invalid_exponents(c2: TwoBoxPair, tol: Tolerances) -> None:
    with pytest.raises(InvalidExponents):
        check_exponents(1.0, 1.0, 2.0)
    with pytest.raises(InvalidExponents):
        check_exponents(0.5, 2.0, 1.0)
    x = c2.plus.identity()
    with pytest.raises(InvalidExponents):
        young(c2, x, x, [(2.0, 2.0, 2.0)], tol)


def test_range_domination_reads_rank_thresholds(
    monkeypatch: pytest.MonkeyPatch, c4: TwoBoxPair
) -> None:
    x = _plus(c4, [1, 0.5, 0, 0])
    assert _passes(range_domination(c4, x, x))
    # R(x) shrinks to the peak at 0 while x*x still spans {0, 1, 2}
    monkeypatch.setattr(settings, "RANK_REL_TOL", 0.99)
    assert not _passes(range_domination(c4, x, x))
