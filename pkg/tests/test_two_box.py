from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import pytest

from ncup.config import settings
from ncup.errors import ConfigError, GroupTooLarge, SideMismatch, SizeTooLarge
from ncup.models.element import ElementLiteral
from ncup.services.algebra import AlgebraElement, eigenvalues, is_projection, p_norm, trace
from ncup.services.groups import cyclic
from ncup.services.sampling import generic
from ncup.services.two_box import (
    PermutationAction,
    Side,
    TwoBoxPair,
    contragredient,
    coproduct,
    coproduct_closed_form,
    element_from_literal,
    element_to_literal,
    fixed_point_model,
    fourier,
    fourier_entry_matrix,
    fourier_inv,
    group_model,
    jones_element,
    jones_projection,
    left_regular_action,
    min_orbit_indicator,
    model_from_spec,
    spin_model,
)

ROOT2 = math.sqrt(2)
ROOT3 = math.sqrt(3)
PLANCHEREL_TOL = 1e-10
SIDES: tuple[Side, ...] = ("plus", "minus")


def _delta(pair: TwoBoxPair, k: int) -> AlgebraElement:
    data = np.zeros(pair.n_points, dtype=np.complex128)
    data[k] = 1.0
    return pair.plus.element(data)


def _lam(pair: TwoBoxPair, g: int) -> AlgebraElement:
    coords = np.zeros(pair.n_points, dtype=np.complex128)
    coords[g] = 1.0
    return pair.minus.from_coords(coords)


def _swap_action() -> PermutationAction:
    return PermutationAction(cyclic(2), 3, np.array([[0, 1, 2], [1, 0, 2]]))


def test_group_fourier_rules(c2: TwoBoxPair) -> None:
    assert fourier(c2, _lam(c2, 1)).allclose(_delta(c2, 1) * ROOT2)
    assert fourier(c2, _delta(c2, 0)).allclose(c2.minus.identity() / ROOT2)


def test_fourier_square_is_contragredient(c3: TwoBoxPair) -> None:
    assert contragredient(c3, _delta(c3, 1)).allclose(_delta(c3, 2))


def test_plancherel_and_period(c3: TwoBoxPair, spin3: TwoBoxPair, regular_c3: TwoBoxPair) -> None:
    rng = np.random.default_rng(7)
    for pair in (c3, spin3, regular_c3):
        for side in SIDES:
            algebra = pair.algebra(side)
            for _ in range(10):
                x = generic(algebra, rng)
                fx = fourier(pair, x)
                assert abs(p_norm(fx, 2) - p_norm(x, 2)) <= PLANCHEREL_TOL * p_norm(x, 2)
                assert contragredient(pair, contragredient(pair, x)).allclose(x)
                assert fourier_inv(pair, fx).allclose(x)
                assert fourier_inv(pair, x.H).allclose(fx.H)


def test_group_coproduct_examples(c2: TwoBoxPair, c3: TwoBoxPair) -> None:
    assert coproduct(c3, _delta(c3, 1), _delta(c3, 2)).allclose(_delta(c3, 0) / ROOT3)
    lam1 = _lam(c2, 1)
    assert coproduct(c2, lam1, lam1).allclose(lam1 * ROOT2)
    assert coproduct(c2, _lam(c2, 0), lam1).allclose(c2.minus.zero())


def test_coproduct_closed_forms_agree(
    c6: TwoBoxPair, s3: TwoBoxPair, spin3: TwoBoxPair, regular_c3: TwoBoxPair
) -> None:
    rng = np.random.default_rng(3)
    swap = fixed_point_model(_swap_action())
    for pair in (c6, s3, spin3, regular_c3, swap):
        for algebra in (pair.plus, pair.minus):
            x, y = generic(algebra, rng), generic(algebra, rng)
            assert coproduct(pair, x, y).allclose(coproduct_closed_form(pair, x, y), 1e-9)


def test_coproduct_needs_one_side(c3: TwoBoxPair) -> None:
    with pytest.raises(SideMismatch):
        coproduct(c3, _delta(c3, 0), _lam(c3, 0))


def test_jones_projections(c2: TwoBoxPair, c4: TwoBoxPair, spin3: TwoBoxPair) -> None:
    e = jones_projection(c4, "plus")
    assert e.allclose(_delta(c4, 0))
    assert is_projection(e)
    assert fourier(c4, jones_element(c4, "plus")).allclose(c4.minus.identity())
    em = jones_projection(c2, "minus")
    assert np.allclose(eigenvalues(em), [1.0, 0.0])
    for pair in (c4, spin3):
        for side in SIDES:
            p = jones_projection(pair, side)
            assert is_projection(p)
            assert abs(trace(p) - 1.0) < 1e-12
            je = jones_element(pair, side)
            assert fourier(pair, je).allclose(pair.algebra(pair.other(side)).identity())


def test_spin_fourier_transposes() -> None:
    pair = spin_model(2)
    f = pair.minus.from_coords(np.arange(4).astype(np.complex128))
    expected = np.array([[0, 2], [1, 3]], dtype=np.complex128) / ROOT2
    assert np.allclose(fourier(pair, f).data, expected)
    ident = fourier(pair, pair.plus.identity())
    assert np.allclose(ident.data, ROOT2 * np.eye(2).ravel())


@pytest.mark.parametrize(
    "spec", ["group:cyclic:2", "group:symmetric:3", "spin:2", "fixedpoint:regular:cyclic:3"]
)
def test_fourier_entry_matrix(spec: str) -> None:
    pair = model_from_spec(spec)
    rng = np.random.default_rng(3)
    for side in SIDES:
        src, dst = pair.algebra(side), pair.algebra(pair.other(side))
        m = fourier_entry_matrix(pair, side)
        assert m.shape == (dst.dim**2, src.dim**2)
        x = generic(src, rng)
        assert np.allclose(m @ x.mat.ravel(), fourier(pair, x).mat.ravel(), atol=1e-12)


def test_fourier_entry_blocks_of_cyclic2(c2: TwoBoxPair) -> None:
    m = fourier_entry_matrix(c2, "plus")
    assert m.shape == (4, 4)
    assert np.allclose(m[:, 3], np.array([0, 1, 1, 0]) / ROOT2)
    assert not m[:, 1].any() and not m[:, 2].any()
    assert fourier_entry_matrix(c2, "minus").shape == (4, 4)


def test_spin_constants(spin3: TwoBoxPair) -> None:
    assert spin3.delta == ROOT3
    assert abs(spin3.delta0 - 1 / ROOT3) < 1e-15
    assert not spin3.irreducible


def test_regular_action_commutant() -> None:
    pair = fixed_point_model(left_regular_action(cyclic(4)))
    assert pair.plus.n_coords == 4
    assert pair.delta0 == 2.0
    assert pair.irreducible


def test_non_transitive_action() -> None:
    action = _swap_action()
    assert sorted(len(o) for o in action.orbits()) == [1, 2]
    assert action.min_orbit_size == 1
    pair = fixed_point_model(action)
    assert abs(pair.delta0 - 1 / ROOT3) < 1e-15
    w = min_orbit_indicator(pair)
    assert is_projection(w)
    assert abs(trace(w) - 1.0) < 1e-12


def test_bad_action_rejected() -> None:
    with pytest.raises(ConfigError):
        PermutationAction(cyclic(2), 3, np.array([[0, 1, 2], [1, 1, 2]]))
    with pytest.raises(ConfigError):
        PermutationAction(cyclic(3), 3, np.array([[0, 1, 2], [1, 0, 2], [1, 0, 2]]))


def test_model_specs(tmp_path: Path) -> None:
    for spec in ("group:cyclic:6", "spin:3", "fixedpoint:regular:cyclic:3", "fixedpoint:trivial:3"):
        assert model_from_spec(spec).label == spec
    assert model_from_spec("fixedpoint:trivial:3").delta0 == spin_model(3).delta0
    action = tmp_path / "swap.json"
    action.write_text(
        json.dumps({"group": "cyclic:2", "points": 3, "perms": [[0, 1, 2], [1, 0, 2]]}),
        encoding="utf-8",
    )
    pair = model_from_spec(f"fixedpoint:{action}")
    assert pair.n_points == 3
    assert pair.model == "fixed_point"
    for bad in ("torus:3", "spin:x", "group", "fixedpoint:trivial:x"):
        with pytest.raises(ConfigError):
            model_from_spec(bad)


def test_size_bounds(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setattr(settings, "MAX_GROUP_ORDER", 4)
    monkeypatch.setattr(settings, "MAX_SPIN_POINTS", 2)
    with pytest.raises(GroupTooLarge):
        group_model(cyclic(6))
    with pytest.raises(SizeTooLarge):
        spin_model(3)


def test_element_literals(c4: TwoBoxPair, spin3: TwoBoxPair) -> None:
    rng = np.random.default_rng(9)
    for pair in (c4, spin3):
        for algebra in (pair.plus, pair.minus):
            x = generic(algebra, rng)
            back = element_from_literal(pair, element_to_literal(pair, x))
            assert back.allclose(x, 1e-15)
    lit = ElementLiteral(algebra=c4.label, side="minus", coeffs={"1": (1.0, 0.0)})
    assert element_from_literal(c4, lit).allclose(_lam(c4, 1))
    with pytest.raises(ConfigError):
        element_from_literal(spin3, lit)
    with pytest.raises(ConfigError):
        plus = ElementLiteral(algebra=c4.label, side="plus", coeffs={"1": (1.0, 0.0)})
        element_from_literal(c4, plus)
