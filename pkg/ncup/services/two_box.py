from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Literal

import numpy as np
from numpy.typing import NDArray
from pydantic import ValidationError

from ..config import settings
from ..errors import ConfigError, GroupTooLarge, SideMismatch, SizeTooLarge
from ..logging import get_logger
from ..models.element import Complex, ElementLiteral
from .algebra import AlgebraElement, ComplexArray, IntArray, StarAlgebra, multiply
from .groups import FiniteGroup, build_group, cyclic, load_group

_log = get_logger()

Side = Literal["plus", "minus"]
ModelKind = Literal["group", "spin", "fixed_point"]


@dataclass(frozen=True, eq=False)
class PermutationAction:
    """``perms[g][i]`` is the image of point ``i`` under ``g``."""

    group: FiniteGroup
    point_count: int
    perms: IntArray

    def __post_init__(self) -> None:
        p = self.perms
        if p.shape != (self.group.order, self.point_count):
            raise ConfigError(f"perms must have shape {(self.group.order, self.point_count)}")
        full = np.arange(self.point_count)
        if not np.array_equal(p[self.group.identity], full):
            raise ConfigError("identity must act trivially")
        for g in range(self.group.order):
            if not np.array_equal(np.sort(p[g]), full):
                raise ConfigError(f"perms[{g}] is not a permutation")
            for h in range(self.group.order):
                if not np.array_equal(p[g][p[h]], p[self.group.mul(g, h)]):
                    raise ConfigError(f"not a homomorphism at ({g}, {h})")

    def orbits(self) -> list[tuple[int, ...]]:
        seen: set[int] = set()
        out: list[tuple[int, ...]] = []
        for i in range(self.point_count):
            if i not in seen:
                orb = tuple(sorted({int(v) for v in self.perms[:, i]}))
                seen.update(orb)
                out.append(orb)
        return out

    @property
    def min_orbit_size(self) -> int:
        return min(len(o) for o in self.orbits())


def left_regular_action(group: FiniteGroup) -> PermutationAction:
    return PermutationAction(group, group.order, group.table.copy())


def right_regular_action(group: FiniteGroup) -> PermutationAction:
    """``g`` sends ``h`` to ``h·g⁻¹``; its commutant is the left regular representation."""
    perms = group.table[:, group.inverse].T.copy()
    return PermutationAction(group, group.order, perms)


def trivial_action(n: int) -> PermutationAction:
    return PermutationAction(cyclic(1), n, np.arange(n, dtype=np.int64)[None, :])


def load_action(path: str) -> PermutationAction:
    from ..models.group import ActionFile

    try:
        doc = ActionFile.model_validate_json(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read action file {path}: {exc}") from exc
    except ValidationError as exc:
        raise ConfigError(f"invalid action file {path}: {exc}") from exc
    if isinstance(doc.group, str):
        group = load_group(doc.group)
    else:
        group = build_group(doc.group.table, doc.group.labels, name=Path(path).stem)
    return PermutationAction(group, doc.points, np.asarray(doc.perms, dtype=np.int64))


def pair_orbit_classes(perms: IntArray, n: int) -> IntArray:
    """Orbit index of every pair ``(i, j)`` under the diagonal action, in row-major order."""
    classes = -np.ones((n, n), dtype=np.int64)
    nxt = 0
    for i in range(n):
        for j in range(n):
            if classes[i, j] < 0:
                classes[perms[:, i], perms[:, j]] = nxt
                nxt += 1
    return classes


@dataclass(frozen=True, eq=False)
class TwoBoxPair:
    """The plus and minus 2-box spaces with the Fourier transform on coordinates.

    ``f_plus`` maps plus coordinates to minus coordinates, ``f_minus`` the reverse.
    ``delta0`` is the constant used by every uncertainty bound.
    """

    label: str
    model: ModelKind
    plus: StarAlgebra
    minus: StarAlgebra
    delta: float
    delta0: float
    f_plus: ComplexArray
    f_minus: ComplexArray
    n_points: int
    group: FiniteGroup | None = None
    action: PermutationAction | None = None

    @cached_property
    def f_plus_inv(self) -> ComplexArray:
        return np.linalg.inv(self.f_plus)

    @cached_property
    def f_minus_inv(self) -> ComplexArray:
        return np.linalg.inv(self.f_minus)

    @property
    def irreducible(self) -> bool:
        return math.isclose(self.delta0, self.delta, rel_tol=1e-12)

    def side_of(self, x: AlgebraElement) -> Side:
        if x.algebra is self.plus:
            return "plus"
        if x.algebra is self.minus:
            return "minus"
        raise SideMismatch(f"element of {x.algebra.label} is not in {self.label}")

    def algebra(self, side: Side) -> StarAlgebra:
        return self.plus if side == "plus" else self.minus

    def other(self, side: Side) -> Side:
        return "minus" if side == "plus" else "plus"


def group_model(group: FiniteGroup) -> TwoBoxPair:
    n = group.order
    if n > settings.MAX_GROUP_ORDER:
        raise GroupTooLarge(f"|G| = {n} exceeds bound {settings.MAX_GROUP_ORDER}")
    label = f"group:{group.name}"
    plus = StarAlgebra(n, 1.0, "diagonal", f"{label}/plus")
    classes = group.table[:, group.inverse]  # entry (k, h) of λ(g) is 1 iff k·h⁻¹ = g
    minus = StarAlgebra(
        n, 1.0, "commutant", f"{label}/minus", classes=classes,
        perms=right_regular_action(group).perms,
    )
    root = math.sqrt(n)
    f_plus = np.zeros((n, n), dtype=np.complex128)
    f_plus[group.inverse, np.arange(n)] = 1.0 / root
    f_minus = root * np.eye(n, dtype=np.complex128)
    _log.debug("model_built", model=label, dim=n)
    return TwoBoxPair(label, "group", plus, minus, root, root, f_plus, f_minus, n, group, None)


def spin_model(n: int) -> TwoBoxPair:
    if not 1 <= n <= settings.MAX_SPIN_POINTS:
        raise SizeTooLarge(f"spin model needs 1 <= n <= {settings.MAX_SPIN_POINTS}, got {n}")
    label = f"spin:{n}"
    plus = StarAlgebra(n, 1.0, "full", f"{label}/plus")
    minus = StarAlgebra(n * n, 1.0 / n, "diagonal", f"{label}/minus")
    root = math.sqrt(n)
    idx = np.arange(n * n)
    transposed = (idx % n) * n + idx // n
    f_plus = root * np.eye(n * n, dtype=np.complex128)
    f_minus = np.zeros((n * n, n * n), dtype=np.complex128)
    f_minus[idx, transposed] = 1.0 / root
    _log.debug("model_built", model=label, dim=n)
    return TwoBoxPair(label, "spin", plus, minus, root, 1.0 / root, f_plus, f_minus, n)


def fixed_point_model(action: PermutationAction, label: str | None = None) -> TwoBoxPair:
    n = action.point_count
    if n > settings.MAX_SPIN_POINTS:
        raise SizeTooLarge(f"fixed-point model needs n <= {settings.MAX_SPIN_POINTS}, got {n}")
    label = label or f"fixedpoint:{action.group.name}@{n}"
    perms = action.perms
    classes = pair_orbit_classes(perms, n)
    pair_perms = perms[:, :, None] * n + perms[:, None, :]
    plus = StarAlgebra(n, 1.0, "commutant", f"{label}/plus", classes=classes, perms=perms)
    minus = StarAlgebra(
        n * n, 1.0 / n, "diagonal", f"{label}/minus",
        classes=classes.ravel(), perms=pair_perms.reshape(len(perms), n * n),
    )
    m = plus.n_coords
    root = math.sqrt(n)
    f_plus = root * np.eye(m, dtype=np.complex128)
    f_minus = np.zeros((m, m), dtype=np.complex128)
    f_minus[classes, classes.T] = 1.0 / root
    n0 = action.min_orbit_size
    _log.debug("model_built", model=label, dim=n, coords=m, min_orbit=n0)
    return TwoBoxPair(
        label, "fixed_point", plus, minus, root, n0 / root, f_plus, f_minus, n,
        action.group, action,
    )


def model_from_spec(spec: str) -> TwoBoxPair:
    """``group:<group>``, ``spin:<n>``, ``fixedpoint:regular:<group>``,
    ``fixedpoint:trivial:<n>`` or ``fixedpoint:<action.json>``."""
    kind, _, rest = spec.strip().partition(":")
    kind = kind.lower()
    if not rest:
        raise ConfigError(f"model spec needs a parameter: {spec!r}")
    if kind == "group":
        pair = group_model(load_group(rest))
    elif kind == "spin":
        try:
            n = int(rest)
        except ValueError as exc:
            raise ConfigError(f"spin model needs an integer: {spec!r}") from exc
        pair = spin_model(n)
    elif kind == "fixedpoint":
        sub, _, arg = rest.partition(":")
        if sub == "regular" and arg:
            action = left_regular_action(load_group(arg))
        elif sub == "trivial" and arg:
            try:
                action = trivial_action(int(arg))
            except ValueError as exc:
                raise ConfigError(f"trivial action needs an integer: {spec!r}") from exc
        else:
            action = load_action(rest)
        pair = fixed_point_model(action, label=spec)
    else:
        raise ConfigError(f"unknown model kind {kind!r} in {spec!r}")
    return _relabel(pair, spec)


def _relabel(pair: TwoBoxPair, spec: str) -> TwoBoxPair:
    if pair.label == spec:
        return pair
    return TwoBoxPair(
        spec, pair.model, pair.plus, pair.minus, pair.delta, pair.delta0,
        pair.f_plus, pair.f_minus, pair.n_points, pair.group, pair.action,
    )


# Fourier calculus


def fourier(pair: TwoBoxPair, x: AlgebraElement) -> AlgebraElement:
    if pair.side_of(x) == "plus":
        return pair.minus.from_coords(pair.f_plus @ x.coords())
    return pair.plus.from_coords(pair.f_minus @ x.coords())


def fourier_inv(pair: TwoBoxPair, x: AlgebraElement) -> AlgebraElement:
    if pair.side_of(x) == "plus":
        return pair.minus.from_coords(pair.f_minus_inv @ x.coords())
    return pair.plus.from_coords(pair.f_plus_inv @ x.coords())


def fourier_entry_matrix(pair: TwoBoxPair, side: Side) -> ComplexArray:
    """``ℱ`` from ``side`` acting on row-major matrix entries, shape ``(d_out², d_in²)``.

    Column ``i·d + j`` is the image of the matrix unit ``e_ij`` read through the source
    coordinates; off-diagonal units of a diagonal algebra map to zero.
    """
    src, dst = (pair.plus, pair.minus) if side == "plus" else (pair.minus, pair.plus)
    f = pair.f_plus if side == "plus" else pair.f_minus
    d = src.dim
    read = np.zeros((src.n_coords, d * d), dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            if src.is_diagonal:
                if i != j:
                    continue
                unit = np.zeros(d, dtype=np.complex128)
                unit[i] = 1.0
            else:
                unit = np.zeros((d, d), dtype=np.complex128)
                unit[i, j] = 1.0
            read[:, i * d + j] = src.coords(unit)
    write = np.stack([dst.basis_element(k).mat.ravel() for k in range(dst.n_coords)], axis=1)
    out: ComplexArray = write @ f @ read
    return out


def contragredient(pair: TwoBoxPair, x: AlgebraElement) -> AlgebraElement:
    return fourier(pair, fourier(pair, x))


def coproduct(pair: TwoBoxPair, x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    """``x * y = ℱ(ℱ⁻¹(x)·ℱ⁻¹(y))``."""
    if pair.side_of(x) != pair.side_of(y):
        raise SideMismatch("coproduct needs both elements on the same side")
    return fourier(pair, multiply(fourier_inv(pair, x), fourier_inv(pair, y)))


def coproduct_closed_form(
    pair: TwoBoxPair, x: AlgebraElement, y: AlgebraElement
) -> AlgebraElement:
    """Convolution (group) or scaled Hadamard product (spin, fixed point)."""
    side = pair.side_of(x)
    if side != pair.side_of(y):
        raise SideMismatch("coproduct needs both elements on the same side")
    n = pair.n_points
    root = math.sqrt(n)
    if pair.model == "group":
        g = pair.group
        assert g is not None
        if side == "plus":
            # (f1*f2)(k) = n^{-1/2} Σ_h f1(k h⁻¹) f2(h)
            shifted = x.data[g.table[:, g.inverse]]
            return pair.plus.element(shifted @ y.data / root, check=False)
        return pair.minus.from_coords(root * x.coords() * y.coords())
    if side == "plus":
        data: NDArray[np.complex128] = root * x.data * y.data
    else:
        data = (x.data.reshape(n, n) @ y.data.reshape(n, n)).ravel() / root
    algebra = pair.algebra(side)
    return algebra.element(data, check=pair.model == "fixed_point")


def jones_projection(pair: TwoBoxPair, side: Side) -> AlgebraElement:
    """The honest Jones projection (trace 1) on the requested side."""
    n = pair.n_points
    if pair.model == "group":
        assert pair.group is not None
        if side == "plus":
            data = np.zeros(n, dtype=np.complex128)
            data[pair.group.identity] = 1.0
            return pair.plus.element(data, check=False)
        return pair.minus.from_coords(np.full(n, 1.0 / n, dtype=np.complex128))
    if side == "plus":
        ones = np.full((n, n), 1.0 / n, dtype=np.complex128)
        return pair.plus.element(pair.plus.project(ones))
    diag = np.eye(n, dtype=np.complex128).ravel()
    return pair.minus.element(pair.minus.project(diag))


def jones_element(pair: TwoBoxPair, side: Side) -> AlgebraElement:
    """``δ·e₁``: trace δ and Fourier transform equal to the identity."""
    return jones_projection(pair, side) * pair.delta


def min_orbit_indicator(pair: TwoBoxPair) -> AlgebraElement:
    """Plus-side projection onto the smallest orbit; the identity on transitive models."""
    if pair.model == "group" or pair.irreducible:
        return pair.plus.identity()
    if pair.action is not None:
        orbit = min(pair.action.orbits(), key=len)
    else:
        orbit = (0,)
    data = np.zeros((pair.n_points, pair.n_points), dtype=np.complex128)
    data[list(orbit), list(orbit)] = 1.0
    return pair.plus.element(data)


# JSON literals


def element_to_literal(
    pair: TwoBoxPair, x: AlgebraElement, note: str | None = None
) -> ElementLiteral:
    side = pair.side_of(x)
    if x.algebra.is_diagonal:
        data: list[Complex] | list[list[Complex]] = [(float(v.real), float(v.imag)) for v in x.data]
    else:
        data = [[(float(v.real), float(v.imag)) for v in row] for row in x.data]
    return ElementLiteral(algebra=pair.label, side=side, data=data, note=note)


def element_from_literal(pair: TwoBoxPair, lit: ElementLiteral) -> AlgebraElement:
    """Rebuild an element; ``coeffs`` keys are group labels or element indices."""
    if lit.algebra != pair.label:
        raise ConfigError(f"literal belongs to {lit.algebra!r}, not {pair.label!r}")
    algebra = pair.algebra(lit.side)
    if lit.coeffs is not None:
        if pair.model != "group" or lit.side != "minus" or pair.group is None:
            raise ConfigError("coefficient literals are only defined for group-model minus sides")
        index = {pair.group.label(g): g for g in range(pair.n_points)}
        coords = np.zeros(pair.n_points, dtype=np.complex128)
        for key, (re, im) in lit.coeffs.items():
            g = index.get(key, int(key) if key.isdigit() else -1)
            if not 0 <= g < pair.n_points:
                raise ConfigError(f"unknown group element {key!r}")
            coords[g] = complex(re, im)
        return algebra.from_coords(coords)
    arr = np.asarray(lit.data, dtype=np.float64)
    values = arr[..., 0] + 1j * arr[..., 1]
    if values.shape != algebra.shape:
        raise ConfigError(f"literal shape {values.shape} does not match {algebra.shape}")
    return algebra.element(values)


@lru_cache(maxsize=32)
def cached_model(spec: str) -> TwoBoxPair:
    """Shared read-only pair per spec string."""
    return model_from_spec(spec)
