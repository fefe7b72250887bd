from __future__ import annotations

import cmath
import itertools
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from ..config import settings
from ..errors import (
    ConfigError,
    GroupTooLarge,
    InvalidCharacter,
    NoIdentity,
    NoInverse,
    NotAssociative,
    NotLatinSquare,
    UnsupportedSize,
)
from ..logging import get_logger

_log = get_logger()

IntArray = NDArray[np.int64]


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """Cayley-table presentation: ``table[a, b]`` is the index of ``a·b``."""

    table: IntArray
    identity: int
    inverse: IntArray
    labels: tuple[str, ...] | None = None
    name: str = "custom"

    @property
    def order(self) -> int:
        return int(self.table.shape[0])

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def inv(self, a: int) -> int:
        return int(self.inverse[a])

    def element_order(self, g: int) -> int:
        k, x = 1, g
        while x != self.identity:
            x = self.mul(x, g)
            k += 1
        return k

    def label(self, g: int) -> str:
        return self.labels[g] if self.labels else str(g)

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))


@dataclass(frozen=True, eq=False)
class Subgroup:
    parent: FiniteGroup
    members: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def index(self) -> int:
        return self.parent.order // self.size

    def __contains__(self, g: object) -> bool:
        return g in self._member_set

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Subgroup):
            return NotImplemented
        return self.parent is other.parent and self.members == other.members

    def __hash__(self) -> int:
        return hash((id(self.parent), self.members))

    @cached_property
    def _member_set(self) -> frozenset[int]:
        return frozenset(self.members)


@dataclass(frozen=True, eq=False)
class Character:
    """One-dimensional character stored as exact angles: ``χ(h) = exp(2πi·angle)``."""

    subgroup: Subgroup
    angles: dict[int, Fraction] = field(repr=False)

    def value(self, h: int) -> complex:
        return cmath.exp(2j * math.pi * float(self.angles[h]))

    @cached_property
    def values(self) -> dict[int, complex]:
        return {h: self.value(h) for h in self.subgroup.members}

    def is_trivial(self) -> bool:
        return all(a == 0 for a in self.angles.values())

    def key(self) -> tuple[Fraction, ...]:
        return tuple(self.angles[h] for h in self.subgroup.members)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Character):
            return NotImplemented
        return self.subgroup == other.subgroup and self.key() == other.key()

    def __hash__(self) -> int:
        return hash((hash(self.subgroup), self.key()))


# Construction and validation


def build_group(
    table: Sequence[Sequence[int]] | IntArray,
    labels: Sequence[str] | None = None,
    name: str = "custom",
) -> FiniteGroup:
    t = np.asarray(table, dtype=np.int64)
    if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] == 0:
        raise NotLatinSquare((), f"table must be a nonempty square array, got shape {t.shape}")
    n = t.shape[0]
    bad = np.argwhere((t < 0) | (t >= n))
    if bad.size:
        a, b = (int(v) for v in bad[0])
        raise NotLatinSquare((a, b, int(t[a, b])), "entry out of range")

    full = np.arange(n)
    for a in range(n):
        if not np.array_equal(np.sort(t[a]), full):
            b = _first_repeat(t[a])
            raise NotLatinSquare((a, b, int(t[a, b])), f"row {a} repeats {int(t[a, b])}")
        if not np.array_equal(np.sort(t[:, a]), full):
            b = _first_repeat(t[:, a])
            raise NotLatinSquare((b, a, int(t[b, a])), f"column {a} repeats {int(t[b, a])}")

    identity = next(
        (e for e in range(n) if np.array_equal(t[e], full) and np.array_equal(t[:, e], full)),
        None,
    )
    if identity is None:
        raise NoIdentity((0, 0, int(t[0, 0])), "no two-sided identity")

    inverse = np.empty(n, dtype=np.int64)
    for a in range(n):
        b = int(np.flatnonzero(t[a] == identity)[0])
        if t[b, a] != identity:
            raise NoInverse((a, b, int(t[b, a])), f"right inverse of {a} is not a left inverse")
        inverse[a] = b

    left = t[t[:, :, None], full[None, None, :]]
    right = t[full[:, None, None], t[None, :, :]]
    bad = np.argwhere(left != right)
    if bad.size:
        a, b, c = (int(v) for v in bad[0])
        raise NotAssociative((a, b, c), "(a·b)·c != a·(b·c)")

    group = FiniteGroup(
        table=t,
        identity=identity,
        inverse=inverse,
        labels=tuple(labels) if labels is not None else None,
        name=name,
    )
    _log.debug("group_built", name=name, order=n)
    return group


def _first_repeat(row: IntArray) -> int:
    seen: set[int] = set()
    for i, v in enumerate(row.tolist()):
        if v in seen:
            return i
        seen.add(v)
    return 0


def cyclic(n: int) -> FiniteGroup:
    if n < 1:
        raise UnsupportedSize(f"cyclic group needs n >= 1, got {n}")
    r = np.arange(n)
    return build_group((r[:, None] + r[None, :]) % n, [str(k) for k in range(n)], f"cyclic:{n}")


def dihedral(n: int) -> FiniteGroup:
    """Order 2n: indices 0..n-1 are rotations r^k, n..2n-1 are reflections s·r^k."""
    if n < 1:
        raise UnsupportedSize(f"dihedral group needs n >= 1, got {n}")
    size = 2 * n
    table = np.empty((size, size), dtype=np.int64)
    for x in range(size):
        fx, kx = divmod(x, n)
        for y in range(size):
            fy, ky = divmod(y, n)
            # s^a r^b · s^c r^d = s^(a+c) r^((-1)^c b + d)
            k = (ky - kx if fy else kx + ky) % n
            table[x, y] = ((fx + fy) % 2) * n + k
    labels = [f"r^{k}" for k in range(n)] + [f"s r^{k}" for k in range(n)]
    return build_group(table, labels, f"dihedral:{n}")


def symmetric(n: int) -> FiniteGroup:
    """Lexicographic permutations of 0..n-1; ``(a·b)(i) = a(b(i))``."""
    if not 1 <= n <= 5:
        raise UnsupportedSize(f"symmetric group supported for 1 <= n <= 5, got {n}")
    perms = list(itertools.permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    table = [[index[tuple(a[b[i]] for i in range(n))] for b in perms] for a in perms]
    labels = ["".join(str(v) for v in p) for p in perms]
    return build_group(table, labels, f"symmetric:{n}")


def direct_product(g: FiniteGroup, h: FiniteGroup) -> FiniteGroup:
    """Element ``(a, b)`` has index ``a·|H| + b``."""
    m = h.order
    a = np.arange(g.order * m)
    ga, hb = a // m, a % m
    table = g.table[ga[:, None], ga[None, :]] * m + h.table[hb[:, None], hb[None, :]]
    labels = [f"({g.label(int(x))},{h.label(int(y))})" for x, y in zip(ga, hb, strict=True)]
    return build_group(table, labels, f"product:{g.name},{h.name}")


def builtin_group(spec: str) -> FiniteGroup:
    """Parse ``cyclic:6``, ``dihedral:4``, ``symmetric:3`` or ``product:cyclic:2,cyclic:2``."""
    family, _, rest = spec.strip().partition(":")
    family = family.lower()
    if family == "product":
        parts = [p for p in rest.split(",") if p.strip()]
        if len(parts) < 2:
            raise ConfigError(f"product needs at least two factors: {spec!r}")
        group = builtin_group(parts[0])
        for p in parts[1:]:
            group = direct_product(group, builtin_group(p))
        return group
    if family == "trivial" and not rest:
        return cyclic(1)
    builders = {"cyclic": cyclic, "dihedral": dihedral, "symmetric": symmetric}
    if family not in builders:
        raise ConfigError(f"unknown group family {family!r} in {spec!r}")
    try:
        n = int(rest)
    except ValueError as exc:
        raise ConfigError(f"group parameter must be an integer: {spec!r}") from exc
    return builders[family](n)


def load_group(source: str) -> FiniteGroup:
    """A builtin spec string or a path to a Cayley-table JSON file."""
    if source.endswith(".json"):
        from ..models.group import CayleyTableFile

        path = Path(source)
        try:
            doc = CayleyTableFile.model_validate_json(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read group file {source}: {exc}") from exc
        return build_group(doc.table, doc.labels, name=path.stem)
    return builtin_group(source)


# Subgroups


def closure(group: FiniteGroup, generators: Iterable[int]) -> tuple[int, ...]:
    gens = sorted(set(generators))
    elements = {group.identity}
    frontier = [group.identity]
    while frontier:
        nxt: list[int] = []
        for x in frontier:
            for g in gens:
                y = group.mul(x, g)
                if y not in elements:
                    elements.add(y)
                    nxt.append(y)
        frontier = nxt
    return tuple(sorted(elements))


def subgroup_of(group: FiniteGroup, members: Iterable[int]) -> Subgroup:
    """Validate a member list as a subgroup."""
    ms = tuple(sorted(set(members)))
    if closure(group, ms) != ms:
        raise ConfigError(f"{list(ms)} is not a subgroup of {group.name}")
    return Subgroup(group, ms)


def trivial_subgroup(group: FiniteGroup) -> Subgroup:
    return Subgroup(group, (group.identity,))


def whole_group(group: FiniteGroup) -> Subgroup:
    return Subgroup(group, tuple(range(group.order)))


def enumerate_subgroups(group: FiniteGroup) -> list[Subgroup]:
    if group.order > settings.MAX_GROUP_ORDER:
        raise GroupTooLarge(f"|G| = {group.order} exceeds bound {settings.MAX_GROUP_ORDER}")
    cache: dict[frozenset[int], tuple[int, ...]] = {}
    found: dict[tuple[int, ...], None] = {(group.identity,): None}
    queue: list[tuple[int, ...]] = [(group.identity,)]
    while queue:
        current = queue.pop()
        for g in range(group.order):
            if g in current:
                continue
            key = frozenset(current) | {g}
            if key not in cache:
                cache[key] = closure(group, key)
            sub = cache[key]
            if sub not in found:
                found[sub] = None
                queue.append(sub)
    ordered = sorted(found, key=lambda ms: (len(ms), ms))
    _log.debug("subgroups_enumerated", group=group.name, count=len(ordered))
    return [Subgroup(group, ms) for ms in ordered]


def commutator_subgroup(h: Subgroup) -> Subgroup:
    g = h.parent
    comms = {
        g.mul(g.mul(a, b), g.mul(g.inv(a), g.inv(b))) for a in h.members for b in h.members
    }
    return Subgroup(g, closure(g, comms))


def right_cosets(h: Subgroup) -> list[tuple[int, ...]]:
    """Partition into cosets ``Hg``; the identity coset comes first."""
    return _cosets(h, right=True)


def left_cosets(h: Subgroup) -> list[tuple[int, ...]]:
    return _cosets(h, right=False)


def _cosets(h: Subgroup, *, right: bool) -> list[tuple[int, ...]]:
    grp = h.parent
    seen: set[int] = set()
    out: list[tuple[int, ...]] = []
    for g in [grp.identity, *range(grp.order)]:
        if g in seen:
            continue
        coset = tuple(sorted({grp.mul(x, g) if right else grp.mul(g, x) for x in h.members}))
        seen.update(coset)
        out.append(coset)
    return out


# Characters


def one_dim_characters(h: Subgroup) -> list[Character]:
    """Characters of ``H/[H,H]``, built by extending one cyclic factor at a time."""
    grp = h.parent
    k = commutator_subgroup(h)
    span: set[int] = set(k.members)
    chars: list[dict[int, Fraction]] = [{x: Fraction(0) for x in k.members}]
    for g in h.members:
        if g in span:
            continue
        steps, power = 1, g
        while power not in span:
            power = grp.mul(power, g)
            steps += 1
        layers: list[tuple[int, int, int]] = []
        x_pow = grp.identity
        for i in range(steps):
            layers.extend((grp.mul(s, x_pow), s, i) for s in sorted(span))
            x_pow = grp.mul(x_pow, g)
        extended: list[dict[int, Fraction]] = []
        for psi in chars:
            for j in range(steps):
                t = (psi[power] + j) / steps
                extended.append({el: (psi[s] + i * t) % 1 for el, s, i in layers})
        chars = extended
        span = {el for el, _, _ in layers}
    out = [Character(h, c) for c in chars]
    out.sort(key=Character.key)
    _log.debug("characters_built", subgroup=h.members, count=len(out), commutator=k.size)
    return out


def brute_force_characters(h: Subgroup) -> list[Character]:
    """Search all unit-valued maps on a generating set; exact but exponential."""
    if h.size > settings.MAX_BRUTE_FORCE_CHARACTERS:
        raise GroupTooLarge(
            f"|H| = {h.size} exceeds brute-force bound {settings.MAX_BRUTE_FORCE_CHARACTERS}"
        )
    grp = h.parent
    gens: list[int] = []
    span = {grp.identity}
    for x in h.members:
        if x not in span:
            gens.append(x)
            span = set(closure(grp, gens))
    exponent = math.lcm(*(grp.element_order(x) for x in h.members))
    out: list[Character] = []
    for assignment in itertools.product(range(exponent), repeat=len(gens)):
        angles = _extend_along_generators(grp, gens, [Fraction(a, exponent) for a in assignment])
        if angles is not None:
            out.append(Character(h, angles))
    out.sort(key=Character.key)
    return out


def _extend_along_generators(
    grp: FiniteGroup, gens: list[int], gen_angles: list[Fraction]
) -> dict[int, Fraction] | None:
    angles = {grp.identity: Fraction(0)}
    frontier = [grp.identity]
    while frontier:
        nxt: list[int] = []
        for x in frontier:
            for g, a in zip(gens, gen_angles, strict=True):
                y = grp.mul(x, g)
                val = (angles[x] + a) % 1
                if y in angles:
                    if angles[y] != val:
                        return None
                else:
                    angles[y] = val
                    nxt.append(y)
        frontier = nxt
    return angles


def validate_character(chi: Character, h: Subgroup) -> None:
    """Raise InvalidCharacter unless ``chi`` is a multiplicative unit map on ``h``."""
    if chi.subgroup != h:
        raise InvalidCharacter("character belongs to a different subgroup")
    if set(chi.angles) != set(h.members):
        raise InvalidCharacter("character domain differs from the subgroup")
    grp = h.parent
    for a in h.members:
        for b in h.members:
            if (chi.angles[a] + chi.angles[b]) % 1 != chi.angles[grp.mul(a, b)] % 1:
                raise InvalidCharacter(f"not multiplicative at ({a}, {b})")
