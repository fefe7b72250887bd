from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np
from numpy.typing import NDArray

from ..config import settings
from ..errors import AlgebraMismatch, InvalidExponent, NotInAlgebra
from .eigen import hermitian_eig

ComplexArray = NDArray[np.complex128]
RealArray = NDArray[np.float64]
IntArray = NDArray[np.int64]

Kind = Literal["diagonal", "full", "commutant"]


@dataclass(frozen=True, eq=False)
class StarAlgebra:
    """A *-subalgebra of d×d matrices with trace ``trace_scale · Tr``.

    ``classes`` maps each stored entry (diagonal: ``d`` entries, otherwise ``d×d``) to a
    coordinate index; members are exactly the arrays constant on each class. ``None`` means
    every entry is its own coordinate. ``perms`` is the permutation action whose group
    average projects onto the algebra (invariant functions or commutant).
    """

    dim: int
    trace_scale: float
    kind: Kind
    label: str
    classes: IntArray | None = None
    perms: IntArray | None = None

    def __post_init__(self) -> None:
        if self.trace_scale <= 0:
            raise ValueError("trace_scale must be positive")

    @property
    def is_diagonal(self) -> bool:
        return self.kind == "diagonal"

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.dim,) if self.is_diagonal else (self.dim, self.dim)

    @cached_property
    def n_coords(self) -> int:
        if self.classes is None:
            return int(np.prod(self.shape))
        return int(self.classes.max()) + 1

    @cached_property
    def _class_counts(self) -> RealArray:
        assert self.classes is not None
        return np.bincount(self.classes.ravel(), minlength=self.n_coords).astype(np.float64)

    # coordinates

    def coords(self, data: ComplexArray) -> ComplexArray:
        if self.classes is None:
            return np.asarray(data, dtype=np.complex128).ravel().copy()
        flat = self.classes.ravel()
        d = np.asarray(data, dtype=np.complex128).ravel()
        re = np.bincount(flat, weights=d.real, minlength=self.n_coords)
        im = np.bincount(flat, weights=d.imag, minlength=self.n_coords)
        return (re + 1j * im) / self._class_counts

    def from_coords(self, coords: ComplexArray) -> AlgebraElement:
        c = np.asarray(coords, dtype=np.complex128)
        if c.shape != (self.n_coords,):
            raise AlgebraMismatch(f"expected {self.n_coords} coordinates, got {c.shape}")
        data = c.reshape(self.shape) if self.classes is None else c[self.classes]
        return AlgebraElement(self, np.array(data, dtype=np.complex128))

    def basis_element(self, k: int) -> AlgebraElement:
        c = np.zeros(self.n_coords, dtype=np.complex128)
        c[k] = 1.0
        return self.from_coords(c)

    # membership

    def project(self, data: ComplexArray) -> ComplexArray:
        """Group average onto the algebra; identity for unconstrained algebras."""
        d = np.asarray(data, dtype=np.complex128)
        if self.is_diagonal and d.ndim == 2:
            d = np.diag(d).copy()
        if self.perms is None:
            return d.copy()
        out = np.zeros_like(d)
        for p in self.perms:
            if self.is_diagonal:
                out[p] += d
            else:
                out[np.ix_(p, p)] += d
        return out / len(self.perms)

    def membership_residual(self, data: ComplexArray) -> float:
        d = np.asarray(data, dtype=np.complex128)
        if d.shape != self.shape:
            if self.is_diagonal and d.shape == (self.dim, self.dim):
                off = d - np.diag(np.diag(d))
                if np.linalg.norm(off) > 0:
                    return float(np.linalg.norm(off)) / max(float(np.linalg.norm(d)), 1e-300)
                d = np.diag(d).copy()
            else:
                return math.inf
        scale = float(np.linalg.norm(d))
        if scale == 0.0:
            return 0.0
        if self.classes is None:
            return 0.0
        rebuilt = self.coords(d)[self.classes]
        return float(np.linalg.norm(d - rebuilt)) / scale

    def element(self, data: ComplexArray | Sequence[object], check: bool = True) -> AlgebraElement:
        d = np.asarray(data, dtype=np.complex128)
        if check:
            res = self.membership_residual(d)
            if res > settings.MEMBERSHIP_TOL:
                raise NotInAlgebra(f"{self.label}: membership residual {res:.3g}")
        if self.is_diagonal and d.ndim == 2:
            d = np.diag(d).copy()
        if not np.all(np.isfinite(d)):
            raise NotInAlgebra(f"{self.label}: non-finite entries")
        return AlgebraElement(self, d)

    def identity(self) -> AlgebraElement:
        data = np.ones(self.dim) if self.is_diagonal else np.eye(self.dim)
        return AlgebraElement(self, data.astype(np.complex128))

    def zero(self) -> AlgebraElement:
        return AlgebraElement(self, np.zeros(self.shape, dtype=np.complex128))


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    algebra: StarAlgebra
    data: ComplexArray

    @property
    def mat(self) -> ComplexArray:
        return np.diag(self.data) if self.algebra.is_diagonal else self.data

    def coords(self) -> ComplexArray:
        return self.algebra.coords(self.data)

    def __add__(self, other: AlgebraElement) -> AlgebraElement:
        return add(self, other)

    def __sub__(self, other: AlgebraElement) -> AlgebraElement:
        return add(self, scale(other, -1.0))

    def __neg__(self) -> AlgebraElement:
        return scale(self, -1.0)

    def __matmul__(self, other: AlgebraElement) -> AlgebraElement:
        return multiply(self, other)

    def __mul__(self, factor: complex) -> AlgebraElement:
        return scale(self, factor)

    __rmul__ = __mul__

    def __truediv__(self, factor: complex) -> AlgebraElement:
        return scale(self, 1.0 / factor)

    @property
    def H(self) -> AlgebraElement:
        return adjoint(self)

    def allclose(self, other: AlgebraElement, tol: float = 1e-10) -> bool:
        _same(self, other)
        ref = max(float(np.linalg.norm(self.data)), float(np.linalg.norm(other.data)), 1.0)
        return float(np.linalg.norm(self.data - other.data)) <= tol * ref


def _same(x: AlgebraElement, y: AlgebraElement) -> None:
    if x.algebra is not y.algebra:
        raise AlgebraMismatch(f"{x.algebra.label} vs {y.algebra.label}")


# arithmetic


def add(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    _same(x, y)
    return AlgebraElement(x.algebra, x.data + y.data)


def multiply(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    _same(x, y)
    if x.algebra.is_diagonal:
        return AlgebraElement(x.algebra, x.data * y.data)
    return AlgebraElement(x.algebra, x.data @ y.data)


def scale(x: AlgebraElement, factor: complex) -> AlgebraElement:
    return AlgebraElement(x.algebra, x.data * complex(factor))


def adjoint(x: AlgebraElement) -> AlgebraElement:
    if x.algebra.is_diagonal:
        return AlgebraElement(x.algebra, x.data.conj())
    return AlgebraElement(x.algebra, x.data.conj().T.copy())


def trace(x: AlgebraElement) -> complex:
    diag = x.data if x.algebra.is_diagonal else np.diag(x.data)
    return complex(x.algebra.trace_scale * np.sum(diag))


def inner(x: AlgebraElement, y: AlgebraElement) -> complex:
    """``tr(x* y)``."""
    return trace(multiply(adjoint(x), y))


# spectral data


@dataclass(frozen=True)
class SpectralDecomposition:
    values: RealArray
    left_frames: ComplexArray
    right_frames: ComplexArray
    multiplicities: tuple[tuple[float, int], ...]

    def reconstruct(self) -> ComplexArray:
        return (self.left_frames * self.values) @ self.right_frames.conj().T


def singular_values(x: AlgebraElement) -> RealArray:
    """Descending singular values, i.e. the eigenvalues of ``|x|``."""
    if x.algebra.is_diagonal:
        return np.sort(np.abs(x.data))[::-1]
    return np.linalg.svd(x.data, compute_uv=False)


def spectral_decomposition(x: AlgebraElement) -> SpectralDecomposition:
    u, s, vh = np.linalg.svd(x.mat)
    v = vh.conj().T
    for j in range(v.shape[1]):
        k = int(np.argmax(np.abs(v[:, j])))
        if abs(v[k, j]) > 0:
            phase = np.conj(v[k, j]) / abs(v[k, j])
            v[:, j] *= phase
            u[:, j] *= phase
    return SpectralDecomposition(
        values=s,
        left_frames=u,
        right_frames=v,
        multiplicities=_group_values(s),
    )


def _group_values(values: RealArray) -> tuple[tuple[float, int], ...]:
    if values.size == 0:
        return ()
    tol = settings.RANK_REL_TOL * max(float(values[0]), 1e-300)
    groups: list[list[float]] = [[float(values[0])]]
    for v in values[1:]:
        if abs(groups[-1][0] - float(v)) <= tol:
            groups[-1].append(float(v))
        else:
            groups.append([float(v)])
    return tuple((float(np.mean(g)), len(g)) for g in groups)


def abs_element(x: AlgebraElement) -> AlgebraElement:
    """``|x| = (x*x)^{1/2}`` from :func:`hermitian_eig` of ``x*x``."""
    if x.algebra.is_diagonal:
        return AlgebraElement(x.algebra, np.abs(x.data).astype(np.complex128))
    values, vectors = hermitian_eig(x.data.conj().T @ x.data)
    root = np.sqrt(np.clip(values, 0.0, None))
    return AlgebraElement(x.algebra, (vectors * root) @ vectors.conj().T)


def p_norm(x: AlgebraElement, p: float) -> float:
    if not (p >= 1 or math.isinf(p)) or math.isnan(p):
        raise InvalidExponent(f"p must be >= 1 or inf, got {p}")
    s = singular_values(x)
    if s.size == 0:
        return 0.0
    if math.isinf(p):
        return float(s[0])
    smax = float(s[0])
    if smax == 0.0:
        return 0.0
    # factor out the largest value to keep large p finite
    return smax * float(x.algebra.trace_scale * np.sum((s / smax) ** p)) ** (1.0 / p)


def rank(x: AlgebraElement, rel_tol: float | None = None) -> int:
    s = singular_values(x)
    if s.size == 0 or s[0] == 0.0:
        return 0
    tol = settings.RANK_REL_TOL if rel_tol is None else rel_tol
    return int(np.count_nonzero(s > tol * s[0]))


def range_projection(x: AlgebraElement, rel_tol: float | None = None) -> AlgebraElement:
    tol = settings.RANK_REL_TOL if rel_tol is None else rel_tol
    if x.algebra.is_diagonal:
        a = np.abs(x.data)
        top = float(a.max()) if a.size else 0.0
        ind = (a > tol * top) if top > 0 else np.zeros_like(a, dtype=bool)
        return AlgebraElement(x.algebra, ind.astype(np.complex128))
    u, s, _ = np.linalg.svd(x.data)
    if s.size == 0 or s[0] == 0.0:
        return x.algebra.zero()
    r = int(np.count_nonzero(s > tol * s[0]))
    ur = u[:, :r]
    return AlgebraElement(x.algebra, ur @ ur.conj().T)


def support_size(x: AlgebraElement, rel_tol: float | None = None) -> float:
    """``S(x) = tr(R(x))``."""
    return x.algebra.trace_scale * rank(x, rel_tol)


def entropy(x: AlgebraElement) -> float:
    """``H(|x|²) = -tr(|x|² log |x|²)`` with natural logarithm."""
    s2 = singular_values(x) ** 2
    s2 = s2[s2 > 0]
    return float(-x.algebra.trace_scale * np.sum(s2 * np.log(s2)))


# predicates


def is_self_adjoint(x: AlgebraElement, tol: float = 1e-10) -> bool:
    ref = max(float(np.linalg.norm(x.data)), 1e-300)
    return float(np.linalg.norm(x.data - adjoint(x).data)) <= tol * ref


def eigenvalues(x: AlgebraElement) -> RealArray:
    """Descending eigenvalues of a self-adjoint element."""
    if x.algebra.is_diagonal:
        return np.sort(x.data.real)[::-1]
    values, _ = hermitian_eig(x.data)
    return values


def is_positive(x: AlgebraElement, tol: float = 1e-9) -> bool:
    if not is_self_adjoint(x, max(tol, 1e-10)):
        return False
    ev = eigenvalues(x)
    return ev.size == 0 or float(ev[-1]) >= -tol * max(float(np.abs(ev).max()), 1e-300)


def is_projection(x: AlgebraElement, tol: float = 1e-9) -> bool:
    ref = max(float(np.linalg.norm(x.data)), 1.0)
    idem = float(np.linalg.norm(multiply(x, x).data - x.data))
    return idem <= tol * ref and is_self_adjoint(x, max(tol, 1e-10))


def flatness(x: AlgebraElement, rel_tol: float | None = None) -> tuple[float, float]:
    """Largest singular value ``s`` and the worst relative deviation of nonzero values from it."""
    s = singular_values(x)
    if s.size == 0 or s[0] == 0.0:
        return 0.0, 0.0
    tol = settings.RANK_REL_TOL if rel_tol is None else rel_tol
    top = float(s[0])
    nonzero = s[s > tol * top]
    return top, float(np.max(np.abs(nonzero - top)) / top)
