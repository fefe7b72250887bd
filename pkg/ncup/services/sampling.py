from __future__ import annotations

import hashlib
import math

import numpy as np

from ..errors import ConfigError
from ..models.suite import SampleSpec
from .algebra import AlgebraElement, ComplexArray, StarAlgebra
from .eigen import hermitian_eig
from .two_box import Side, TwoBoxPair, cached_model, fourier

CLUSTER_TOL = 1e-8


def sample_seed(master_seed: int, index: int, stream: int = 0) -> int:
    """64-bit seed from ``blake2b("<master_seed>:<index>:<stream>")``."""
    digest = hashlib.blake2b(f"{master_seed}:{index}:{stream}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def sample_side(spec: SampleSpec, index: int) -> Side:
    if spec.side == "both":
        return "plus" if index % 2 == 0 else "minus"
    return spec.side


def sample_element(
    spec: SampleSpec, index: int, *, pair: TwoBoxPair | None = None, stream: int = 0
) -> AlgebraElement:
    """Deterministic in ``(spec.master_seed, index, stream)``."""
    pair = pair or cached_model(spec.model)
    rng = np.random.default_rng(sample_seed(spec.master_seed, index, stream))
    side = sample_side(spec, index)
    algebra = pair.algebra(side)
    cls = spec.element_class

    if cls == "biunitary_candidate":
        x = _biunitary_candidate(pair, rng)
        return x if side == "plus" else fourier(pair, x)
    if cls == "sparse":
        k = spec.sparse_k or 1
        if k > algebra.n_coords:
            msg = f"sparse:{k} exceeds {algebra.n_coords} coordinates of {algebra.label}"
            raise ConfigError(msg)
        coords = np.zeros(algebra.n_coords, dtype=np.complex128)
        idx = rng.choice(algebra.n_coords, size=k, replace=False)
        coords[idx] = _gaussian(rng, k)
        return algebra.from_coords(coords)

    z = generic(algebra, rng)
    if cls == "generic":
        return z
    if cls == "positive":
        return z.H @ z
    if cls == "self_adjoint":
        return (z + z.H) * 0.5
    if cls == "unitary":
        return _unitary(algebra, rng, z)
    if cls == "projection":
        return _projection(algebra, rng, z)
    if cls == "partial_isometry":
        return _unitary(algebra, rng, z) @ _projection(algebra, rng, generic(algebra, rng))
    raise ConfigError(f"unknown element class {cls!r}")


def _gaussian(rng: np.random.Generator, shape: int | tuple[int, ...]) -> ComplexArray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)


def generic(algebra: StarAlgebra, rng: np.random.Generator) -> AlgebraElement:
    """Complex Gaussian entries, orthogonally projected onto the algebra (class means)."""
    return algebra.from_coords(algebra.coords(_gaussian(rng, algebra.shape)))


def _snap(algebra: StarAlgebra, data: ComplexArray) -> AlgebraElement:
    return algebra.from_coords(algebra.coords(data))


def _unitary(algebra: StarAlgebra, rng: np.random.Generator, z: AlgebraElement) -> AlgebraElement:
    if algebra.is_diagonal:
        phases = np.exp(2j * np.pi * rng.random(algebra.n_coords))
        return algebra.from_coords(phases)
    u, _, vh = np.linalg.svd(z.data)
    return _snap(algebra, u @ vh)


def _projection(
    algebra: StarAlgebra, rng: np.random.Generator, z: AlgebraElement
) -> AlgebraElement:
    """Spectral projection of ``(z + z*)/2`` cut between two eigenvalue clusters."""
    if algebra.is_diagonal:
        bits = (rng.random(algebra.n_coords) < 0.5).astype(np.complex128)
        bits[rng.integers(algebra.n_coords)] = 1.0
        return algebra.from_coords(bits)
    values, vectors = hermitian_eig(((z + z.H) * 0.5).data)
    scale = max(float(np.abs(values).max()), 1e-300)
    breaks = [i for i in range(1, len(values)) if values[i - 1] - values[i] > CLUSTER_TOL * scale]
    if not breaks:
        return algebra.identity()
    m = breaks[int(rng.integers(len(breaks)))]
    frame = vectors[:, :m]
    return _snap(algebra, frame @ frame.conj().T)


def _biunitary_candidate(pair: TwoBoxPair, rng: np.random.Generator) -> AlgebraElement:
    """Plus-side element that is unitary with unitary Fourier transform when one is known."""
    n = pair.n_points
    k = np.arange(n)
    phase = np.exp(2j * np.pi * rng.random())
    if pair.model == "group" and pair.group is not None and pair.group.name.startswith("cyclic:"):
        # constant-amplitude chirp; shift and modulation keep the DFT flat
        chirp = np.exp(1j * np.pi * k**2 / n) if n % 2 == 0 else np.exp(2j * np.pi * k**2 / n)
        shift, mod = int(rng.integers(n)), int(rng.integers(n))
        data = phase * chirp[(k + shift) % n] * np.exp(2j * np.pi * mod * k / n)
        return pair.plus.element(data, check=False)
    if pair.model == "spin":
        dft = np.exp(-2j * np.pi * np.outer(k, k) / n) / math.sqrt(n)
        d1 = np.exp(2j * np.pi * rng.random(n))
        d2 = np.exp(2j * np.pi * rng.random(n))
        return pair.plus.element(phase * (d1[:, None] * dft * d2[None, :]))
    return _unitary(pair.plus, rng, generic(pair.plus, rng))
