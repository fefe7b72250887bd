from __future__ import annotations

import math
from typing import Literal

import numpy as np
from numpy.typing import NDArray

from ..config import settings
from ..errors import NoConvergence, NotSelfAdjoint
from ..logging import get_logger

_log = get_logger()

Backend = Literal["lapack", "jacobi"]

SELF_ADJOINT_TOL = 1e-10


def hermitian_eig(
    mat: NDArray[np.complex128], backend: Backend | None = None
) -> tuple[NDArray[np.float64], NDArray[np.complex128]]:
    """Eigenvalues (descending) and orthonormal eigenvectors of a Hermitian matrix."""
    a = np.asarray(mat, dtype=np.complex128)
    scale = float(np.linalg.norm(a))
    skew = float(np.linalg.norm(a - a.conj().T))
    if skew > SELF_ADJOINT_TOL * max(scale, 1.0):
        raise NotSelfAdjoint(f"|x - x*|_F = {skew:.3g} for |x|_F = {scale:.3g}")
    a = (a + a.conj().T) / 2
    if a.shape[0] == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=np.complex128)

    if (backend or settings.EIGEN_BACKEND) == "jacobi":
        values, vectors = jacobi_eig(a)
    else:
        try:
            values, vectors = np.linalg.eigh(a)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(str(exc)) from exc
    order = np.argsort(-values, kind="stable")
    return values[order], vectors[:, order]


def jacobi_eig(
    a: NDArray[np.complex128],
    tol: float | None = None,
    max_sweeps: int | None = None,
) -> tuple[NDArray[np.float64], NDArray[np.complex128]]:
    """Cyclic Jacobi rotations for a complex Hermitian matrix.

    Each pivot ``(p, q)`` is first made real by the phase ``diag(1, e^{-iφ})`` and then
    annihilated by a real plane rotation, so the combined step is unitary.
    """
    tol = settings.JACOBI_TOL if tol is None else tol
    max_sweeps = settings.JACOBI_MAX_SWEEPS if max_sweeps is None else max_sweeps
    a = np.array(a, dtype=np.complex128)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    target = tol * float(np.linalg.norm(a))

    for sweep in range(max_sweeps + 1):
        off = float(np.linalg.norm(a - np.diag(np.diag(a))))
        if off <= target:
            _log.debug("jacobi_converged", n=n, sweeps=sweep, off=off)
            return np.real(np.diag(a)).copy(), v
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r <= target / n:
                    continue
                phase = apq / r
                theta = 0.5 * math.atan2(2 * r, float(np.real(a[q, q] - a[p, p])))
                c, s = math.cos(theta), math.sin(theta)
                rot = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                cols = [p, q]
                a[:, cols] = a[:, cols] @ rot
                a[cols, :] = rot.conj().T @ a[cols, :]
                v[:, cols] = v[:, cols] @ rot
                a[p, q] = a[q, p] = 0.0

    raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps (n={n})")
