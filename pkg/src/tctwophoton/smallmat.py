"""Small dense complex matrices (d <= 4) and a cyclic Jacobi Hermitian eigensolver.

Matrices are plain ``numpy`` complex128 arrays.  The eigensolver works on a
single ``(d, d)`` matrix or on a stack ``(..., d, d)``; every matrix in a stack
is rotated independently, so a result never depends on what else was in the
batch.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITIAN_TOL = 1e-10
MAX_SWEEPS = 100
# off-diagonal level (relative to max |a_ij|) at which a matrix counts as diagonal
_CONVERGED = 1e-15


class NotHermitian(ValueError):
    pass


class NoConvergence(RuntimeError):
    pass


class DimMismatch(ValueError):
    pass


@dataclass(frozen=True)
class HermEigen:
    """Ascending eigenvalues and the matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise DimMismatch(f"expected square matrix, got shape {m.shape}")
    return m


def max_abs(a) -> float:
    """Max-abs-entry norm used for every tolerance in this package."""
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def adjoint(a) -> np.ndarray:
    return np.conj(np.swapaxes(as_matrix(a), -1, -2))


def mat_mul(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise DimMismatch(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def identity(d: int) -> np.ndarray:
    return np.eye(d, dtype=np.complex128)


def hermiticity_error(a) -> float:
    a = as_matrix(a)
    return max_abs(a - adjoint(a))


def _rotate(a, v, p, q):
    """One complex Jacobi rotation zeroing a[:, p, q] for every matrix in the stack."""
    apq = a[:, p, q]
    mag = np.abs(apq)
    phase = np.ones_like(apq)
    nz = mag > 0
    # real divisions: numpy's complex division overflows for subnormal apq
    phase[nz] = apq.real[nz] / mag[nz] + 1j * (apq.imag[nz] / mag[nz])
    app = a[:, p, p].real.copy()
    aqq = a[:, q, q].real.copy()
    h = aqq - app
    sgn = np.where(h >= 0, 1.0, -1.0)
    den = np.abs(h) + np.hypot(h, 2.0 * mag)
    t = np.zeros_like(mag)
    ok = den > 0
    t[ok] = 2.0 * mag[ok] * sgn[ok] / den[ok]
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    # J = [[c, s], [-s e^{-i phi}, c e^{-i phi}]] acting on the (p, q) plane
    cph = np.conj(phase)
    ap = a[:, :, p].copy()
    aq = a[:, :, q].copy()
    a[:, :, p] = c[:, None] * ap - (s * cph)[:, None] * aq
    a[:, :, q] = s[:, None] * ap + (c * cph)[:, None] * aq
    rp = a[:, p, :].copy()
    rq = a[:, q, :].copy()
    a[:, p, :] = c[:, None] * rp - (s * phase)[:, None] * rq
    a[:, q, :] = s[:, None] * rp + (c * phase)[:, None] * rq
    a[:, p, q] = 0.0
    a[:, q, p] = 0.0
    a[:, p, p] = app - t * mag
    a[:, q, q] = aqq + t * mag
    vp = v[:, :, p].copy()
    vq = v[:, :, q].copy()
    v[:, :, p] = c[:, None] * vp - (s * cph)[:, None] * vq
    v[:, :, q] = s[:, None] * vp + (c * cph)[:, None] * vq


def _offdiag_max(a):
    d = a.shape[-1]
    mask = ~np.eye(d, dtype=bool)
    if d == 1:
        return np.zeros(a.shape[0])
    return np.max(np.abs(a[:, mask]), axis=1)


def herm_eigen_batched(a, tol: float = HERMITIAN_TOL, max_sweeps: int = MAX_SWEEPS):
    """Eigen-decompose a stack of Hermitian matrices with cyclic Jacobi sweeps.

    Parameters
    ----------
    a : array_like, shape (..., d, d)
        Hermitian within ``tol * max|a|`` (checked per matrix).
    tol : float
        Relative Hermiticity tolerance.
    max_sweeps : int
        Sweep cap; exceeding it raises :class:`NoConvergence`.

    Returns
    -------
    eigenvalues : ndarray, shape (..., d)
        Ascending; ties keep their original diagonal order.
    eigenvectors : ndarray, shape (..., d, d)
        Columns are the eigenvectors.
    """
    a = as_matrix(a)
    batch_shape = a.shape[:-2]
    d = a.shape[-1]
    work = a.reshape(-1, d, d).copy()
    nb = work.shape[0]
    scale = np.max(np.abs(work), axis=(1, 2)) if nb else np.zeros(0)
    herr = np.max(np.abs(work - np.conj(np.swapaxes(work, 1, 2))), axis=(1, 2)) if nb else scale
    bad = herr > tol * scale
    if np.any(bad):
        i = int(np.argmax(bad))
        raise NotHermitian(f"matrix {i} deviates from Hermitian by {herr[i]:.3e} (scale {scale[i]:.3e})")
    work = 0.5 * (work + np.conj(np.swapaxes(work, 1, 2)))
    vecs = np.broadcast_to(np.eye(d, dtype=np.complex128), work.shape).copy()
    pairs = [(p, q) for p in range(d - 1) for q in range(p + 1, d)]

    active = np.arange(nb)
    for sweep in range(max_sweeps + 1):
        if active.size == 0:
            break
        sub = work[active]
        off = _offdiag_max(sub)
        still = off > _CONVERGED * scale[active]
        active = active[still]
        if active.size == 0:
            break
        if sweep >= max_sweeps:
            raise NoConvergence(f"{active.size} matrices not diagonal after {max_sweeps} sweeps")
        if active.size == nb:
            for p, q in pairs:
                _rotate(work, vecs, p, q)
            continue
        sub = work[active]
        vsub = vecs[active]
        for p, q in pairs:
            _rotate(sub, vsub, p, q)
        work[active] = sub
        vecs[active] = vsub

    evals = np.real(np.diagonal(work, axis1=1, axis2=2)).copy()
    if not np.all(np.isfinite(evals)):
        raise NoConvergence("non-finite eigenvalues")
    order = np.argsort(evals, axis=1, kind="stable")
    evals = np.take_along_axis(evals, order, axis=1)
    vecs = np.take_along_axis(vecs, order[:, None, :], axis=2)
    return evals.reshape(batch_shape + (d,)), vecs.reshape(batch_shape + (d, d))


def herm_eigen(a, tol: float = HERMITIAN_TOL) -> HermEigen:
    a = as_matrix(a)
    if a.ndim != 2:
        raise DimMismatch(f"herm_eigen takes one matrix, got shape {a.shape}")
    w, v = herm_eigen_batched(a, tol=tol)
    return HermEigen(w, v)


def expm_hermitian(h, gt: float) -> np.ndarray:
    """exp(-i h gt) for Hermitian ``h`` via its Jacobi eigendecomposition."""
    e = herm_eigen(h)
    return (e.eigenvectors * np.exp(-1j * e.eigenvalues * gt)) @ adjoint(e.eigenvectors)
