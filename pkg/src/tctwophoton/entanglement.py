"""Negativity of a two-atom state via the partial transpose on the second atom."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .smallmat import HERMITIAN_TOL, NotHermitian, as_matrix, herm_eigen_batched, hermiticity_error, max_abs

# eigenvalues above this are numerical dust, so separable states report exactly 0
DUST = -1e-12
TRACE_TOL = 1e-6


@dataclass(frozen=True)
class NegativityResult:
    epsilon: float
    negative_eigs: tuple
    pt_spectrum: np.ndarray


def partial_transpose(rho) -> np.ndarray:
    """Transpose the second atom's index: ((i,j),(k,l)) -> ((i,l),(k,j))."""
    rho = as_matrix(rho)
    if rho.shape[-2:] != (4, 4):
        raise ValueError(f"expected a 4x4 two-atom matrix, got {rho.shape}")
    scale = max_abs(rho)
    if hermiticity_error(rho) > HERMITIAN_TOL * max(scale, 1e-300):
        raise NotHermitian("partial_transpose needs a Hermitian density matrix")
    lead = rho.shape[:-2]
    t = rho.reshape(lead + (2, 2, 2, 2))
    t = np.swapaxes(t, -3, -1)
    return t.reshape(lead + (4, 4))


def _check_trace(rho):
    tr = np.real(np.trace(rho, axis1=-2, axis2=-1))
    if np.any(np.abs(tr - 1.0) > TRACE_TOL):
        raise ValueError(f"density matrix trace {tr} is not within {TRACE_TOL} of 1")


def _epsilon(spectrum):
    neg = np.where(spectrum < DUST, spectrum, 0.0)
    return -2.0 * np.sum(neg, axis=-1) + 0.0


def negativity(rho) -> NegativityResult:
    rho = as_matrix(rho)
    _check_trace(rho)
    spectrum, _ = herm_eigen_batched(partial_transpose(rho))
    neg = tuple(float(x) for x in spectrum if x < DUST)
    return NegativityResult(float(_epsilon(spectrum)), neg, spectrum)


def negativity_batch(rhos) -> np.ndarray:
    """Negativity of a stack of density matrices, shape (..., 4, 4) -> (...)."""
    rhos = as_matrix(rhos)
    _check_trace(rhos)
    spectrum, _ = herm_eigen_batched(partial_transpose(rhos))
    return _epsilon(spectrum)
