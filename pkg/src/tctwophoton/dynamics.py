"""Reduced two-atom dynamics: thermal-ensemble sum of sector-propagated contributions.

For a Fock pair |n1, n2> the four atomic basis states sit on ladders with
offsets n, n-1, n-1, n-2 (see :mod:`tctwophoton.propagator`).  Collect the
relevant propagator columns into a 4x4 matrix ``W_n``::

    W_n[:, 0] = U(n)[:, 0]    W_n[:, 1:3] = U(n-1)[:, 1:3]    W_n[:, 3] = U(n-2)[:, 3]

Entry ``W_n[r, a]`` lands on photon numbers ``n + SHIFT[r] - SHIFT[a]``.  The
field trace keeps a product ``W[r, a] conj(W[s, b])`` only when both land on
the same photon numbers, so

    rho(t)[r, s] = sum_{a, b} K[r, a, s, b] rho(0)[a, b],
    K[r, a, s, b] = sum_n p1(n1) p2(n2) W_n[r, a] conj(W_n[s, b]),

restricted to matching landing shifts.  ``K`` does not depend on the atomic
preparation and is computed once per time point.
"""
from __future__ import annotations

import functools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numba
import numpy as np

from .entanglement import TRACE_TOL, negativity_batch
from .model import AtomPreparation, ModelParams, initial_atomic_density, weights_for
from .propagator import SHIFT, analytic_ladder_blocks, couplings, padded_hamiltonian
from .smallmat import NoConvergence, herm_eigen_batched

ENGINES = ("numeric", "analytic", "both")


def _kernel_pairs():
    """Upper-triangular (r, a, s, b) index pairs with equal landing shift."""
    flat = [(r, a) for r in range(4) for a in range(4)]
    out = []
    for i, (r, a) in enumerate(flat):
        for j in range(i, 16):
            s, b = flat[j]
            if SHIFT[r] - SHIFT[a] == SHIFT[s] - SHIFT[b]:
                out.append((r, a, s, b))
    return np.array(out, dtype=np.int64)


PAIRS = _kernel_pairs()


@numba.njit(nogil=True, cache=True)
def _numeric_propagators(evals, evecs, gt):
    nu = evals.shape[0]
    out = np.empty((nu, 4, 4), dtype=np.complex128)
    ph = np.empty(4, dtype=np.complex128)
    for u in range(nu):
        for j in range(4):
            x = -evals[u, j] * gt
            ph[j] = complex(np.cos(x), np.sin(x))
        for r in range(4):
            for c in range(4):
                acc = 0j
                for j in range(4):
                    acc += evecs[u, r, j] * ph[j] * np.conj(evecs[u, c, j])
                out[u, r, c] = acc
    return out


@numba.njit(nogil=True, cache=True)
def _accumulate(props, sector_id, p1, p2, pairs):
    """Neumaier-compensated sum over (n1 outer, n2 inner), both ascending."""
    npairs = pairs.shape[0]
    s_re = np.zeros(npairs)
    s_im = np.zeros(npairs)
    c_re = np.zeros(npairs)
    c_im = np.zeros(npairs)
    w = np.empty((4, 4), dtype=np.complex128)
    for n1 in range(p1.shape[0]):
        for n2 in range(p2.shape[0]):
            weight = p1[n1] * p2[n2]
            u0 = sector_id[n1 + 2, n2 + 2]
            u1 = sector_id[n1 + 1, n2 + 1]
            u2 = sector_id[n1, n2]
            for r in range(4):
                w[r, 0] = props[u0, r, 0]
                w[r, 1] = props[u1, r, 1]
                w[r, 2] = props[u1, r, 2]
                w[r, 3] = props[u2, r, 3]
            for k in range(npairs):
                term = weight * w[pairs[k, 0], pairs[k, 1]] * np.conj(w[pairs[k, 2], pairs[k, 3]])
                x = term.real
                t = s_re[k] + x
                if abs(s_re[k]) >= abs(x):
                    c_re[k] += (s_re[k] - t) + x
                else:
                    c_re[k] += (x - t) + s_re[k]
                s_re[k] = t
                x = term.imag
                t = s_im[k] + x
                if abs(s_im[k]) >= abs(x):
                    c_im[k] += (s_im[k] - t) + x
                else:
                    c_im[k] += (x - t) + s_im[k]
                s_im[k] = t
    out = np.empty(npairs, dtype=np.complex128)
    for k in range(npairs):
        out[k] = complex(s_re[k] + c_re[k], s_im[k] + c_im[k])
    return out


class ThermalEngine:
    """Precomputed sector spectra for one parameter set; yields the propagation kernel at any gt.

    ``analytic=True`` builds full-ladder propagators from the closed form
    (entries listed in ``disabled`` fall back to the numeric value); boundary
    ladders always use the numeric path.
    """

    def __init__(self, params: ModelParams, analytic: bool = False, disabled=()):
        self.params = params
        self.analytic = analytic
        self.disabled = tuple(disabled)
        self.w1, self.w2 = weights_for(params)
        self.cutoffs = (self.w1.cutoff, self.w2.cutoff)
        m1, m2 = np.meshgrid(np.arange(-2, self.w1.cutoff + 1), np.arange(-2, self.w2.cutoff + 1), indexing="ij")
        low, high = couplings(m1, m2)
        big = int(high.max()) + 1
        keys, inverse = np.unique(low.astype(np.int64) * big + high, return_inverse=True)
        self.sector_id = inverse.reshape(low.shape).astype(np.int64)
        self.low = (keys // big).astype(float)
        self.high = (keys % big).astype(float)
        try:
            self.evals, self.evecs = herm_eigen_batched(padded_hamiltonian(self.low, self.high, params.alpha))
        except NoConvergence as exc:
            raise NoConvergence(f"ladder eigensolve failed at alpha={params.alpha}: {exc}") from exc
        self._full = self.low > 0
        self._cache = {}

    @property
    def expected_trace(self) -> float:
        return float(np.sum(self.w1.weights) * np.sum(self.w2.weights))

    @property
    def tail(self) -> float:
        return 1.0 - self.expected_trace

    def propagators(self, gt: float) -> np.ndarray:
        u = _numeric_propagators(self.evals, self.evecs, float(gt))
        if self.analytic and np.any(self._full):
            ana = analytic_ladder_blocks(self.low[self._full], self.high[self._full], self.params.alpha, float(gt))
            for r, c in self.disabled:
                ana[:, r - 1, c - 1] = u[self._full, r - 1, c - 1]
            u[self._full] = ana
        return u

    def kernel(self, gt: float) -> np.ndarray:
        """K[r, a, s, b] at one time point (Hermitian under (r, a) <-> (s, b))."""
        vals = _accumulate(self.propagators(gt), self.sector_id, self.w1.weights, self.w2.weights, PAIRS)
        k = np.zeros((4, 4, 4, 4), dtype=np.complex128)
        r, a, s, b = PAIRS.T
        k[s, b, r, a] = np.conj(vals)
        k[r, a, s, b] = vals
        return k

    def kernel_series(self, gt_grid, workers: int = 1) -> np.ndarray:
        grid = np.ascontiguousarray(gt_grid, dtype=float)
        key = grid.tobytes()
        if key not in self._cache:
            if workers > 1:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    ks = list(pool.map(self.kernel, grid))
            else:
                ks = [self.kernel(g) for g in grid]
            self._cache[key] = np.array(ks).reshape(grid.shape + (4, 4, 4, 4))
        return self._cache[key]


@functools.lru_cache(maxsize=8)
def get_engine(params: ModelParams, analytic: bool = False, disabled: tuple = ()) -> ThermalEngine:
    return ThermalEngine(params, analytic=analytic, disabled=disabled)


def apply_kernel(kernels, rho0) -> np.ndarray:
    return np.einsum("...rasb,ab->...rs", kernels, rho0)


@dataclass
class ReducedState:
    gt: float
    rho: np.ndarray
    trace_error: float
    min_eig: float
    expected_trace: float = 1.0

    @property
    def tail(self) -> float:
        return 1.0 - self.expected_trace


@dataclass
class NegativityTrace:
    """Per-point reduced states and negativity for one (params, preparation) run."""

    gt: np.ndarray
    rho: np.ndarray
    epsilon: np.ndarray
    trace_error: np.ndarray
    min_eig: np.ndarray
    expected_trace: float
    cutoffs: tuple
    tails: tuple
    truncated: bool
    engine: str = "numeric"
    engine_disagreement: np.ndarray | None = None
    extras: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.gt)

    def state(self, i: int) -> ReducedState:
        return ReducedState(float(self.gt[i]), self.rho[i], float(self.trace_error[i]),
                            float(self.min_eig[i]), self.expected_trace)

    def rows(self):
        for i in range(len(self)):
            row = {"gt": float(self.gt[i]), "epsilon": float(self.epsilon[i]),
                   "trace_error": float(self.trace_error[i]), "min_eig": float(self.min_eig[i])}
            if self.engine_disagreement is not None:
                row["engine_disagreement"] = float(self.engine_disagreement[i])
            yield row


def _rho_series(params, prep, grid, analytic, workers, disabled=()):
    eng = get_engine(params, analytic, tuple(disabled))
    rho0 = initial_atomic_density(prep) if isinstance(prep, AtomPreparation) else np.asarray(prep)
    return eng, apply_kernel(eng.kernel_series(grid, workers), rho0)


def evolve_reduced(params: ModelParams, prep, gt: float, engine: str = "numeric") -> ReducedState:
    eng, rho = _rho_series(params, prep, np.array([gt]), engine == "analytic", 1)
    rho = rho[0]
    w, _ = herm_eigen_batched(rho)
    return ReducedState(float(gt), rho, abs(float(np.trace(rho).real) - 1.0), float(w[0]), eng.expected_trace)


def negativity_series(params: ModelParams, prep, gt_grid, engine: str = "numeric", workers: int = 1,
                      disabled=()) -> NegativityTrace:
    """Reduced state and negativity at each point of an ascending gt grid.

    ``engine="both"`` keeps the numeric states and records, per point, the
    max-abs entry difference against the closed-form engine.
    """
    if engine not in ENGINES:
        raise ValueError(f"engine must be one of {ENGINES}, got {engine!r}")
    grid = np.asarray(gt_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("gt grid must be a non-empty 1-d sequence")
    if np.any(np.diff(grid) < 0):
        raise ValueError("gt grid must be ascending")
    eng, rho = _rho_series(params, prep, grid, engine == "analytic", workers, disabled)
    disagreement = None
    if engine == "both":
        _, rho_a = _rho_series(params, prep, grid, True, workers, disabled)
        disagreement = np.max(np.abs(rho_a - rho), axis=(1, 2))
    w, _ = herm_eigen_batched(rho)
    trace = np.real(np.trace(rho, axis1=1, axis2=2))
    extras = {}
    if np.any(np.abs(trace - 1.0) > TRACE_TOL):
        # only reachable when cutoff_cap clamped a cutoff; negativity is taken on rho / tr(rho)
        neg = negativity_batch(rho / trace[:, None, None])
        extras["renormalized"] = True
    else:
        neg = negativity_batch(rho)
    return NegativityTrace(
        gt=grid, rho=rho, epsilon=neg, trace_error=np.abs(trace - 1.0), min_eig=w[:, 0],
        expected_trace=eng.expected_trace, cutoffs=eng.cutoffs, tails=(eng.w1.tail, eng.w2.tail),
        truncated=eng.w1.truncated or eng.w2.truncated, engine=engine, engine_disagreement=disagreement,
        extras=extras,
    )
