"""Invariant sectors of the two-photon, dipole-coupled two-atom Hamiltonian and their propagators.

The interaction creates or destroys one photon in each mode together, so the
photon-number difference and (atomic excitations + photon pairs) are conserved.
Every sector is a slice of the generic four-state ladder

    |++, m1, m2>,  |+-, m1+1, m2+1>,  |-+, m1+1, m2+1>,  |--, m1+2, m2+2>

with the states that would carry a negative photon number removed.  Labelling
the ladder by its (possibly negative) offset ``m`` lets boundary sectors share
the 4x4 "padded" layout: missing states simply decouple.

Energies are in units of hbar*g, times are ``gt``.  Atomic index order is
0=|++>, 1=|+->, 2=|-+>, 3=|-->.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .smallmat import herm_eigen, herm_eigen_batched, max_abs

# photon pairs carried by each atomic basis state relative to the ladder offset
SHIFT = (0, 1, 1, 2)


class IndexOutOfSector(ValueError):
    pass


class SectorKind(str, Enum):
    QUAD = "quad"
    TRIPLE_LEFT = "triple_left"
    TRIPLE_RIGHT = "triple_right"
    FROZEN = "frozen"


@dataclass(frozen=True, order=True)
class Sector:
    """One invariant subspace.

    ``label`` is ``(m1, m2)`` for QUAD, ``(k,)`` for the triples and
    ``(n1, n2)`` (the photon numbers of the dark ``|-->`` state) for FROZEN.
    """

    kind: SectorKind
    label: tuple

    @property
    def offset(self) -> tuple:
        if self.kind is SectorKind.QUAD:
            return self.label
        if self.kind is SectorKind.TRIPLE_LEFT:
            return (-1, self.label[0] - 1)
        if self.kind is SectorKind.TRIPLE_RIGHT:
            return (self.label[0] - 1, -1)
        return (self.label[0] - 2, self.label[1] - 2)

    @property
    def local_indices(self) -> tuple:
        return {SectorKind.QUAD: (0, 1, 2, 3), SectorKind.FROZEN: (3,)}.get(self.kind, (1, 2, 3))

    @property
    def dim(self) -> int:
        return len(self.local_indices)

    def states(self):
        """(atom, n1, n2) triples in basis order."""
        m1, m2 = self.offset
        return [(a, m1 + SHIFT[a], m2 + SHIFT[a]) for a in self.local_indices]


def sector_at_offset(m1: int, m2: int) -> Sector:
    if m1 >= 0 and m2 >= 0:
        return Sector(SectorKind.QUAD, (m1, m2))
    if min(m1, m2) >= -1:
        if m1 == -1:
            return Sector(SectorKind.TRIPLE_LEFT, (m2 + 1,))
        return Sector(SectorKind.TRIPLE_RIGHT, (m1 + 1,))
    if min(m1, m2) < -2:
        raise IndexOutOfSector(f"offset ({m1}, {m2}) holds no physical state")
    return Sector(SectorKind.FROZEN, (m1 + 2, m2 + 2))


def sector_of(atom: int, n1: int, n2: int) -> Sector:
    """Sector containing the basis state |atom, n1, n2>."""
    if n1 < 0 or n2 < 0:
        raise IndexOutOfSector(f"negative photon number ({n1}, {n2})")
    sec = sector_at_offset(n1 - SHIFT[atom], n2 - SHIFT[atom])
    if atom not in sec.local_indices:
        raise IndexOutOfSector(f"|{atom}, {n1}, {n2}> is not a physical state")
    return sec


def enumerate_sectors(cutoff1: int, cutoff2: int) -> list:
    """Sectors reached from every |atom, n1, n2> with n1 <= cutoff1, n2 <= cutoff2.

    The returned sectors are disjoint and every state they contain has photon
    numbers within ``cutoff + 2``.
    """
    found = set()
    for n1 in range(cutoff1 + 1):
        for n2 in range(cutoff2 + 1):
            for atom in range(4):
                found.add(sector_of(atom, n1, n2))
    return sorted(found)


def couplings(m1, m2):
    """Squared couplings (|++>-|+->, |+->-|-->) of the ladder at offset m, zero for missing states."""
    m1 = np.asarray(m1)
    m2 = np.asarray(m2)
    low = np.maximum(m1 + 1, 0) * np.maximum(m2 + 1, 0)
    high = np.maximum(m1 + 2, 0) * np.maximum(m2 + 2, 0)
    return low, high


def padded_hamiltonian(low_sq, high_sq, alpha: float) -> np.ndarray:
    """4x4 ladder Hamiltonians for arrays of squared couplings (broadcast)."""
    low_sq = np.asarray(low_sq, dtype=float)
    high_sq = np.asarray(high_sq, dtype=float)
    h = np.zeros(np.broadcast(low_sq, high_sq).shape + (4, 4))
    gl = np.sqrt(low_sq)
    gh = np.sqrt(high_sq)
    h[..., 0, 1] = h[..., 1, 0] = gl
    h[..., 0, 2] = h[..., 2, 0] = gl
    h[..., 1, 3] = h[..., 3, 1] = gh
    h[..., 2, 3] = h[..., 3, 2] = gh
    h[..., 1, 2] = h[..., 2, 1] = alpha
    return h


def sector_hamiltonian(sec: Sector, alpha: float) -> np.ndarray:
    low, high = couplings(*sec.offset)
    h = padded_hamiltonian(low, high, alpha)
    idx = np.array(sec.local_indices)
    return h[np.ix_(idx, idx)].astype(np.complex128)


@functools.lru_cache(maxsize=4096)
def _sector_eigen(sec: Sector, alpha: float):
    e = herm_eigen(sector_hamiltonian(sec, alpha))
    return e.eigenvalues, e.eigenvectors


def sector_propagator_numeric(sec: Sector, alpha: float, gt: float) -> np.ndarray:
    """exp(-i H gt) on one sector from its (memoized) Jacobi eigendecomposition."""
    w, v = _sector_eigen(sec, float(alpha))
    return (v * np.exp(-1j * w * gt)) @ np.conj(v.T)


# ---------------------------------------------------------------------------
# closed-form path

def lam(n1, n2):
    """2[(n1+1)(n2+1) + n1 n2]: the ladder operator combination evaluated on |n1, n2>."""
    n1 = np.asarray(n1, dtype=float)
    n2 = np.asarray(n2, dtype=float)
    return 2.0 * ((n1 + 1) * (n2 + 1) + n1 * n2)


def theta(n1, n2, alpha):
    return np.sqrt(4.0 * lam(n1, n2) + alpha * alpha)


def amp_a(n1, n2, alpha, gt):
    th = theta(n1, n2, alpha)
    half = 0.5 * th * gt
    return np.exp(-0.5j * alpha * gt) * (np.cos(half) + 1j * (alpha / th) * np.sin(half)) - 1.0


def amp_b(n1, n2, alpha, gt):
    th = theta(n1, n2, alpha)
    return np.exp(-0.5j * (alpha + th) * gt) * (1.0 - np.exp(1j * th * gt))


def _middle(n1, n2, alpha, gt, sign):
    # the misprinted bracket in the middle term is read as 2*theta*exp(i(3 alpha + theta) gt / 2)
    th = theta(n1, n2, alpha)
    e = np.exp(1j * th * gt)
    pre = np.exp(-0.5j * (alpha + th) * gt) / (4.0 * th)
    return pre * ((1.0 - e) * alpha + sign * 2.0 * th * np.exp(0.5j * (3.0 * alpha + th) * gt) + th * (1.0 + e))


def u22(n1, n2, alpha, gt):
    return _middle(n1, n2, alpha, gt, 1.0)


def u23(n1, n2, alpha, gt):
    return _middle(n1, n2, alpha, gt, -1.0)


def analytic_entry(row: int, col: int, n1: int, n2: int, alpha: float, gt: float) -> complex:
    """Closed-form <row; f1, f2| U(gt) |col; n1, n2> (rows/cols 1..4 as |++>,|+->,|-+>,|-->).

    Operator strings act right to left on |n1, n2>; A, B, lambda, theta take the
    photon numbers present where they stand.  The final field is fixed by
    conservation.  Raises IndexOutOfSector when either state does not exist.
    """
    r, c = row - 1, col - 1
    if not (0 <= r < 4 and 0 <= c < 4):
        raise ValueError(f"row/col must be 1..4, got ({row}, {col})")
    if n1 < 0 or n2 < 0:
        raise IndexOutOfSector(f"negative photon number ({n1}, {n2})")
    d = SHIFT[r] - SHIFT[c]
    if n1 + d < 0 or n2 + d < 0:
        raise IndexOutOfSector(f"<{row}|U|{col}> leaves the Fock space from ({n1}, {n2})")
    # ladder offset of the column state; A, B, theta, lambda always sit at m + 1
    m1, m2 = n1 - SHIFT[c], n2 - SHIFT[c]
    low = (m1 + 1) * (m2 + 1)
    high = (m1 + 2) * (m2 + 2)
    k1, k2 = m1 + 1, m2 + 1

    def a_over_lam():
        return amp_a(k1, k2, alpha, gt) / lam(k1, k2)

    def b_over_theta():
        return amp_b(k1, k2, alpha, gt) / theta(k1, k2, alpha)

    if (r, c) == (0, 0):
        val = 1.0 + 2.0 * low * a_over_lam()
    elif (r, c) == (3, 3):
        # zero prefactor: the dark |--> state of a frozen sector
        val = 1.0 if high == 0 else 1.0 + 2.0 * high * a_over_lam()
    elif (r, c) in ((0, 3), (3, 0)):
        val = 2.0 * np.sqrt(low * high) * a_over_lam()
    elif (r, c) in ((1, 0), (2, 0), (0, 1), (0, 2)):
        val = np.sqrt(low) * b_over_theta()
    elif (r, c) in ((3, 1), (3, 2), (1, 3), (2, 3)):
        val = np.sqrt(high) * b_over_theta()
    elif r == c:
        val = u22(n1, n2, alpha, gt)
    else:
        val = u23(n1, n2, alpha, gt)
    return complex(val)


def analytic_ladder_blocks(low_sq, high_sq, alpha: float, gt: float) -> np.ndarray:
    """Closed-form 4x4 propagators for ladders with squared couplings (low_sq, high_sq).

    Valid whenever ``low_sq + high_sq > 0``; the engine only feeds full (QUAD) ladders.
    """
    low = np.asarray(low_sq, dtype=float)
    high = np.asarray(high_sq, dtype=float)
    lm = 2.0 * (low + high)
    th = np.sqrt(4.0 * lm + alpha * alpha)
    half = 0.5 * th * gt
    a = np.exp(-0.5j * alpha * gt) * (np.cos(half) + 1j * (alpha / th) * np.sin(half)) - 1.0
    e = np.exp(1j * th * gt)
    b = np.exp(-0.5j * (alpha + th) * gt) * (1.0 - e)
    pre = np.exp(-0.5j * (alpha + th) * gt) / (4.0 * th)
    mid = 2.0 * th * np.exp(0.5j * (3.0 * alpha + th) * gt)
    diag = pre * ((1.0 - e) * alpha + mid + th * (1.0 + e))
    cross = pre * ((1.0 - e) * alpha - mid + th * (1.0 + e))
    al = a / lm
    bt = b / th
    u = np.empty(low.shape + (4, 4), dtype=np.complex128)
    u[..., 0, 0] = 1.0 + 2.0 * low * al
    u[..., 3, 3] = 1.0 + 2.0 * high * al
    u[..., 0, 3] = u[..., 3, 0] = 2.0 * np.sqrt(low * high) * al
    u[..., 1, 0] = u[..., 2, 0] = u[..., 0, 1] = u[..., 0, 2] = np.sqrt(low) * bt
    u[..., 3, 1] = u[..., 3, 2] = u[..., 1, 3] = u[..., 2, 3] = np.sqrt(high) * bt
    u[..., 1, 1] = u[..., 2, 2] = diag
    u[..., 1, 2] = u[..., 2, 1] = cross
    return u


def analytic_sector_block(sec: Sector, alpha: float, gt: float) -> np.ndarray:
    """Assemble a sector propagator entry by entry from :func:`analytic_entry`."""
    states = sec.states()
    d = len(states)
    u = np.empty((d, d), dtype=np.complex128)
    for j, (ca, cn1, cn2) in enumerate(states):
        for i, (ra, _, _) in enumerate(states):
            u[i, j] = analytic_entry(ra + 1, ca + 1, cn1, cn2, alpha, gt)
    return u


@dataclass
class CrossCheck:
    """Entry-wise analytic vs numeric disagreement over a (sector, alpha, gt) grid."""

    max_by_entry: np.ndarray  # (4, 4) worst |analytic - numeric| per ladder entry
    tol: float

    @property
    def max_disagreement(self) -> float:
        return float(self.max_by_entry.max())

    @property
    def disabled(self) -> list:
        """1-based (row, col) entries that failed and must fall back to the numeric path."""
        bad = np.argwhere(self.max_by_entry > self.tol)
        return [(int(i) + 1, int(j) + 1) for i, j in bad]


def cross_check(alphas=(0.0, 0.1, 0.3, 1.0), max_n: int = 20, gt_grid=None, tol: float = 1e-9) -> CrossCheck:
    """Compare the closed-form ladder blocks with Jacobi propagation on every QUAD sector m <= max_n."""
    if gt_grid is None:
        gt_grid = 0.1 * np.arange(1, 501)
    gt_grid = np.asarray(gt_grid, dtype=float)
    m1, m2 = np.meshgrid(np.arange(max_n + 1), np.arange(max_n + 1), indexing="ij")
    low, high = couplings(m1.ravel(), m2.ravel())
    worst = np.zeros((4, 4))
    for alpha in alphas:
        w, v = herm_eigen_batched(padded_hamiltonian(low, high, alpha))
        vh = np.conj(np.swapaxes(v, 1, 2))
        for gt in gt_grid:
            num = (v * np.exp(-1j * w * gt)[:, None, :]) @ vh
            ana = analytic_ladder_blocks(low, high, alpha, gt)
            worst = np.maximum(worst, np.max(np.abs(ana - num), axis=0))
    return CrossCheck(worst, tol)


def is_unitary(u, tol=1e-12) -> bool:
    u = np.asarray(u)
    return max_abs(np.conj(u.T) @ u - np.eye(u.shape[0])) <= tol
