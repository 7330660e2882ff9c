import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tctwophoton.propagator import (
    IndexOutOfSector, Sector, SectorKind, amp_a, analytic_entry, analytic_sector_block, enumerate_sectors, is_unitary,
    lam, sector_hamiltonian, sector_of, sector_propagator_numeric, theta, u22, u23,
)
from oracles import brute_force_propagator, full_hamiltonian

SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])
sectors = st.one_of(
    st.builds(lambda a, b: Sector(SectorKind.QUAD, (a, b)), st.integers(0, 30), st.integers(0, 30)),
    st.builds(lambda k: Sector(SectorKind.TRIPLE_LEFT, (k,)), st.integers(0, 30)),
    st.builds(lambda k: Sector(SectorKind.TRIPLE_RIGHT, (k,)), st.integers(1, 30)),
)
alphas = st.sampled_from([0.0, 0.1, 0.3, 1.0, 2.5])


def test_small_enumeration():
    found = enumerate_sectors(0, 0)
    assert Sector(SectorKind.QUAD, (0, 0)) in found
    assert Sector(SectorKind.TRIPLE_LEFT, (0,)) in found
    assert Sector(SectorKind.FROZEN, (0, 0)) in found
    assert sector_of(3, 5, 0) == Sector(SectorKind.FROZEN, (5, 0))


@pytest.mark.parametrize("c1, c2", [(0, 0), (3, 5), (7, 2)])
def test_box_partition(c1, c2):
    # every basis state of the box with n_i <= c_i + 2 lies in exactly one sector, and that sector lists it
    count = 0
    for n1 in range(c1 + 3):
        for n2 in range(c2 + 3):
            for atom in range(4):
                try:
                    sec = sector_of(atom, n1, n2)
                except IndexOutOfSector:
                    continue
                assert (atom, n1, n2) in sec.states()
                count += 1
    # |+-,0,n> style states plus the ones on the mode-0 edges are all physical, so nothing is skipped
    assert count == 4 * (c1 + 3) * (c2 + 3)


def test_sector_states_are_disjoint():
    seen = {}
    for sec in enumerate_sectors(6, 4):
        for state in sec.states():
            assert state not in seen
            seen[state] = sec


def test_sectors_match_dense_hamiltonian_blocks():
    # H never couples two different sectors
    dim = 8
    h = full_hamiltonian(0.7, dim)
    index = {}
    for a in range(4):
        for n1 in range(dim):
            for n2 in range(dim):
                index[(a, n1, n2)] = sector_of(a, n1, n2)
    keys = list(index)
    flat = {k: k[0] * dim * dim + k[1] * dim + k[2] for k in keys}
    for k in keys:
        for l in keys:
            if h[flat[k], flat[l]] != 0:
                assert index[k] == index[l]
    for sec in {index[k] for k in keys if max(k[1], k[2]) < dim - 2}:
        idx = [flat[s] for s in sec.states()]
        assert np.allclose(h[np.ix_(idx, idx)], sector_hamiltonian(sec, 0.7), atol=0)


def test_hamiltonian_examples():
    assert np.array_equal(sector_hamiltonian(Sector(SectorKind.FROZEN, (4, 0)), 0.3), np.zeros((1, 1)))
    h = sector_hamiltonian(Sector(SectorKind.TRIPLE_LEFT, (0,)), 0.1)
    assert np.array_equal(h.real, [[0, 0.1, 1], [0.1, 0, 1], [1, 1, 0]])
    v = np.array([1, -1, 0]) / math.sqrt(2)
    assert np.allclose(h @ v, -0.1 * v, atol=1e-15)
    # at alpha=0 a ladder at offset m has frequencies 0 and +-theta(m + 1)/2; theta(0, 0) = sqrt(8)
    # belongs to the lowest ladder, TripleLeft(0), and Quad(0, 0) carries theta(1, 1) = sqrt(40)
    assert theta(0, 0, 0.0) == math.sqrt(8)
    w = np.linalg.eigvalsh(sector_hamiltonian(Sector(SectorKind.TRIPLE_LEFT, (0,)), 0.0))
    assert np.allclose(w, [-math.sqrt(8) / 2, 0, math.sqrt(8) / 2], atol=1e-14)
    w = np.linalg.eigvalsh(sector_hamiltonian(Sector(SectorKind.QUAD, (0, 0)), 0.0))
    assert np.allclose(w, [-theta(1, 1, 0.0) / 2, 0, 0, theta(1, 1, 0.0) / 2], atol=1e-14)


def test_propagator_examples():
    for sec in (Sector(SectorKind.QUAD, (2, 3)), Sector(SectorKind.TRIPLE_RIGHT, (4,))):
        assert np.allclose(sector_propagator_numeric(sec, 0.3, 0.0), np.eye(sec.dim), atol=1e-15)
    assert np.array_equal(sector_propagator_numeric(Sector(SectorKind.FROZEN, (0, 7)), 0.3, 12.0), [[1.0]])
    gt = math.pi / math.sqrt(8)
    u = sector_propagator_numeric(Sector(SectorKind.QUAD, (0, 0)), 0.0, gt)
    # |++, 0, 0> sits on the ladder whose A and lambda carry the index (1, 1)
    assert abs(u[0, 0] - (1 + 2 * amp_a(1, 1, 0.0, gt) / lam(1, 1))) <= 1e-12
    assert abs(u[0, 0] - analytic_entry(1, 1, 0, 0, 0.0, gt)) <= 1e-12


@settings(max_examples=80, deadline=None)
@given(sectors, alphas, st.floats(0, 60))
def test_numeric_matches_taylor_series(sec, alpha, gt):
    ref = brute_force_propagator(sector_hamiltonian(sec, alpha), gt)
    assert np.abs(sector_propagator_numeric(sec, alpha, gt) - ref).max() <= 1e-9


@settings(max_examples=100, deadline=None)
@given(sectors, alphas, st.floats(0, 60), st.floats(0, 60))
def test_unitarity_and_group_property(sec, alpha, t1, t2):
    u1 = sector_propagator_numeric(sec, alpha, t1)
    u2 = sector_propagator_numeric(sec, alpha, t2)
    assert is_unitary(u1) and is_unitary(analytic_sector_block(sec, alpha, t1))
    assert np.abs(u1 @ u2 - sector_propagator_numeric(sec, alpha, t1 + t2)).max() <= 1e-11


@settings(max_examples=100, deadline=None)
@given(sectors, alphas, st.floats(0, 60))
def test_exchange_symmetry(sec, alpha, gt):
    idx = list(sec.local_indices)
    s = SWAP[np.ix_(idx, idx)]
    assert np.array_equal(s @ sector_hamiltonian(sec, alpha) @ s, sector_hamiltonian(sec, alpha))
    u = sector_propagator_numeric(sec, alpha, gt)
    assert np.abs(s @ u - u @ s).max() <= 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 200), st.integers(0, 200), st.floats(0, 10))
def test_theta_lambda_relation(n1, n2, alpha):
    t = theta(n1, n2, alpha)
    assert t >= alpha
    assert abs(t**2 - 4 * lam(n1, n2) - alpha**2) <= 1e-12 * t**2


@settings(max_examples=100, deadline=None)
@given(sectors, st.floats(0, 50))
def test_alpha_continuity(sec, gt):
    a = analytic_sector_block(sec, 1e-8, gt) - analytic_sector_block(sec, 0.0, gt)
    n = sector_propagator_numeric(sec, 1e-8, gt) - sector_propagator_numeric(sec, 0.0, gt)
    assert np.abs(a).max() <= 1e-6 and np.abs(n).max() <= 1e-6


def test_entries_at_zero_time_are_kronecker():
    for r in range(1, 5):
        for c in range(1, 5):
            assert analytic_entry(r, c, 2, 3, 0.4, 0.0) == (1.0 if r == c else 0.0)


@pytest.mark.parametrize("n1, n2", [(1, 1), (3, 7)])
def test_alpha_zero_reductions(n1, n2):
    for gt in (0.3, 1.7, 9.1):
        c = math.cos(theta(n1, n2, 0.0) * gt / 2)
        assert abs(u22(n1, n2, 0.0, gt) - (0.5 + c / 2)) <= 1e-14
        assert abs(u23(n1, n2, 0.0, gt) - (-0.5 + c / 2)) <= 1e-14


def test_negative_field_raises():
    with pytest.raises(IndexOutOfSector):
        analytic_entry(1, 1, -1, 0, 0.1, 1.0)
    with pytest.raises(IndexOutOfSector):
        sector_of(0, -1, 2)


@settings(max_examples=100, deadline=None)
@given(sectors, alphas, st.floats(0.01, 50))
def test_analytic_matches_numeric(sec, alpha, gt):
    diff = analytic_sector_block(sec, alpha, gt) - sector_propagator_numeric(sec, alpha, gt)
    assert np.abs(diff).max() <= 1e-9
