import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tctwophoton.smallmat import (
    DimMismatch, NoConvergence, NotHermitian, adjoint, expm_hermitian, herm_eigen, herm_eigen_batched,
    identity, mat_mul,
)
from oracles import brute_force_propagator


def random_hermitian(rng, d=4):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return g + g.conj().T


def random_unitary(rng, d=4):
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_identity_eigenvalues():
    res = herm_eigen(identity(4))
    assert np.array_equal(res.eigenvalues, np.ones(4))


def test_diagonal_sorted_ascending():
    res = herm_eigen(np.diag([3.0, -1.0, 0.0, 2.0]))
    assert np.array_equal(res.eigenvalues, [-1.0, 0.0, 2.0, 3.0])


def test_pauli_x():
    res = herm_eigen([[0, 1], [1, 0]])
    assert np.allclose(res.eigenvalues, [-1, 1], atol=1e-15)
    v = res.eigenvectors
    # fix the arbitrary phase of each column before comparing
    v = v / (v[0] / np.abs(v[0]))
    assert np.allclose(v[:, 0], np.array([1, -1]) / np.sqrt(2), atol=1e-15)
    assert np.allclose(v[:, 1], np.array([1, 1]) / np.sqrt(2), atol=1e-15)


def test_trace_identity_seeded():
    rng = np.random.default_rng(7)
    for _ in range(50):
        h = random_hermitian(rng)
        w = herm_eigen(h).eigenvalues
        assert abs(w.sum() - np.trace(h).real) <= 1e-12 * np.abs(h).max()


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([1, 2, 3, 4]))
def test_residuals_and_orthonormality(seed, d):
    rng = np.random.default_rng(seed)
    h = random_hermitian(rng, d)
    res = herm_eigen(h)
    w, v = res.eigenvalues, res.eigenvectors
    scale = np.abs(h).max()
    assert np.abs(h @ v - v * w).max() <= 1e-12 * scale
    assert np.abs(v.conj().T @ v - np.eye(d)).max() <= 1e-12
    assert np.all(np.diff(w) >= 0)
    assert np.allclose(w, np.linalg.eigvalsh(h), atol=1e-12 * scale)


def test_unitary_conjugation_invariance():
    rng = np.random.default_rng(11)
    for _ in range(50):
        h = random_hermitian(rng)
        u = random_unitary(rng)
        a = herm_eigen(h).eigenvalues
        b = herm_eigen(u @ h @ u.conj().T).eigenvalues
        assert np.abs(a - b).max() <= 1e-11


def test_degenerate_ties_keep_order():
    w, v = herm_eigen_batched(np.diag([2.0, 1.0, 1.0, 0.0]).astype(complex))
    assert np.array_equal(w, [0.0, 1.0, 1.0, 2.0])
    # equal eigenvalues keep their original index order
    assert np.argmax(np.abs(v[:, 1])) == 1 and np.argmax(np.abs(v[:, 2])) == 2


def test_batched_matches_single():
    rng = np.random.default_rng(3)
    hs = np.array([random_hermitian(rng) for _ in range(20)])
    w, _ = herm_eigen_batched(hs)
    for h, wi in zip(hs, w):
        assert np.array_equal(herm_eigen(h).eigenvalues, wi)


def test_not_hermitian():
    with pytest.raises(NotHermitian):
        herm_eigen([[0, 1], [0, 0]])


def test_no_convergence_with_zero_sweeps():
    rng = np.random.default_rng(0)
    with pytest.raises(NoConvergence):
        herm_eigen_batched(random_hermitian(rng), max_sweeps=0)


def test_mat_mul_examples():
    rng = np.random.default_rng(5)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    b = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    assert np.array_equal(mat_mul(a, identity(4)), a)
    p = np.diag([1.0, 0, 0, 0])
    assert np.array_equal(mat_mul(p, p), p)
    assert np.abs(adjoint(mat_mul(a, b)) - mat_mul(adjoint(b), adjoint(a))).max() <= 1e-15 * np.abs(a).max() * np.abs(b).max()
    with pytest.raises(DimMismatch):
        mat_mul(np.eye(3), np.eye(4))


def test_mat_mul_associative():
    rng = np.random.default_rng(9)
    for _ in range(50):
        a, b, c = (rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)) for _ in range(3))
        assert np.abs(mat_mul(mat_mul(a, b), c) - mat_mul(a, mat_mul(b, c))).max() <= 1e-13


def test_adjoint_examples():
    s = np.array([[1.0, 2.0], [2.0, 3.0]])
    assert np.array_equal(adjoint(s), s)
    rng = np.random.default_rng(1)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    assert np.array_equal(adjoint(adjoint(a)), a)
    assert np.array_equal(adjoint(np.diag([1j, -1j, 0, 1])), np.diag([-1j, 1j, 0, 1]))


def test_expm_against_taylor():
    rng = np.random.default_rng(2)
    h = random_hermitian(rng)
    for gt in (0.0, 0.3, 2.5):
        assert np.abs(expm_hermitian(h, gt) - brute_force_propagator(h, gt)).max() <= 1e-12


def test_subnormal_offdiagonal_next_to_large_one():
    # a subnormal entry must not turn the rotation phase into inf/nan
    a = np.diag([1.0, 0.5, 0.2, 0.1]).astype(complex)
    a[0, 1], a[1, 0] = 3e-310 + 4e-310j, 3e-310 - 4e-310j
    a[2, 3] = a[3, 2] = 0.3
    w, v = herm_eigen_batched(a)
    assert np.all(np.isfinite(w)) and np.abs(a @ v - v * w).max() <= 1e-15
