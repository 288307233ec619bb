import numpy as np
import pytest
from scipy.stats import unitary_group

from eofb import linalg
from eofb.decomposition import q_greater
from eofb.errors import NotHermitian, NotPSD, NotSquare, NotSymmetric
from eofb.smatrices import s_two_qubit
from eofb.states import random_density

from conftest import ginibre


def test_hermitian_eig_identity():
    eig = linalg.hermitian_eig(np.eye(4))
    np.testing.assert_allclose(eig.eigenvalues, [1, 1, 1, 1])
    assert linalg.is_unitary(eig.eigenvectors)[0]


def test_hermitian_eig_sorts_descending():
    eig = linalg.hermitian_eig(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_allclose(eig.eigenvalues, [3, 2, 1])


@pytest.mark.parametrize("n", [2, 4, 6, 12])
def test_hermitian_eig_reconstructs(rng, n):
    g = ginibre(rng, n, n)
    h = g + g.conj().T
    w, v = linalg.hermitian_eig(h)
    scale = np.max(np.abs(h))
    assert np.max(np.abs(v @ np.diag(w) @ v.conj().T - h)) <= 1e-10 * scale
    assert abs(w.sum() - np.trace(h).real) <= 1e-10 * scale
    assert np.all(np.diff(w) <= 0)


def test_hermitian_eig_errors():
    with pytest.raises(NotSquare):
        linalg.hermitian_eig(np.ones((2, 3)))
    with pytest.raises(NotHermitian) as info:
        linalg.hermitian_eig(np.array([[0, 1], [0, 0]]))
    assert info.value.deviation == pytest.approx(1.0)


def test_psd_sqrt_examples():
    np.testing.assert_allclose(linalg.psd_sqrt(np.eye(3)), np.eye(3))
    np.testing.assert_allclose(linalg.psd_sqrt(np.diag([4.0, 0.0, 1.0])), np.diag([2.0, 0.0, 1.0]), atol=1e-15)


@pytest.mark.parametrize("rank", [1, 3, 6])
def test_psd_sqrt_squares_back(rng, rank):
    phi = ginibre(rng, 6, rank)
    rho = phi @ phi.conj().T
    rho /= np.trace(rho).real
    root = linalg.psd_sqrt(rho)
    assert linalg.hermitian_deviation(root) <= 1e-14
    assert np.max(np.abs(root @ root - rho)) <= 1e-9
    assert linalg.hermitian_eig(root).eigenvalues[-1] >= -1e-14


def test_psd_sqrt_rejects_negative():
    with pytest.raises(NotPSD):
        linalg.psd_sqrt(np.diag([1.0, -0.1]))
    # within tolerance the negative part is clamped
    np.testing.assert_allclose(linalg.psd_sqrt(np.diag([1.0, -1e-12])), np.diag([1.0, 0.0]))


def test_takagi_diagonal():
    tk = linalg.takagi(np.diag([2.0, 1.0]))
    np.testing.assert_allclose(tk.diagonal, [2, 1])
    np.testing.assert_allclose(tk.unitary.T @ np.diag(tk.diagonal) @ tk.unitary, np.diag([2.0, 1.0]), atol=1e-15)


def test_takagi_swap():
    m = np.array([[0.0, 1.0], [1.0, 0.0]])
    tk = linalg.takagi(m)
    np.testing.assert_allclose(tk.diagonal, [1, 1])
    assert np.max(np.abs(tk.unitary.T @ np.diag(tk.diagonal) @ tk.unitary - m)) <= 1e-12


def test_takagi_rejects_hermitian_nonsymmetric():
    with pytest.raises(NotSymmetric):
        linalg.takagi(np.array([[1, 1j], [-1j, 1]]))


def _random_symmetric(rng, n, rank):
    g = ginibre(rng, n, rank)
    return g @ g.T


@pytest.mark.parametrize("n,rank", [(2, 2), (4, 4), (6, 4), (6, 1), (10, 4), (12, 12)])
def test_takagi_reconstruction_and_singular_values(rng, n, rank):
    for _ in range(20):
        m = _random_symmetric(rng, n, rank)
        tk = linalg.takagi(m)
        assert np.max(np.abs(tk.unitary.T @ np.diag(tk.diagonal) @ tk.unitary - m)) <= 1e-9 * max(1, tk.diagonal[0])
        np.testing.assert_allclose(tk.diagonal, np.linalg.svd(m, compute_uv=False), atol=1e-10 * max(1, tk.diagonal[0]))
        assert linalg.is_unitary(tk.unitary, 1e-12)[0]
        assert np.all(np.diff(tk.diagonal) <= 0)


def test_takagi_degenerate_symmetric_unitary(rng):
    # every singular value equals 1: one fully degenerate block
    v = unitary_group.rvs(6, random_state=rng)
    m = v @ v.T
    tk = linalg.takagi(m)
    np.testing.assert_allclose(tk.diagonal, np.ones(6), atol=1e-12)
    assert np.max(np.abs(tk.unitary.T @ np.diag(tk.diagonal) @ tk.unitary - m)) <= 1e-12


def test_takagi_congruence_invariance(rng):
    for _ in range(20):
        m = _random_symmetric(rng, 6, 4)
        u = unitary_group.rvs(6, random_state=rng)
        a = linalg.takagi(u.T @ m @ u).diagonal
        b = linalg.takagi(m).diagonal
        np.testing.assert_allclose(a, b, atol=1e-10 * b[0])


def test_takagi_matches_spin_flip_spectrum():
    # two independent routes to the same lambdas
    s = s_two_qubit().matrix
    for seed in range(20):
        rho = random_density(2, 1 + seed % 4, seed).matrix
        w = linalg.psd_factor(rho)
        lam = linalg.takagi(w.T @ s @ w).diagonal
        root = linalg.psd_sqrt(rho)
        ev = linalg.hermitian_eig(root @ s @ rho.conj() @ s @ root).eigenvalues
        np.testing.assert_allclose(lam**2, np.clip(ev, 0, None), atol=1e-12)


def test_is_unitary():
    assert linalg.is_unitary(np.eye(3)) == (True, 0.0)
    ok, dev = linalg.is_unitary(2 * np.eye(3))
    assert not ok and dev == pytest.approx(3.0)
    assert linalg.is_unitary(q_greater(4), 1e-12)[0]


def test_psd_factor_rank(rng):
    phi = ginibre(rng, 6, 3)
    rho = phi @ phi.conj().T
    f = linalg.psd_factor(rho)
    assert np.count_nonzero(np.any(f != 0, axis=0)) == 3
    assert np.max(np.abs(f @ f.conj().T - rho)) <= 1e-12 * np.max(np.abs(rho))


def test_descending_order_is_stable():
    assert list(linalg.descending_order(np.array([1.0, 2.0, 1.0, 2.0]))) == [1, 3, 0, 2]
