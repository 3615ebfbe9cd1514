import numpy as np
import pytest

from rieszlab.eigensolver import balance, eig, hessenberg
from rieszlab.errors import ConvergenceError


def _match(a, b):
    """Sort ``a`` to follow ``b`` by nearest neighbour."""
    out = np.empty_like(b)
    left = list(a)
    for i, v in enumerate(b):
        j = int(np.argmin(np.abs(np.array(left) - v)))
        out[i] = left.pop(j)
    return out


@pytest.mark.parametrize("seed,n", [(0, 5), (1, 30), (2, 80)])
def test_eigenvalues_match_numpy(seed, n):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    res = eig(a)
    ref = np.linalg.eigvals(a)
    np.testing.assert_allclose(_match(res.values, ref), ref, atol=1e-10 * np.linalg.norm(a))


@pytest.mark.parametrize("seed", [3, 4])
def test_right_and_left_residuals(seed):
    rng = np.random.default_rng(seed)
    n = 40
    a = np.diag(np.arange(1.0, n + 1) ** 2) + 0.3 * (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    res = eig(a)
    R, L = res.right, res.left
    np.testing.assert_allclose(np.linalg.norm(R, axis=0), 1.0, rtol=1e-13)
    assert np.max(np.abs(a @ R - R * res.values)) < 1e-10 * np.abs(res.values).max()
    assert np.max(np.abs(L.conj().T @ a - res.values[:, None] * L.conj().T)) < 1e-10 * np.abs(res.values).max()


def test_left_right_biorthogonal():
    rng = np.random.default_rng(7)
    n = 25
    a = np.diag(np.arange(n, dtype=float) * 3) + rng.normal(size=(n, n))
    res = eig(a)
    g = res.left.conj().T @ res.right
    off = g - np.diag(np.diag(g))
    assert np.max(np.abs(off)) < 1e-9
    assert np.min(np.abs(np.diag(g))) > 1e-3


def test_hermitian_real_spectrum():
    rng = np.random.default_rng(11)
    b = rng.normal(size=(20, 20))
    a = b + b.T
    res = eig(a)
    np.testing.assert_allclose(res.values.imag, 0.0, atol=1e-11)
    np.testing.assert_allclose(np.sort(res.values.real), np.linalg.eigvalsh(a), atol=1e-11)


def test_hessenberg_similarity():
    rng = np.random.default_rng(5)
    a = rng.normal(size=(12, 12)) + 0j
    h, q = hessenberg(a)
    np.testing.assert_allclose(np.tril(h, -2), 0.0, atol=1e-14)
    np.testing.assert_allclose(q @ h @ q.conj().T, a, atol=1e-12)
    np.testing.assert_allclose(q.conj().T @ q, np.eye(12), atol=1e-13)


def test_balance_is_diagonal_similarity():
    a = np.array([[1.0, 1e6, 0.0], [1e-6, 2.0, 1e5], [0.0, 1e-5, 3.0]], dtype=complex)
    b, d = balance(a)
    np.testing.assert_allclose(b, a * d[None, :] / d[:, None], rtol=1e-14)
    assert np.linalg.norm(b) < np.linalg.norm(a)


def test_jordan_block_values():
    a = np.array([[2.0, 1.0], [0.0, 2.0]])
    np.testing.assert_allclose(eig(a).values, [2.0, 2.0], atol=1e-12)


def test_empty_and_nonsquare():
    assert eig(np.zeros((0, 0))).values.size == 0
    with pytest.raises(ValueError):
        eig(np.zeros((2, 3)))


def test_iteration_cap_raises():
    rng = np.random.default_rng(0)
    with pytest.raises(ConvergenceError):
        eig(rng.normal(size=(30, 30)), max_iter=1)
