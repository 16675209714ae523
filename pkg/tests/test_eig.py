"""Tests for the Jacobi Hermitian eigensolver."""

import numpy as np
import pytest

from scma_d2d.eig import (
    NonHermitianError,
    hermitian_eigenvalues,
    hermitian_eigh,
    jacobi_eigh_symmetric,
)


def random_hermitian(rng, n, scale=1.0):
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * (m + m.conj().T) / 2


class TestEigenvalues:
    def test_identity(self):
        assert np.allclose(hermitian_eigenvalues(np.eye(3)), [1.0, 1.0, 1.0])

    def test_diagonal_sorted(self):
        w = hermitian_eigenvalues(np.diag([3.0, 1.0, 2.0]).astype(complex))
        assert np.allclose(w, [1.0, 2.0, 3.0])

    def test_trace_identity(self):
        """Eigenvalue sum equals the trace for a random Hermitian 6x6."""
        q = random_hermitian(np.random.default_rng(0), 6)
        w = hermitian_eigenvalues(q)
        assert w.sum() == pytest.approx(np.trace(q).real, abs=1e-9)

    def test_matches_lapack(self):
        """Independent route: numpy's LAPACK eigvalsh agrees."""
        rng = np.random.default_rng(1)
        for n in (2, 3, 4, 6, 8):
            q = random_hermitian(rng, n, scale=rng.uniform(0.1, 10))
            assert np.allclose(hermitian_eigenvalues(q), np.linalg.eigvalsh(q),
                               rtol=1e-9, atol=1e-9 * np.linalg.norm(q))

    def test_tiny_scale(self):
        """Eigenvalues of physically tiny matrices (noise-power scale)."""
        rng = np.random.default_rng(2)
        q = random_hermitian(rng, 4, scale=1e-15)
        assert np.allclose(hermitian_eigenvalues(q), np.linalg.eigvalsh(q),
                           atol=1e-15 * 1e-9)

    def test_zero_matrix(self):
        assert np.allclose(hermitian_eigenvalues(np.zeros((3, 3))), 0.0)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NonHermitianError):
            hermitian_eigenvalues(np.array([[1.0, 2.0], [0.0, 1.0]]))


class TestEigenvectors:
    def test_reconstruction_residual(self):
        """|| Q V - V diag(w) || <= 1e-8 ||Q|| on random instances."""
        rng = np.random.default_rng(3)
        for _ in range(10):
            n = int(rng.integers(2, 8))
            q = random_hermitian(rng, n, scale=rng.uniform(0.5, 5))
            w, vec = hermitian_eigh(q)
            residual = np.linalg.norm(q @ vec - vec * w)
            assert residual <= 1e-8 * np.linalg.norm(q)

    def test_columns_are_unit(self):
        q = random_hermitian(np.random.default_rng(4), 5)
        _, vec = hermitian_eigh(q)
        assert np.allclose(np.linalg.norm(vec, axis=0), 1.0, atol=1e-9)


class TestRealSymmetric:
    def test_known_2x2(self):
        w, v = jacobi_eigh_symmetric(np.array([[2.0, 1.0], [1.0, 2.0]]))
        assert np.allclose(w, [1.0, 3.0])
        assert np.allclose(np.abs(v.T @ v), np.eye(2), atol=1e-12)

    def test_agrees_with_lapack(self):
        rng = np.random.default_rng(5)
        m = rng.normal(size=(7, 7))
        sym = (m + m.T) / 2
        w, _ = jacobi_eigh_symmetric(sym)
        assert np.allclose(w, np.linalg.eigvalsh(sym), atol=1e-10)


class TestWeylInequality:
    def test_additive_eigenvalue_bounds(self):
        """lambda_k(A) + lambda_1(B) <= lambda_k(A+B) <= lambda_k(A) + lambda_K(B)
        for random Hermitian pairs."""
        rng = np.random.default_rng(6)
        for _ in range(25):
            n = int(rng.integers(2, 6))
            a = random_hermitian(rng, n)
            b = random_hermitian(rng, n)
            wa = hermitian_eigenvalues(a)
            wb = hermitian_eigenvalues(b)
            wab = hermitian_eigenvalues(a + b)
            slack = 1e-9 * (np.linalg.norm(a) + np.linalg.norm(b))
            assert np.all(wa + wb[0] <= wab + slack)
            assert np.all(wab <= wa + wb[-1] + slack)
