"""Cyclic Jacobi eigensolver for complex Hermitian matrices.

A Hermitian Q = A + iB (A symmetric, B antisymmetric) is embedded as the
real symmetric 2n x 2n matrix [[A, -B], [B, A]], whose spectrum is that of
Q with every eigenvalue doubled; classic two-sided Jacobi rotations then
drive the off-diagonal mass to zero.  A real eigenvector (u; v) of the
embedding maps back to the complex eigenvector u + iv.  Matrices in this
package are tiny (K <= 8), where Jacobi's simplicity and unconditional
convergence beat any fancier scheme.
"""

from __future__ import annotations

import numpy as np


class NonHermitianError(ValueError):
    """Input matrix is not Hermitian within tolerance."""


class JacobiConvergenceError(RuntimeError):
    """Sweep limit reached before the off-diagonal threshold."""


def jacobi_eigh_symmetric(a, off_diag_rel_tol=1e-12, max_sweeps=60):
    """Eigendecomposition of a real symmetric matrix by cyclic Jacobi.

    Sweeps rotate every (p, q) pair whose magnitude exceeds
    off_diag_rel_tol times the Frobenius norm of the input, until none
    does.  Returns (eigenvalues ascending, eigenvectors as columns).
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    v = np.eye(n)
    if n == 1:
        return a.reshape(1).copy(), v
    thresh = off_diag_rel_tol * np.linalg.norm(a)
    for _ in range(max_sweeps):
        off = np.abs(a - np.diag(np.diag(a))).max()
        if off <= thresh:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= thresh:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                for m in (a,):
                    row_p = m[p, :].copy()
                    row_q = m[q, :].copy()
                    m[p, :] = c * row_p - s * row_q
                    m[q, :] = s * row_p + c * row_q
                    col_p = m[:, p].copy()
                    col_q = m[:, q].copy()
                    m[:, p] = c * col_p - s * col_q
                    m[:, q] = s * col_p + c * col_q
                a[p, q] = a[q, p] = 0.0
                col_p = v[:, p].copy()
                col_q = v[:, q].copy()
                v[:, p] = c * col_p - s * col_q
                v[:, q] = s * col_p + c * col_q
    else:
        raise JacobiConvergenceError(f"no convergence in {max_sweeps} sweeps")
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def _check_hermitian(q):
    q = np.asarray(q, dtype=complex)
    n = q.shape[0]
    if q.shape != (n, n):
        raise ValueError("matrix must be square")
    scale = np.linalg.norm(q)
    if np.linalg.norm(q - q.conj().T) > 1e-10 * max(scale, 1e-300):
        raise NonHermitianError("matrix is not Hermitian within 1e-10 relative")
    return q, n


def hermitian_eigh(q):
    """(eigenvalues ascending, complex eigenvector columns) of Hermitian q."""
    q, n = _check_hermitian(q)
    a, b = q.real.copy(), q.imag.copy()
    embedded = np.block([[a, -b], [b, a]])
    w2, v2 = jacobi_eigh_symmetric(embedded)
    w = w2[0::2]
    cols = v2[:, 0::2]
    vectors = cols[:n, :] + 1j * cols[n:, :]
    return w, vectors


def hermitian_eigenvalues(q):
    """Real eigenvalues of a Hermitian matrix in nondecreasing order."""
    w, _ = hermitian_eigh(q)
    return w
