"""Dense complex linear-algebra helpers shared by the channel and optimizer code."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

# Hermitian deviation accepted before decomposition, relative to the operand
# norm (absolute 1e-12 for an exactly-zero matrix).
HERMITIAN_RTOL = 1e-10


class EigenPair(NamedTuple):
    """Eigendecomposition result: ``values`` ascending, ``vectors[:, i]`` unit norm."""

    values: np.ndarray
    vectors: np.ndarray


def frobenius_sq(a: np.ndarray) -> float:
    """Squared Frobenius norm: sum of squared entry magnitudes."""
    a = np.asarray(a)
    return float(np.sum(np.abs(a) ** 2))


def vec(a: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization of a matrix."""
    return np.ravel(a, order="F")


def khatri_rao(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Column-wise Kronecker product.

    For ``a`` of shape (m, k) and ``b`` of shape (n, k), returns the (m*n, k)
    matrix whose column j is ``kron(a[:, j], b[:, j])``.  This is the product
    that maps vec(X @ diag(y) @ Z) onto khatri_rao(Z.T, X) @ y, which is how
    a diagonal unknown sandwiched between two known matrices becomes a plain
    linear system.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError("khatri_rao expects two matrices")
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"column counts differ: {a.shape[1]} vs {b.shape[1]}")
    m, k = a.shape
    n, _ = b.shape
    return (a[:, None, :] * b[None, :, :]).reshape(m * n, k)


def hermitian_eig(a: np.ndarray) -> EigenPair:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    The input is symmetrized (a + a^H)/2 before the decomposition to absorb
    round-off from products like G^H G.  Inputs whose anti-Hermitian part
    exceeds ``HERMITIAN_RTOL`` relative to the matrix norm are rejected.

    Repeated eigenvalues only pin down the spanned eigenspace; callers must
    not rely on individual eigenvectors in that case.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    norm = np.linalg.norm(a)
    tol = HERMITIAN_RTOL * norm if norm > 0 else 1e-12
    if np.linalg.norm(a - a.conj().T) > tol:
        raise ValueError("matrix is not Hermitian within tolerance")
    h = (a + a.conj().T) / 2
    values, vectors = np.linalg.eigh(h)
    return EigenPair(values, vectors)
