"""Dense complex linear algebra used by every other module.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Tensor products
use the left-factor-major (Kronecker) convention: the row index of ``A (x) B``
is ``i_A * rows(B) + i_B``.  The Hilbert-Schmidt inner product is
``<A, B> = Tr(A^dag B)``, antilinear in the first slot.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, NotHermitianError

ComplexMatrix = np.ndarray


@dataclass(frozen=True)
class Tolerance:
    """Numerical thresholds.

    atol
        Absolute Frobenius-norm threshold for residual checks.
    rank_rtol
        Relative singular-value cutoff for numerical rank decisions.
    """

    atol: float = 1e-9
    rank_rtol: float = 1e-8

    def __post_init__(self):
        if not self.atol > 0:
            raise ValueError(f"atol must be positive, got {self.atol}")
        if not 0 < self.rank_rtol < 1:
            raise ValueError(f"rank_rtol must lie in (0, 1), got {self.rank_rtol}")


DEFAULT_TOL = Tolerance()


def as_matrix(x) -> ComplexMatrix:
    a = np.asarray(x, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got shape {a.shape}")
    return a


def multiply(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def adjoint(a: ComplexMatrix) -> ComplexMatrix:
    return as_matrix(a).conj().T


def trace(a: ComplexMatrix) -> complex:
    return complex(np.trace(as_matrix(a)))


def hs_inner(a: ComplexMatrix, b: ComplexMatrix) -> complex:
    """Hilbert-Schmidt inner product Tr(a^dag b)."""
    return complex(np.vdot(a, b))


def fro(a) -> float:
    return float(np.linalg.norm(a))


def tensor(*ops: ComplexMatrix) -> ComplexMatrix:
    """Kronecker product, left factor major."""
    if not ops:
        return np.ones((1, 1), dtype=complex)
    return reduce(np.kron, (as_matrix(o) for o in ops))


def partial_trace_A(m: ComplexMatrix, dimA: int, dimB: int) -> ComplexMatrix:
    """Trace out the left tensor factor of an operator on C^dimA (x) C^dimB."""
    m = as_matrix(m)
    if m.shape != (dimA * dimB, dimA * dimB):
        raise DimensionError(f"matrix of shape {m.shape} is not ({dimA}*{dimB})-square")
    return np.einsum("ajak->jk", m.reshape(dimA, dimB, dimA, dimB))


def partial_trace_B(m: ComplexMatrix, dimA: int, dimB: int) -> ComplexMatrix:
    """Trace out the right tensor factor."""
    m = as_matrix(m)
    if m.shape != (dimA * dimB, dimA * dimB):
        raise DimensionError(f"matrix of shape {m.shape} is not ({dimA}*{dimB})-square")
    return np.einsum("ajbj->ab", m.reshape(dimA, dimB, dimA, dimB))


def hermiticity_residual(m: ComplexMatrix) -> float:
    return fro(m - adjoint(m))


def eig_hermitian(m: ComplexMatrix, tol: Tolerance = DEFAULT_TOL):
    """Eigen-decomposition of a Hermitian matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues ascending and
    eigenvectors as orthonormal columns.

    Raises
    ------
    NotHermitianError
        If ``||m - m^dag||_F`` exceeds ``atol * max(1, ||m||_F)``.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"eig_hermitian needs a square matrix, got {m.shape}")
    scale = max(1.0, fro(m))
    res = hermiticity_residual(m)
    if res > tol.atol * scale:
        raise NotHermitianError(f"matrix is not Hermitian (||M - M^dag||_F = {res:.3e})")
    w, v = np.linalg.eigh(0.5 * (m + adjoint(m)))
    return w, v


def numerical_rank(m: ComplexMatrix, tol: Tolerance = DEFAULT_TOL) -> int:
    s = np.linalg.svd(as_matrix(m), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.count_nonzero(s > tol.rank_rtol * s[0]))


def null_space(m: ComplexMatrix, tol: Tolerance = DEFAULT_TOL, scale: float = 0.0) -> ComplexMatrix:
    """Orthonormal columns spanning the numerical kernel of ``m``.

    Singular values up to ``rank_rtol * max(sigma_max, scale)`` count as
    zero.  ``scale`` lets the caller supply the natural size of the problem
    so that a matrix made entirely of rounding noise has a full kernel.
    """
    m = as_matrix(m)
    cols = m.shape[1]
    if m.shape[0] == 0:
        return np.eye(cols, dtype=complex)
    _, s, vh = np.linalg.svd(m, full_matrices=True)
    top = max(float(s[0]) if s.size else 0.0, scale)
    if top == 0:
        return np.eye(cols, dtype=complex)
    rank = int(np.count_nonzero(s > tol.rank_rtol * top))
    return vh[rank:].conj().T


def range_basis(m: ComplexMatrix, tol: Tolerance = DEFAULT_TOL) -> ComplexMatrix:
    """Orthonormal columns spanning the numerical column space of ``m``."""
    m = as_matrix(m)
    if m.size == 0:
        return np.zeros((m.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    if s[0] == 0:
        return np.zeros((m.shape[0], 0), dtype=complex)
    rank = int(np.count_nonzero(s > tol.rank_rtol * s[0]))
    return u[:, :rank]


def polar_isometry(m: ComplexMatrix, tol: Tolerance = DEFAULT_TOL) -> ComplexMatrix:
    """Partial-isometry factor ``W`` of the polar decomposition ``m = W |m|``.

    Singular values below ``rank_rtol * sigma_max`` are treated as zero, so
    ``W^dag W`` is the projector onto the numerical row space of ``m``.
    """
    m = as_matrix(m)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros_like(m)
    keep = s > tol.rank_rtol * s[0]
    return u[:, keep] @ vh[keep]


def psd_sqrt(m: ComplexMatrix, tol: Tolerance = DEFAULT_TOL) -> ComplexMatrix:
    w, v = eig_hermitian(m, tol)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ adjoint(v)


def orthonormalize(vectors: Iterable[np.ndarray], tol: Tolerance = DEFAULT_TOL,
                   basis: np.ndarray | None = None) -> np.ndarray:
    """Gram-Schmidt with a second re-orthogonalization pass.

    Vectors are rows.  Each candidate is orthogonalized twice against the
    accepted rows; it is kept if its remaining norm exceeds
    ``rank_rtol * max(1, original norm)``.  When ``basis`` (orthonormal rows)
    is given, the result extends it.
    """
    rows = [] if basis is None else list(np.asarray(basis, dtype=complex))
    for v in vectors:
        v = np.asarray(v, dtype=complex).ravel().copy()
        nrm0 = np.linalg.norm(v)
        if nrm0 == 0:
            continue
        if rows:
            q = np.asarray(rows)
            for _ in range(2):
                v -= q.T @ (q.conj() @ v)
        nrm = np.linalg.norm(v)
        if nrm > tol.rank_rtol * max(1.0, nrm0):
            rows.append(v / nrm)
    if not rows:
        n = 0 if basis is None else np.asarray(basis).shape[1]
        return np.zeros((0, n), dtype=complex)
    return np.asarray(rows)


def projector_residual(p: ComplexMatrix) -> float:
    """max(||P^2 - P||_F, ||P - P^dag||_F)."""
    p = as_matrix(p)
    return max(fro(p @ p - p), fro(p - adjoint(p)))


def projector_range(p: ComplexMatrix, tol: Tolerance = DEFAULT_TOL) -> ComplexMatrix:
    """Orthonormal columns spanning the range of an orthogonal projector."""
    w, v = eig_hermitian(p, tol)
    return v[:, w > 0.5]


def unitarity_residual(u: ComplexMatrix) -> float:
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        raise DimensionError(f"unitary must be square, got {u.shape}")
    return fro(adjoint(u) @ u - np.eye(u.shape[0]))


def isometry_residual(v: ComplexMatrix) -> float:
    v = as_matrix(v)
    return fro(adjoint(v) @ v - np.eye(v.shape[1]))


def complete_basis(v: ComplexMatrix, tol: Tolerance = DEFAULT_TOL) -> ComplexMatrix:
    """Orthonormal columns spanning the orthogonal complement of range(v)."""
    v = as_matrix(v)
    if v.shape[1] == 0:
        return np.eye(v.shape[0], dtype=complex)
    return null_space(adjoint(v), tol)


def basis_matrix(dim: int, i: int, j: int) -> ComplexMatrix:
    e = np.zeros((dim, dim), dtype=complex)
    e[i, j] = 1.0
    return e


def ket(dim: int, i: int) -> np.ndarray:
    e = np.zeros(dim, dtype=complex)
    e[i] = 1.0
    return e


def outer(a: Sequence[complex], b: Sequence[complex]) -> ComplexMatrix:
    """|a><b|"""
    return np.outer(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex).conj())
