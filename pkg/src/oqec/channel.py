"""Quantum channels in operator-sum (Kraus) form."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ChannelError, DimensionError, NotPSDError, TracePreservationError
from .matkit import DEFAULT_TOL, ComplexMatrix, Tolerance, as_matrix, eig_hermitian, fro


@dataclass(frozen=True)
class ChannelReport:
    trace_preserving: bool
    tp_residual: float
    unital: bool
    unital_residual: float
    kraus_count: int
    dim: int

    def as_dict(self) -> dict:
        return {
            "dim": self.dim,
            "kraus_count": self.kraus_count,
            "trace_preserving": self.trace_preserving,
            "tp_residual": self.tp_residual,
            "unital": self.unital,
            "unital_residual": self.unital_residual,
        }


def _stack(kraus: Sequence) -> np.ndarray:
    if len(kraus) == 0:
        raise ChannelError("Kraus list is empty")
    mats = [as_matrix(k) for k in kraus]
    d = mats[0].shape[0]
    for i, k in enumerate(mats):
        if k.shape != (d, d):
            raise ChannelError(
                f"Kraus operator {i} has shape {k.shape}; expected ({d}, {d})"
            )
    return np.stack(mats)


def tp_residual(kraus: np.ndarray) -> float:
    d = kraus.shape[-1]
    return fro(np.einsum("aji,ajk->ik", kraus.conj(), kraus) - np.eye(d))


def unital_residual(kraus: np.ndarray) -> float:
    d = kraus.shape[-1]
    return fro(np.einsum("aij,akj->ik", kraus, kraus.conj()) - np.eye(d))


def validate(kraus: Sequence, tol: Tolerance = DEFAULT_TOL) -> ChannelReport:
    """Report trace-preservation and unitality residuals of a Kraus list."""
    k = _stack(kraus)
    tp = tp_residual(k)
    un = unital_residual(k)
    return ChannelReport(
        trace_preserving=tp <= tol.atol,
        tp_residual=tp,
        unital=un <= tol.atol,
        unital_residual=un,
        kraus_count=k.shape[0],
        dim=k.shape[1],
    )


class QuantumChannel:
    """A trace-preserving channel ``sigma -> sum_a E_a sigma E_a^dag`` on ``C^d``.

    Construction fails with :class:`TracePreservationError` when
    ``||sum_a E_a^dag E_a - I||_F > tol.atol``.
    """

    __slots__ = ("_kraus",)

    def __init__(self, kraus: Sequence, tol: Tolerance = DEFAULT_TOL):
        k = _stack(kraus)
        res = tp_residual(k)
        if res > tol.atol:
            raise TracePreservationError(res, tol.atol)
        k.setflags(write=False)
        self._kraus = k

    @property
    def kraus(self) -> np.ndarray:
        """Kraus operators stacked into shape ``(count, d, d)`` (read-only)."""
        return self._kraus

    @property
    def dim(self) -> int:
        return self._kraus.shape[1]

    def __len__(self) -> int:
        return self._kraus.shape[0]

    def __repr__(self) -> str:
        return f"QuantumChannel(dim={self.dim}, kraus_count={len(self)})"

    def __call__(self, sigma: ComplexMatrix) -> ComplexMatrix:
        return apply(self, sigma)

    def report(self, tol: Tolerance = DEFAULT_TOL) -> ChannelReport:
        return validate(self._kraus, tol)

    def is_unital(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        return unital_residual(self._kraus) <= tol.atol


def identity_channel(d: int) -> QuantumChannel:
    return QuantumChannel([np.eye(d)])


def unitary_channel(u: ComplexMatrix) -> QuantumChannel:
    return QuantumChannel([as_matrix(u)])


def apply(ch: QuantumChannel, sigma: ComplexMatrix) -> ComplexMatrix:
    sigma = as_matrix(sigma)
    if sigma.shape != (ch.dim, ch.dim):
        raise DimensionError(f"operator of shape {sigma.shape} on a dim-{ch.dim} channel")
    k = ch.kraus
    return np.einsum("aij,jk,alk->il", k, sigma, k.conj())


def apply_dual(ch: QuantumChannel, x: ComplexMatrix) -> ComplexMatrix:
    """Heisenberg-picture map ``X -> sum_a E_a^dag X E_a``.

    The dual is unital exactly when ``ch`` is trace preserving, and trace
    preserving exactly when ``ch`` is unital, so it is returned as a bare map
    rather than a :class:`QuantumChannel`.
    """
    x = as_matrix(x)
    if x.shape != (ch.dim, ch.dim):
        raise DimensionError(f"operator of shape {x.shape} on a dim-{ch.dim} channel")
    k = ch.kraus
    return np.einsum("aji,jk,akl->il", k.conj(), x, k)


def compose(outer: QuantumChannel, inner: QuantumChannel,
            tol: Tolerance = DEFAULT_TOL) -> QuantumChannel:
    """``outer o inner`` with Kraus set ``{R_b E_a}``."""
    if outer.dim != inner.dim:
        raise DimensionError(f"cannot compose dim {outer.dim} with dim {inner.dim}")
    prods = np.einsum("bij,ajk->baik", outer.kraus, inner.kraus)
    d = outer.dim
    # TP of the product is inherited; widen the check to the accumulated rounding.
    return QuantumChannel(prods.reshape(-1, d, d), Tolerance(2 * tol.atol, tol.rank_rtol))


def superoperator(ch: QuantumChannel) -> ComplexMatrix:
    """Matrix of the channel acting on row-major vectorized operators."""
    k = ch.kraus
    return np.einsum("aij,akl->ikjl", k, k.conj()).reshape(ch.dim**2, ch.dim**2)


def choi(ch: QuantumChannel) -> ComplexMatrix:
    """Unnormalized Choi matrix ``sum_ij |i><j| (x) E(|i><j|)`` (system first)."""
    d = ch.dim
    # |E_a>> = sum_i |i> (x) E_a|i>, i.e. E_a^T flattened row-major
    vecs = np.transpose(ch.kraus, (0, 2, 1)).reshape(len(ch), d * d)
    return vecs.T @ vecs.conj()


def kraus_from_choi(j: ComplexMatrix, dim: int, tol: Tolerance = DEFAULT_TOL) -> QuantumChannel:
    """Minimal Kraus set from a Choi matrix (scaled eigenvectors)."""
    j = as_matrix(j)
    if j.shape != (dim * dim, dim * dim):
        raise DimensionError(f"Choi matrix of shape {j.shape} does not match dim {dim}")
    w, v = eig_hermitian(j, tol)
    scale = max(1.0, fro(j))
    if w[0] < -tol.atol * scale:
        raise NotPSDError(f"Choi matrix has eigenvalue {w[0]:.3e} < 0")
    wmax = w[-1]
    if wmax <= 0:
        raise NotPSDError("Choi matrix is zero")
    keep = w > tol.rank_rtol * wmax
    kraus = [
        np.sqrt(lam) * vec.reshape(dim, dim).T
        for lam, vec in zip(w[keep][::-1], v[:, keep].T[::-1])
    ]
    return QuantumChannel(kraus, tol)


def channel_distance(a: QuantumChannel, b: QuantumChannel) -> float:
    """Frobenius distance between Choi matrices."""
    if a.dim != b.dim:
        raise DimensionError(f"channels act on dims {a.dim} and {b.dim}")
    return fro(choi(a) - choi(b))


def remix(ch: QuantumChannel, u: ComplexMatrix, tol: Tolerance = DEFAULT_TOL) -> QuantumChannel:
    """Kraus set ``F_a = sum_b u_ab E_b`` for a unitary ``u``; same channel."""
    u = as_matrix(u)
    if u.shape != (len(ch), len(ch)):
        raise DimensionError(f"remixing matrix must be {len(ch)}x{len(ch)}")
    return QuantumChannel(np.einsum("ab,bij->aij", u, ch.kraus), tol)


def equal(a: QuantumChannel, b: QuantumChannel, tol: Tolerance = DEFAULT_TOL) -> bool:
    return channel_distance(a, b) <= tol.atol
