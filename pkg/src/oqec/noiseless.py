"""Noiseless subsystems: fixed points, verification of a fixed splitting
``H = (H^A (x) H^B) (+) K`` against a channel, extraction of the noisy-factor
image ``tau^A``, and discovery for unital channels through the noise commutant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import Block, OperatorSpace, decompose_structure, generate_algebra
from .channel import QuantumChannel, apply, superoperator, unital_residual
from .errors import DimensionError, NotNoiselessError, NotUnitalError
from .matkit import (
    DEFAULT_TOL,
    ComplexMatrix,
    Tolerance,
    adjoint,
    as_matrix,
    complete_basis,
    fro,
    isometry_residual,
    null_space,
)

COLUMN_CONVENTION = "column (k-1)*n + (l-1) holds |alpha_k> (x) |beta_l>, k = 1..m, l = 1..n"


class SubsystemDecomposition:
    """A splitting ``H = (H^A (x) H^B) (+) K`` given by a ``d x (m n)`` isometry.

    Column ``k*n + l`` (0-based) is the image of ``|alpha_k> (x) |beta_l>``.
    The matrix units are ``P_kl = V (|k><l| (x) 1_n) V^dag`` and
    ``P_A = sum_k P_kk`` projects onto ``H^A (x) H^B``.
    """

    def __init__(self, isometry: ComplexMatrix, m: int, n: int, tol: Tolerance = DEFAULT_TOL):
        v = as_matrix(isometry)
        if m < 1 or n < 1:
            raise DimensionError(f"subsystem dimensions must be positive, got m={m}, n={n}")
        if v.shape[1] != m * n or v.shape[0] < m * n:
            raise DimensionError(f"isometry of shape {v.shape} cannot carry m={m}, n={n}")
        res = isometry_residual(v)
        if res > tol.atol:
            raise DimensionError(f"isometry columns are not orthonormal (residual {res:.3e})")
        v = v.copy()
        v.setflags(write=False)
        self.isometry = v
        self.m = m
        self.n = n
        self._units = None

    @classmethod
    def product(cls, m: int, n: int, extra: int = 0) -> "SubsystemDecomposition":
        """Computational-basis split ``C^m (x) C^n (+) C^extra``."""
        return cls(np.eye(m * n + extra)[:, : m * n], m, n)

    @classmethod
    def from_block(cls, block: Block, swap: bool = False) -> "SubsystemDecomposition":
        """Decomposition carried by one algebra block.

        With ``swap`` the algebra factor becomes ``H^B`` (used for UNS sectors,
        where the algebra itself is the protected part).
        """
        if not swap:
            return cls(block.isometry, block.m, block.n)
        d = block.isometry.shape[0]
        v = block.isometry.reshape(d, block.m, block.n).transpose(0, 2, 1).reshape(d, -1)
        return cls(v, block.n, block.m)

    @property
    def dim(self) -> int:
        return self.isometry.shape[0]

    def __repr__(self) -> str:
        return f"SubsystemDecomposition(dim={self.dim}, m={self.m}, n={self.n})"

    def frames(self) -> np.ndarray:
        """``V_k`` (the columns for fixed ``k``) stacked as ``(m, d, n)``."""
        return self.isometry.reshape(self.dim, self.m, self.n).transpose(1, 0, 2)

    def rebase(self, u: ComplexMatrix, tol: Tolerance = DEFAULT_TOL) -> "SubsystemDecomposition":
        """Same subspace with ``|alpha'_k> = sum_l u_kl |alpha_l>``."""
        u = as_matrix(u)
        if u.shape != (self.m, self.m):
            raise DimensionError(f"basis change must be {self.m}x{self.m}, got {u.shape}")
        vk = np.einsum("kl,lip->kip", u, self.frames())
        return SubsystemDecomposition(vk.transpose(1, 0, 2).reshape(self.dim, -1), self.m, self.n, tol)

    @property
    def matrix_units(self) -> np.ndarray:
        if self._units is None:
            vk = self.frames()
            self._units = np.einsum("kip,ljp->klij", vk, vk.conj())
        return self._units

    @property
    def projection(self) -> ComplexMatrix:
        return self.isometry @ adjoint(self.isometry)

    def complement_basis(self, tol: Tolerance = DEFAULT_TOL) -> ComplexMatrix:
        return complete_basis(self.isometry, tol)

    def embed(self, x: ComplexMatrix) -> ComplexMatrix:
        """``V x V^dag`` for ``x`` acting on ``C^m (x) C^n``."""
        return self.isometry @ as_matrix(x) @ adjoint(self.isometry)

    def embed_product(self, sigma_a: ComplexMatrix, sigma_b: ComplexMatrix) -> ComplexMatrix:
        return self.embed(np.kron(as_matrix(sigma_a), as_matrix(sigma_b)))

    def compress(self, y: ComplexMatrix) -> ComplexMatrix:
        """``V^dag y V``: block coordinates of the ``P_A``-compression."""
        return adjoint(self.isometry) @ as_matrix(y) @ self.isometry

    def trace_a(self, y: ComplexMatrix) -> ComplexMatrix:
        """``Tr_A(P_A y P_A)`` as an ``n x n`` matrix."""
        t = self.compress(y).reshape(self.m, self.n, self.m, self.n)
        return np.einsum("apaq->pq", t)

    def semigroup_basis(self):
        """Spanning set of the product operators ``|i><j| (x) |p><q|``.

        Yields ``(sigma_in_H, Tr_A(sigma))`` pairs.
        """
        m, n = self.m, self.n
        for i in range(m):
            for j in range(m):
                for p in range(n):
                    for q in range(n):
                        x = np.zeros((m * n, m * n), dtype=complex)
                        x[i * n + p, j * n + q] = 1.0
                        tb = np.zeros((n, n), dtype=complex)
                        if i == j:
                            tb[p, q] = 1.0
                        yield self.embed(x), tb


@dataclass
class NSReport:
    noiseless: bool
    lam: np.ndarray  # (kraus, m, m): P_kk E_a P_ll ~ lam[a, k, l] P_kl
    cond1_residual: float
    cond2_residual: float

    def as_dict(self) -> dict:
        return {
            "noiseless": self.noiseless,
            "cond1_residual": self.cond1_residual,
            "cond2_residual": self.cond2_residual,
            "lambda": _complex_tensor(self.lam),
        }


def _complex_tensor(t: np.ndarray):
    t = np.asarray(t)
    if t.ndim == 0:
        return [float(t.real), float(t.imag)]
    return [_complex_tensor(x) for x in t]


def _check_dims(ch: QuantumChannel, dec: SubsystemDecomposition) -> None:
    if ch.dim != dec.dim:
        raise DimensionError(f"channel acts on dim {ch.dim}, decomposition on dim {dec.dim}")


def fixed_points(ch: QuantumChannel, tol: Tolerance = DEFAULT_TOL) -> OperatorSpace:
    """Orthonormal basis of ``{sigma : E(sigma) = sigma}``."""
    d = ch.dim
    s = superoperator(ch) - np.eye(d * d)
    ker = null_space(s, tol, scale=1.0)
    return OperatorSpace(d, ker.T.reshape(-1, d, d), tol)


def ns_lambda(kraus: np.ndarray, dec: SubsystemDecomposition):
    """``lambda_akl`` and the residual of ``P_kk E_a P_ll = lambda_akl P_kl``.

    Works in block coordinates: ``V_k^dag E_a V_l`` must equal
    ``lambda_akl 1_n``; its Frobenius distance from that equals the
    distance in the full space because ``V_k`` are isometries.
    """
    vk = dec.frames()
    blocks = np.einsum("kip,aij,ljq->aklpq", vk.conj(), kraus, vk)
    lam = np.einsum("aklpp->akl", blocks) / dec.n
    eye = np.eye(dec.n)
    dev = blocks - lam[..., None, None] * eye
    res = float(np.max(np.linalg.norm(dev, axis=(-2, -1)))) if dev.size else 0.0
    return lam, res


def invariance_residual(kraus: np.ndarray, v: np.ndarray) -> float:
    """``max_a ||E_a P - P E_a P||_F`` for ``P = v v^dag``."""
    ev = np.einsum("aij,jk->aik", kraus, v)
    leak = ev - np.einsum("ij,ajk->aik", v @ adjoint(v), ev)
    return float(np.max(np.linalg.norm(leak, axis=(-2, -1))))


def verify_ns(ch: QuantumChannel, dec: SubsystemDecomposition,
              tol: Tolerance = DEFAULT_TOL) -> NSReport:
    """Operator-level test: ``P_kk E_a P_ll = lambda_akl P_kl`` and
    ``E_a P_A = P_A E_a P_A`` for every Kraus operator."""
    _check_dims(ch, dec)
    lam, r1 = ns_lambda(ch.kraus, dec)
    r2 = invariance_residual(ch.kraus, dec.isometry)
    return NSReport(r1 <= tol.atol and r2 <= tol.atol, lam, r1, r2)


def _probe_images(ch: QuantumChannel, dec: SubsystemDecomposition, sigma_a: ComplexMatrix):
    """For each probe ``|p><q|`` on H^B: (support leak, block coords of E(sigma_a (x) |p><q|))."""
    m, n = dec.m, dec.n
    p_a = dec.projection
    out = {}
    for p in range(n):
        for q in range(n):
            sb = np.zeros((n, n), dtype=complex)
            sb[p, q] = 1.0
            rho = apply(ch, dec.embed_product(sigma_a, sb))
            leak = fro(rho - p_a @ rho @ p_a)
            out[p, q] = (leak, dec.compress(rho).reshape(m, n, m, n))
    return out


def _semantic(ch, dec, sigma_a, tol):
    """Largest deviation from ``E(sigma_a (x) s) = tau (x) s`` over the probe
    basis, with ``tau`` read off the ``|beta_1><beta_1|`` probe."""
    m, n = dec.m, dec.n
    imgs = _probe_images(ch, dec, sigma_a)
    tau = imgs[0, 0][1][:, 0, :, 0]
    worst = 0.0
    for (p, q), (leak, t) in imgs.items():
        sb = np.zeros((n, n), dtype=complex)
        sb[p, q] = 1.0
        # tau for this probe, then its distance to the reference tau
        tau_pq = t[:, p, :, q]
        factor = fro(t.reshape(m * n, m * n) - np.kron(tau_pq, sb))
        worst = max(worst, leak, factor, fro(tau_pq - tau))
    return worst, tau


def verify_ns_semantic(ch: QuantumChannel, dec: SubsystemDecomposition,
                       tol: Tolerance = DEFAULT_TOL) -> bool:
    """State-level test: ``E(1^A (x) s^B) = tau^A (x) s^B`` with one ``tau^A``
    for every ``s^B``, and the image supported on ``H^A (x) H^B``."""
    _check_dims(ch, dec)
    worst, _ = _semantic(ch, dec, np.eye(dec.m), tol)
    return worst <= tol.atol


def extract_tau(ch: QuantumChannel, dec: SubsystemDecomposition, sigma_a: ComplexMatrix,
                sigma_b: ComplexMatrix | None = None, tol: Tolerance = DEFAULT_TOL) -> ComplexMatrix:
    """The ``tau^A`` with ``E(sigma^A (x) sigma^B) = tau^A (x) sigma^B``.

    ``tau^A`` is read from the unit-trace probe ``|beta_1><beta_1|`` and then
    cross-checked against every basis probe ``|beta_p><beta_q|`` (and
    ``sigma_b`` when supplied).  Scaling follows the input: for
    ``sigma^A = 1^A`` the result has trace ``m``.

    Raises
    ------
    NotNoiselessError
        If the decomposition fails :func:`verify_ns` or the cross-check.
    """
    _check_dims(ch, dec)
    sigma_a = as_matrix(sigma_a)
    if sigma_a.shape != (dec.m, dec.m):
        raise DimensionError(f"sigma_A must be {dec.m}x{dec.m}, got {sigma_a.shape}")
    rep = verify_ns(ch, dec, tol)
    if not rep.noiseless:
        raise NotNoiselessError(
            f"decomposition is not noiseless (cond1 {rep.cond1_residual:.3e}, "
            f"cond2 {rep.cond2_residual:.3e})"
        )
    scale = max(1.0, fro(sigma_a))
    worst, tau = _semantic(ch, dec, sigma_a, tol)
    if worst > tol.atol * scale:
        raise NotNoiselessError(f"tau^A depends on the probe (deviation {worst:.3e})")
    if sigma_b is not None:
        sigma_b = as_matrix(sigma_b)
        rho = apply(ch, dec.embed_product(sigma_a, sigma_b))
        dev = fro(rho - dec.embed_product(tau, sigma_b))
        if dev > tol.atol * scale * max(1.0, fro(sigma_b)):
            raise NotNoiselessError(f"E(sigma_A (x) sigma_B) != tau (x) sigma_B ({dev:.3e})")
    return tau


def interaction_algebra(ch: QuantumChannel, tol: Tolerance = DEFAULT_TOL) -> OperatorSpace:
    return generate_algebra(list(ch.kraus), tol)


@dataclass
class NSDiscovery:
    subsystems: list[SubsystemDecomposition]
    classical_sectors: list[SubsystemDecomposition]  # blocks with n_J = 1


def discover_ns_unital(ch: QuantumChannel, tol: Tolerance = DEFAULT_TOL, seed: int = 0) -> NSDiscovery:
    """Blocks of the interaction algebra, split into quantum (n >= 2) and
    classical (n = 1) sectors."""
    res = unital_residual(ch.kraus)
    if res > tol.atol:
        raise NotUnitalError(
            res,
            "discovery through the noise commutant needs a unital channel; "
            "check candidate decompositions with verify_ns or look for "
            "unitarily noiseless subsystems instead",
        )
    bs = decompose_structure(interaction_algebra(ch, tol), tol, seed)
    quantum, classical = [], []
    for b in bs.blocks:
        dec = SubsystemDecomposition.from_block(b)
        (quantum if b.n >= 2 else classical).append(dec)
    return NSDiscovery(quantum, classical)


def find_ns_unital(ch: QuantumChannel, tol: Tolerance = DEFAULT_TOL,
                   seed: int = 0) -> list[SubsystemDecomposition]:
    """Noiseless subsystems of a unital channel, one per interaction-algebra
    block with multiplicity ``n_J >= 2``."""
    return discover_ns_unital(ch, tol, seed).subsystems
