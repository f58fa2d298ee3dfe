"""Correctability tests and recovery synthesis.

Covers the subspace (Knill-Laflamme) condition, the operator condition
``P_kk E_a^dag E_b P_ll = lambda_abkl P_kl`` for a subsystem split, explicit
recovery channels for both, and the projection of a subsystem recovery onto
a standard code ``P_kk``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import QuantumChannel, apply, compose
from .errors import DimensionError, NotCorrectableError, NotProjectorError, SynthesisError
from .matkit import (
    DEFAULT_TOL,
    ComplexMatrix,
    Tolerance,
    adjoint,
    as_matrix,
    eig_hermitian,
    fro,
    polar_isometry,
    projector_range,
    projector_residual,
)
from .noiseless import SubsystemDecomposition, verify_ns


@dataclass
class KLReport:
    satisfied: bool
    lam: np.ndarray  # (a, b): P E_a^dag E_b P ~ lam[a, b] P
    residual: float
    lambda_psd_mineig: float

    def as_dict(self) -> dict:
        from .noiseless import _complex_tensor
        return {
            "satisfied": self.satisfied,
            "residual": self.residual,
            "lambda_psd_mineig": self.lambda_psd_mineig,
            "lambda": _complex_tensor(self.lam),
        }


@dataclass
class OQECReport:
    correctable: bool
    lam: np.ndarray  # (a, b, k, l)
    residual: float
    lambda_psd_mineig: float  # of lam as a matrix on (a, k) x (b, l)

    def as_dict(self) -> dict:
        from .noiseless import _complex_tensor
        return {
            "correctable": self.correctable,
            "residual": self.residual,
            "lambda_psd_mineig": self.lambda_psd_mineig,
            "lambda": _complex_tensor(self.lam),
        }


@dataclass
class RecoveryChannel:
    channel: QuantumChannel
    provenance: str

    @property
    def kraus(self) -> np.ndarray:
        return self.channel.kraus


def _check_projector(p: ComplexMatrix, d: int, tol: Tolerance) -> ComplexMatrix:
    p = as_matrix(p)
    if p.shape != (d, d):
        raise DimensionError(f"projector of shape {p.shape} on a dim-{d} channel")
    res = projector_residual(p)
    if res > tol.atol * max(1.0, fro(p)):
        raise NotProjectorError(f"P is not an orthogonal projector (residual {res:.3e})")
    return p


def _kl_from_frame(kraus: np.ndarray, c: np.ndarray):
    """lambda_ab and residual for the code spanned by orthonormal columns ``c``."""
    ec = np.einsum("aij,jp->aip", kraus, c)
    g = np.einsum("aip,biq->abpq", ec.conj(), ec)  # C^dag E_a^dag E_b C
    k = c.shape[1]
    lam = np.einsum("abpp->ab", g) / k
    dev = g - lam[..., None, None] * np.eye(k)
    res = float(np.max(np.linalg.norm(dev, axis=(-2, -1))))
    return lam, res


def kl_check(ch: QuantumChannel, p: ComplexMatrix, tol: Tolerance = DEFAULT_TOL) -> KLReport:
    """Test ``P E_a^dag E_b P = lambda_ab P`` for every pair of Kraus operators.

    ``lambda_ab = Tr(P E_a^dag E_b P) / Tr P``.  The residual is the largest
    Frobenius deviation; it is measured on the code frame, which gives the
    same number as in the full space.
    """
    p = _check_projector(p, ch.dim, tol)
    c = projector_range(p, tol)
    if c.shape[1] == 0:
        raise NotProjectorError("code projector is zero")
    lam, res = _kl_from_frame(ch.kraus, c)
    mineig = float(np.linalg.eigvalsh(0.5 * (lam + adjoint(lam)))[0])
    return KLReport(res <= tol.atol, lam, res, mineig)


def standard_triple_deviation(r: QuantumChannel, e: QuantumChannel, p: ComplexMatrix,
                              tol: Tolerance = DEFAULT_TOL) -> float:
    """``max ||(R o E)(s) - s||_F`` over the basis ``|c_i><c_j|`` of ``P B(H) P``."""
    p = _check_projector(p, e.dim, tol)
    c = projector_range(p, tol)
    re = compose(r, e, tol)
    worst = 0.0
    for i in range(c.shape[1]):
        for j in range(c.shape[1]):
            s = np.outer(c[:, i], c[:, j].conj())
            worst = max(worst, fro(apply(re, s) - s))
    return worst


def verify_standard_triple(r: QuantumChannel, e: QuantumChannel, p: ComplexMatrix,
                           tol: Tolerance = DEFAULT_TOL) -> bool:
    return standard_triple_deviation(r, e, p, tol) <= tol.atol


def oqec_lambda(kraus: np.ndarray, dec: SubsystemDecomposition):
    """``lambda_abkl`` and the residual of the operator condition.

    In block coordinates ``V_k^dag E_a^dag E_b V_l`` must equal
    ``lambda_abkl 1_n``.
    """
    vk = dec.frames()
    ev = np.einsum("aij,kjp->akip", kraus, vk)  # E_a V_k
    g = np.einsum("akip,bliq->abklpq", ev.conj(), ev)
    lam = np.einsum("abklpp->abkl", g) / dec.n
    dev = g - lam[..., None, None] * np.eye(dec.n)
    res = float(np.max(np.linalg.norm(dev, axis=(-2, -1))))
    return lam, res


def oqec_check(ch: QuantumChannel, dec: SubsystemDecomposition,
               tol: Tolerance = DEFAULT_TOL) -> OQECReport:
    """Test ``P_kk E_a^dag E_b P_ll = lambda_abkl P_kl`` for all a, b, k, l."""
    if ch.dim != dec.dim:
        raise DimensionError(f"channel acts on dim {ch.dim}, decomposition on dim {dec.dim}")
    lam, res = oqec_lambda(ch.kraus, dec)
    count, m = lam.shape[0], lam.shape[2]
    gram = lam.transpose(0, 2, 1, 3).reshape(count * m, count * m)
    mineig = float(np.linalg.eigvalsh((gram + adjoint(gram)) / 2)[0])
    return OQECReport(res <= tol.atol, lam, res, mineig)


def _sorted_error_frames(ops: np.ndarray, lam: np.ndarray, tol: Tolerance):
    """Diagonalize ``lam = W D W^dag`` and return the remixed operators
    ``F_c = sum_a W_ac ops_a`` whose weight exceeds the cutoff."""
    w, vec = eig_hermitian(lam, Tolerance(max(tol.atol, 1e-12) * 10, tol.rank_rtol))
    top = float(np.max(w)) if w.size else 0.0
    if top <= 0:
        raise SynthesisError("error operators annihilate the code")
    keep = w > tol.rank_rtol * top
    f = np.einsum("ac,aij->cij", vec[:, keep], ops)
    return f, w[keep]


def _recovery_from_frames(f: np.ndarray, rank: int, tol: Tolerance) -> list[np.ndarray]:
    """Kraus list ``{V_c^dag}`` with ``V_c`` the polar isometry of ``F_c``.

    ``V_c`` maps the code (or ``H^B``) onto the syndrome subspace ``F_c C``.
    """
    iso = []
    for fc in f:
        v = polar_isometry(fc, tol)
        if abs(fro(v) ** 2 - rank) > 0.5:
            raise SynthesisError(
                f"degenerate polar step in recovery synthesis (rank {fro(v) ** 2:.0f}, expected {rank})"
            )
        iso.append(v)
    total = sum(v @ adjoint(v) for v in iso)
    overlap = fro(total @ total - total)
    if overlap > 1e3 * tol.atol:
        raise SynthesisError(f"syndrome subspaces are not orthogonal ({overlap:.3e})")
    return iso


def synthesize_standard_recovery(ch: QuantumChannel, p: ComplexMatrix,
                                 tol: Tolerance = DEFAULT_TOL) -> RecoveryChannel:
    """Recovery for a code satisfying the Knill-Laflamme condition.

    The Kraus operators are remixed along the eigenvectors of ``lambda`` so
    that the code images ``F_c C`` are mutually orthogonal; each is measured
    and rotated back by the adjoint of its polar isometry.  The orthogonal
    complement of all syndrome spaces is sent through one extra projector
    Kraus operator.
    """
    rep = kl_check(ch, p, tol)
    if not rep.satisfied:
        raise NotCorrectableError(rep.residual, "code")
    p = as_matrix(p)
    d = ch.dim
    f, _ = _sorted_error_frames(ch.kraus, rep.lam, tol)
    iso = _recovery_from_frames(f @ p, int(round(np.trace(p).real)), tol)
    kraus = [adjoint(v) for v in iso]
    rest = np.eye(d) - sum(v @ adjoint(v) for v in iso)
    if fro(rest) > tol.atol:
        kraus.append(rest)
    try:
        r = QuantumChannel(kraus, Tolerance(1e3 * tol.atol, tol.rank_rtol))
    except Exception as exc:  # noqa: BLE001
        raise SynthesisError(f"synthesized recovery is not a channel: {exc}") from exc
    return RecoveryChannel(r, "standard: remixed errors + polar isometries")


def synthesize_oqec_recovery(ch: QuantumChannel, dec: SubsystemDecomposition,
                             tol: Tolerance = DEFAULT_TOL) -> RecoveryChannel:
    """Recovery for a correctable subsystem split.

    The channel restricted to each slice ``|alpha_k> (x) H^B`` gives
    operators ``E_{a,k} = E_a V_k`` (``d x n``); together, weighted by
    ``1/sqrt(m)``, they satisfy the subspace condition on ``H^B``, so the
    standard construction produces ``R: B(H) -> B(H^B)``.  That is followed by
    re-embedding ``rho -> (1/m) 1^A (x) rho``, giving Kraus operators
    ``(1/sqrt m) V_k V_c^dag``, plus the complement projector.
    """
    rep = oqec_check(ch, dec, tol)
    if not rep.correctable:
        raise NotCorrectableError(rep.residual)
    d, m, n = dec.dim, dec.m, dec.n
    vk = dec.frames()  # (m, d, n)
    eak = np.einsum("aij,kjp->akip", ch.kraus, vk).reshape(-1, d, n) / np.sqrt(m)
    # lambda of E_B indexed by (a,k),(b,l): (1/m) lambda_abkl
    na = len(ch)
    lam_b = rep.lam.transpose(0, 2, 1, 3).reshape(na * m, na * m) / m
    f, _ = _sorted_error_frames(eak, lam_b, tol)
    iso = _recovery_from_frames(f, n, tol)  # each d x n
    kraus = [vk[k] @ adjoint(v) / np.sqrt(m) for v in iso for k in range(m)]
    rest = np.eye(d) - sum(v @ adjoint(v) for v in iso)
    if fro(rest) > tol.atol:
        kraus.append(rest)
    try:
        r = QuantumChannel(kraus, Tolerance(1e3 * tol.atol, tol.rank_rtol))
    except Exception as exc:  # noqa: BLE001
        raise SynthesisError(f"synthesized recovery is not a channel: {exc}") from exc
    return RecoveryChannel(r, f"oqec: standard recovery of E_B on H^B, re-embedded (m={m}, n={n})")


def correctable_triple_deviation(r: QuantumChannel, e: QuantumChannel,
                                 dec: SubsystemDecomposition, tol: Tolerance = DEFAULT_TOL) -> float:
    """``max ||Tr_A P_A (R o E)(s) P_A - Tr_A(s)||_F`` over a spanning set of
    the product operators ``s = sigma^A (x) sigma^B``."""
    if e.dim != dec.dim or r.dim != dec.dim:
        raise DimensionError("channel and decomposition dimensions differ")
    re = compose(r, e, tol)
    worst = 0.0
    for s, tr_a in dec.semigroup_basis():
        worst = max(worst, fro(dec.trace_a(apply(re, s)) - tr_a))
    return worst


def verify_correctable_triple(r: QuantumChannel, e: QuantumChannel, dec: SubsystemDecomposition,
                              tol: Tolerance = DEFAULT_TOL) -> bool:
    return correctable_triple_deviation(r, e, dec, tol) <= tol.atol


def a0_deviation(r: QuantumChannel, e: QuantumChannel, dec: SubsystemDecomposition,
                 tol: Tolerance = DEFAULT_TOL) -> float:
    """``max ||(R o E)(s) - s||_F`` over the basis ``1^A (x) |p><q|`` of the
    algebra ``1^A (x) B(H^B)``."""
    re = compose(r, e, tol)
    worst = 0.0
    n = dec.n
    for p in range(n):
        for q in range(n):
            sb = np.zeros((n, n), dtype=complex)
            sb[p, q] = 1.0
            s = dec.embed_product(np.eye(dec.m), sb)
            worst = max(worst, fro(apply(re, s) - s))
    return worst


@dataclass
class StandardReduction:
    recovery: QuantumChannel
    code_projector: ComplexMatrix
    factor: float  # sum_{c,l} |mu_c l k|^2, equal to 1 for a correctable triple


def reduce_to_standard(r: QuantumChannel, e: QuantumChannel, dec: SubsystemDecomposition,
                       k: int, tol: Tolerance = DEFAULT_TOL) -> StandardReduction:
    """Turn a correctable subsystem triple into a standard code triple.

    ``k`` is 1-based.  The recovery is ``P_k o R`` with
    ``P_k(.) = sum_l P_kl (.) P_kl^dag`` and the code is ``P_kk``.
    ``P_k`` alone is trace non-increasing, so the Kraus set
    ``{P_kl R_b}`` is completed with ``{P_A^perp R_b}``; the completion
    vanishes on ``E(P_kk B(H) P_kk)``.
    """
    if not 1 <= k <= dec.m:
        raise ValueError(f"k must lie in 1..{dec.m}, got {k}")
    if not verify_correctable_triple(r, e, dec, tol):
        raise NotCorrectableError(correctable_triple_deviation(r, e, dec, tol), "triple")
    units = dec.matrix_units
    perp = np.eye(dec.dim) - dec.projection
    kraus = [units[k - 1, l] @ rb for l in range(dec.m) for rb in r.kraus]
    kraus += [perp @ rb for rb in r.kraus]
    rk = QuantumChannel(kraus, Tolerance(10 * tol.atol, tol.rank_rtol))
    lam = verify_ns(compose(r, e, tol), dec, tol).lam  # (c, k', l')
    factor = float(np.sum(np.abs(lam[:, :, k - 1]) ** 2))
    return StandardReduction(rk, units[k - 1, k - 1].copy(), factor)


def proportionality_factor(r: QuantumChannel, e: QuantumChannel, p: ComplexMatrix,
                           tol: Tolerance = DEFAULT_TOL) -> float:
    """Least-squares ``c`` in ``(R o E)(s) ~ c s`` over the code basis."""
    c = projector_range(_check_projector(p, e.dim, tol), tol)
    re = compose(r, e, tol)
    num, den = 0.0 + 0.0j, 0.0
    for i in range(c.shape[1]):
        for j in range(c.shape[1]):
            s = np.outer(c[:, i], c[:, j].conj())
            out = apply(re, s)
            num += np.vdot(s, out)
            den += np.vdot(s, s).real
    return float((num / den).real)
