"""Unitarily noiseless subsystems: operators whose evolution under the
channel is conjugation by a fixed unitary ``U`` and which are therefore
corrected by ``U^dag (.) U``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import BlockStructure, OperatorSpace, commutant_of, decompose_structure
from .channel import QuantumChannel, apply, unital_residual, unitary_channel
from .errors import DimensionError, NotUnitalError, NotUnitaryError
from .matkit import DEFAULT_TOL, ComplexMatrix, Tolerance, adjoint, as_matrix, fro, unitarity_residual
from .noiseless import SubsystemDecomposition


@dataclass
class UNSReport:
    algebra: OperatorSpace
    structure: BlockStructure
    evolve_residual: float

    def sectors(self) -> list[SubsystemDecomposition]:
        """One decomposition per block, protected factor as ``H^B``."""
        return [SubsystemDecomposition.from_block(b, swap=True) for b in self.structure.blocks]


def _check_unitary(u: ComplexMatrix, d: int, tol: Tolerance) -> ComplexMatrix:
    u = as_matrix(u)
    if u.shape != (d, d):
        raise DimensionError(f"unitary of shape {u.shape} on a dim-{d} channel")
    res = unitarity_residual(u)
    if res > tol.atol:
        raise NotUnitaryError(f"U is not unitary (||U^dag U - I||_F = {res:.3e})")
    return u


def uns_algebra(ch: QuantumChannel, u: ComplexMatrix, tol: Tolerance = DEFAULT_TOL,
                seed: int = 0) -> UNSReport:
    """Commutant of ``{U^dag E_a, E_a^dag U}`` for a unital channel.

    For a unital channel this is exactly the set of ``sigma`` with
    ``E(sigma) = U sigma U^dag``; ``evolve_residual`` checks that on the basis.
    """
    u = _check_unitary(u, ch.dim, tol)
    res = unital_residual(ch.kraus)
    if res > tol.atol:
        raise NotUnitalError(res, "the commutant characterization of UNS needs a unital channel")
    rotated = [adjoint(u) @ e for e in ch.kraus]
    alg = commutant_of(rotated, ch.dim, tol)
    worst = 0.0
    for s in alg.basis:
        worst = max(worst, fro(apply(ch, s) - u @ s @ adjoint(u)))
    return UNSReport(alg, decompose_structure(alg, tol, seed), worst)


def uns_deviation(ch: QuantumChannel, dec: SubsystemDecomposition, u: ComplexMatrix,
                  tol: Tolerance = DEFAULT_TOL) -> float:
    """``max ||Tr_A P_A U^dag E(s) U P_A - Tr_A(s)||_F`` over the product basis."""
    if ch.dim != dec.dim:
        raise DimensionError(f"channel acts on dim {ch.dim}, decomposition on dim {dec.dim}")
    u = _check_unitary(u, ch.dim, tol)
    worst = 0.0
    for s, tr_a in dec.semigroup_basis():
        out = adjoint(u) @ apply(ch, s) @ u
        worst = max(worst, fro(dec.trace_a(out) - tr_a))
    return worst


def verify_uns(ch: QuantumChannel, dec: SubsystemDecomposition, u: ComplexMatrix,
               tol: Tolerance = DEFAULT_TOL) -> bool:
    """Whether the ``H^B`` sector evolves as ``U (tau^A (x) sigma^B) U^dag``.

    No unitality needed.
    """
    return uns_deviation(ch, dec, u, tol) <= tol.atol


def inverse_conjugation(u: ComplexMatrix) -> QuantumChannel:
    """The recovery ``U^dag (.) U``."""
    return unitary_channel(adjoint(as_matrix(u)))


def candidate_unitaries(d: int) -> dict[str, np.ndarray]:
    """Small exploration set: identity, single-entry sign flips and cyclic shift."""
    out = {"identity": np.eye(d, dtype=complex)}
    for i in range(d):
        s = np.ones(d, dtype=complex)
        s[i] = -1
        out[f"flip{i}"] = np.diag(s)
    out["shift"] = np.roll(np.eye(d, dtype=complex), 1, axis=0)
    return out
