"""Constructors for the classic worked examples.

* :func:`example1` - ``E_i = F_i (x) 1_2`` with a noiseless right qubit.
* :func:`example2` - a non-unital two-qubit channel with two noiseless
  subsystems, one outside the noise commutant.
* :func:`example_oqec` - a two-qubit channel built from partial isometries,
  correctable as a subsystem but not as a noiseless one.
* :func:`example_uns` - two-qubit dephasing with a sign-flip unitary that
  exposes a correctable qubit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import unitary_group

from .channel import QuantumChannel
from .correction import RecoveryChannel
from .matkit import ComplexMatrix, outer
from .noiseless import SubsystemDecomposition

Z = np.diag([1.0, -1.0]).astype(complex)
I2 = np.eye(2, dtype=complex)


def basis4(label: str) -> np.ndarray:
    """Computational basis ket of two qubits, e.g. ``basis4('01')``."""
    e = np.zeros(4, dtype=complex)
    e[int(label, 2)] = 1.0
    return e


@dataclass
class WorkedExample:
    name: str
    parameters: dict[str, float]
    channel: QuantumChannel
    decompositions: dict[str, SubsystemDecomposition] = field(default_factory=dict)
    recoveries: dict[str, RecoveryChannel] = field(default_factory=dict)
    unitaries: dict[str, ComplexMatrix] = field(default_factory=dict)
    extras: dict[str, object] = field(default_factory=dict)


def example1(gamma: float) -> WorkedExample:
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    g, h = np.sqrt(gamma), np.sqrt(1.0 - gamma)
    f0 = np.array([[g, 0], [0, h]], dtype=complex)
    f1 = np.array([[0, g], [h, 0]], dtype=complex)
    ch = QuantumChannel([np.kron(f0, I2), np.kron(f1, I2)])
    return WorkedExample(
        "example1", {"gamma": gamma}, ch,
        decompositions={"AB": SubsystemDecomposition.product(2, 2)},
        extras={"F": (f0, f1)},
    )


def example2(q: float) -> WorkedExample:
    """Kraus operators

    E0 = alpha (|00><00| + |11><11|) + |01><01| + |10><10|
    E1 = beta  (|00><00| + |10><00| + |01><11| + |11><11|)

    with alpha = sqrt(1 - 2q), beta = sqrt(q).  ``B1`` is the subspace
    span{|01>, |10>} (m = 1); ``B2`` pairs the Bell-like vectors into
    ``H^A (x) H^B`` with m = n = 2.
    """
    if not 0.0 < q < 0.5:
        raise ValueError(f"q must lie in (0, 1/2), got {q}")
    alpha, beta = np.sqrt(1 - 2 * q), np.sqrt(q)
    k = basis4
    e0 = (alpha * (outer(k("00"), k("00")) + outer(k("11"), k("11")))
          + outer(k("01"), k("01")) + outer(k("10"), k("10")))
    e1 = beta * (outer(k("00"), k("00")) + outer(k("10"), k("00"))
                 + outer(k("01"), k("11")) + outer(k("11"), k("11")))
    ch = QuantumChannel([e0, e1])
    b1 = SubsystemDecomposition(np.column_stack([k("01"), k("10")]), 1, 2)
    s = 1 / np.sqrt(2)
    b2_cols = [
        s * (k("00") + k("11")),  # alpha_1 beta_1
        s * (k("00") - k("11")),  # alpha_1 beta_2
        s * (k("10") + k("01")),  # alpha_2 beta_1
        s * (k("10") - k("01")),  # alpha_2 beta_2
    ]
    b2 = SubsystemDecomposition(np.column_stack(b2_cols), 2, 2)
    return WorkedExample(
        "example2", {"q": q}, ch,
        decompositions={"B1": b1, "B2": b2},
        extras={"alpha": alpha, "beta": beta},
    )


def example_oqec(second_basis: ComplexMatrix | None = None, seed: int = 7) -> WorkedExample:
    """Partial-isometry channel on C^4.

    The first basis {|a>, |b>, |a'>, |b'>} is the computational one; the
    second {|a1>, |b1>, |a2>, |b2>} defaults to a seeded Haar-random unitary's
    columns.  ``U_1 = |a1><a| + |b1><b|``, ``U_1' = |a1><a'| + |b1><b'|`` and
    likewise for index 2; ``E_1 = (U_1 + U_1')/sqrt2``,
    ``E_2 = (U_2 - U_2')/sqrt2``.  The known recovery is
    ``{V_jk^dag Q_j / sqrt2}``.
    """
    if second_basis is None:
        second_basis = unitary_group.rvs(4, random_state=np.random.default_rng(seed))
    w = np.asarray(second_basis, dtype=complex)
    a, b, a_, b_ = np.eye(4, dtype=complex)
    a1, b1, a2, b2 = w.T
    u1 = outer(a1, a) + outer(b1, b)
    u1p = outer(a1, a_) + outer(b1, b_)
    u2 = outer(a2, a) + outer(b2, b)
    u2p = outer(a2, a_) + outer(b2, b_)
    s = 1 / np.sqrt(2)
    e1 = s * (u1 + u1p)
    e2 = s * (u2 - u2p)
    ch = QuantumChannel([e1, e2])
    dec = SubsystemDecomposition(np.eye(4), 2, 2)
    q1 = outer(a1, a1) + outer(b1, b1)
    q2 = outer(a2, a2) + outer(b2, b2)
    v = {(1, 1): u1, (1, 2): u1p, (2, 1): u2, (2, 2): u2p}
    q = {1: q1, 2: q2}
    r = QuantumChannel([s * v[j, k].conj().T @ q[j] for j in (1, 2) for k in (1, 2)])
    return WorkedExample(
        "oqec", {"seed": seed}, ch,
        decompositions={"A": dec},
        recoveries={"reference": RecoveryChannel(r, "reference: {V_jk^dag Q_j / sqrt2}")},
        extras={"P1": outer(a, a) + outer(b, b), "P2": outer(a_, a_) + outer(b_, b_),
                "Q1": q1, "Q2": q2, "second_basis": w},
    )


def sign_flip_unitary() -> np.ndarray:
    """``U|ij> = |ij>`` except ``U|11> = -|11>``."""
    return np.diag([1, 1, 1, -1]).astype(complex)


def example_uns() -> WorkedExample:
    """Dephasing ``{Z_1, Z_2}`` scaled by 1/sqrt2 to be trace preserving."""
    z1, z2 = np.kron(Z, I2), np.kron(I2, Z)
    ch = QuantumChannel([z1 / np.sqrt(2), z2 / np.sqrt(2)])
    k = basis4
    sector = SubsystemDecomposition(np.column_stack([k("00"), k("11")]), 1, 2)
    return WorkedExample(
        "uns", {}, ch,
        decompositions={"M2": sector},
        unitaries={"U": sign_flip_unitary()},
        extras={"Z1": z1, "Z2": z2},
    )


def build(name: str, **params) -> WorkedExample:
    """Dispatch by name: ``example1``, ``example2``, ``oqec`` or ``uns``."""
    if name == "example1":
        return example1(float(params.get("gamma", 0.3)))
    if name == "example2":
        return example2(float(params.get("q", 0.25)))
    if name == "oqec":
        return example_oqec(seed=int(params.get("seed", 7)))
    if name == "uns":
        return example_uns()
    raise KeyError(f"unknown example {name!r}; choose example1, example2, oqec or uns")


NAMES = ("example1", "example2", "oqec", "uns")
