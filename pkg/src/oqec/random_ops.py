"""Seeded random instances: unitaries, channels, decompositions and
correctable channel/decomposition pairs for property tests."""

from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .channel import QuantumChannel
from .matkit import adjoint, complete_basis
from .noiseless import SubsystemDecomposition


def _rng(rng) -> np.random.Generator:
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


def random_unitary(d: int, rng=None) -> np.ndarray:
    """Haar-random ``d x d`` unitary."""
    if d == 1:
        return np.exp(2j * np.pi * _rng(rng).random()) * np.ones((1, 1))
    return unitary_group.rvs(d, random_state=_rng(rng))


def random_isometry(rows: int, cols: int, rng=None) -> np.ndarray:
    return random_unitary(rows, rng)[:, :cols]


def random_channel(d: int, kraus_count: int, rng=None) -> QuantumChannel:
    """Kraus operators cut from a Haar isometry ``C^d -> C^(k d)``."""
    v = random_isometry(kraus_count * d, d, rng)
    return QuantumChannel(v.reshape(kraus_count, d, d))


def random_unital_channel(d: int, kraus_count: int, rng=None) -> QuantumChannel:
    """Random mixture of Haar unitaries."""
    rng = _rng(rng)
    p = rng.dirichlet(np.ones(kraus_count))
    return QuantumChannel([np.sqrt(pi) * random_unitary(d, rng) for pi in p])


def random_density(d: int, rng=None) -> np.ndarray:
    rng = _rng(rng)
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = g @ adjoint(g)
    return rho / np.trace(rho).real


def random_decomposition(d: int, m: int, n: int, rng=None) -> SubsystemDecomposition:
    return SubsystemDecomposition(random_isometry(d, m * n, rng), m, n)


def correctable_instance(m: int, n: int, extra: int, kraus_count: int,
                         rng=None) -> tuple[QuantumChannel, SubsystemDecomposition]:
    """Random channel with a correctable ``m x n`` subsystem.

    On the code ``E_a V = W (G_a (x) 1_n)`` where the stacked ``G_a`` form an
    isometry, so ``V^dag E_a^dag E_b V = (G_a^dag G_b) (x) 1_n``.  On the
    complement the stacked images are a random isometry orthogonal to the
    code images, which keeps the channel trace preserving.  The code itself
    is a random isometry into ``C^(m n + extra)``.
    """
    rng = _rng(rng)
    d = m * n + extra
    dec = random_decomposition(d, m, n, rng)
    g = random_isometry(kraus_count * m, m, rng).reshape(kraus_count, m, m)
    w = random_isometry(d, m * n, rng)
    x = np.stack([w @ np.kron(ga, np.eye(n)) for ga in g])  # (a, d, mn)
    return complete_channel(x, dec, extra, rng), dec


def complete_channel(x: np.ndarray, dec: SubsystemDecomposition, extra: int,
                      rng: np.random.Generator) -> QuantumChannel:
    """Kraus ``E_a = x_a V^dag + y_a C^dag`` with the stacked ``y`` a random
    isometry orthogonal to the stacked ``x`` (which must itself be one)."""
    count, d, _ = x.shape
    if extra:
        perp = complete_basis(x.reshape(count * d, -1))
        mix = random_isometry(perp.shape[1], extra, rng)
        y = (perp @ mix).reshape(count, d, extra)
    else:
        y = np.zeros((count, d, 0), dtype=complex)
    c = dec.complement_basis()
    return QuantumChannel([x[a] @ adjoint(dec.isometry) + y[a] @ adjoint(c) for a in range(count)])


def noiseless_instance(m: int, n: int, extra: int, kraus_count: int,
                       rng=None) -> tuple[QuantumChannel, SubsystemDecomposition]:
    """Random channel acting as ``F_a (x) 1_n`` on a random ``m x n`` split.

    The code is invariant (``E_a V = V (F_a (x) 1_n)``), so ``H^B`` is a
    noiseless subsystem.
    """
    rng = _rng(rng)
    dec = random_decomposition(m * n + extra, m, n, rng)
    f = random_isometry(kraus_count * m, m, rng).reshape(kraus_count, m, m)
    x = np.stack([dec.isometry @ np.kron(fa, np.eye(n)) for fa in f])
    return complete_channel(x, dec, extra, rng), dec
