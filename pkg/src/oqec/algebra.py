"""Operator algebras: generated *-algebras, commutants, centres and the
block (Wedderburn) structure ``A ~ (+)_J M_{m_J} (x) 1_{n_J}`` with explicit
matrix units.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ClosureError, DegenerateStructureError, DimensionError
from .matkit import (
    DEFAULT_TOL,
    ComplexMatrix,
    Tolerance,
    adjoint,
    as_matrix,
    complete_basis,
    eig_hermitian,
    fro,
    null_space,
    orthonormalize,
    polar_isometry,
)

log = logging.getLogger(__name__)

RETRY_SEEDS = 4
GAP_TOL = 1e-6


class OperatorSpace:
    """A subspace of ``B(C^d)`` held as a Hilbert-Schmidt orthonormal basis.

    The closure flags are computed on construction: ``selfadjoint_closed``
    when every basis adjoint lies in the span, ``multiplicatively_closed``
    when every pairwise product does.  Membership uses the projection
    residual ``<= atol * max(1, ||X||_F)``.
    """

    def __init__(self, dim: int, basis, tol: Tolerance = DEFAULT_TOL, check: bool = True):
        b = np.asarray(basis, dtype=complex).reshape(-1, dim, dim)
        b.setflags(write=False)
        self.dim = dim
        self.basis = b
        self.tol = tol
        if check:
            self.selfadjoint_closed = self._check_adjoints()
            self.multiplicatively_closed = self._check_products()
        else:
            self.selfadjoint_closed = False
            self.multiplicatively_closed = False

    @classmethod
    def span(cls, ops: Iterable[ComplexMatrix], dim: int, tol: Tolerance = DEFAULT_TOL,
             check: bool = True) -> "OperatorSpace":
        rows = orthonormalize((np.asarray(o, dtype=complex).ravel() for o in ops), tol)
        if rows.shape[0] == 0:
            rows = np.zeros((0, dim * dim), dtype=complex)
        return cls(dim, rows.reshape(-1, dim, dim), tol, check)

    def __len__(self) -> int:
        return self.basis.shape[0]

    def __repr__(self) -> str:
        return (f"OperatorSpace(dim={self.dim}, size={len(self)}, "
                f"selfadjoint_closed={self.selfadjoint_closed}, "
                f"multiplicatively_closed={self.multiplicatively_closed})")

    @property
    def vectors(self) -> np.ndarray:
        """Basis as orthonormal rows of length d^2."""
        return self.basis.reshape(len(self), -1)

    @property
    def is_algebra(self) -> bool:
        return self.selfadjoint_closed and self.multiplicatively_closed

    def project(self, x: ComplexMatrix) -> ComplexMatrix:
        v = np.asarray(x, dtype=complex).ravel()
        q = self.vectors
        return (q.T @ (q.conj() @ v)).reshape(self.dim, self.dim)

    def residual(self, x: ComplexMatrix) -> float:
        return fro(as_matrix(x) - self.project(x))

    def contains(self, x: ComplexMatrix) -> bool:
        return self.residual(x) <= self.tol.atol * max(1.0, fro(x))

    def _batch_residuals(self, ops: np.ndarray) -> np.ndarray:
        v = ops.reshape(ops.shape[0], -1)
        q = self.vectors
        r = v - (v @ q.conj().T) @ q
        scale = np.maximum(1.0, np.linalg.norm(v, axis=1))
        return np.linalg.norm(r, axis=1) / scale

    def _check_adjoints(self) -> bool:
        if len(self) == 0:
            return True
        adj = np.conj(np.transpose(self.basis, (0, 2, 1)))
        return bool(np.all(self._batch_residuals(adj) <= self.tol.atol))

    def _check_products(self) -> bool:
        k = len(self)
        if k == 0:
            return True
        for i in range(k):
            prods = np.einsum("ij,bjk->bik", self.basis[i], self.basis)
            if np.any(self._batch_residuals(prods) > self.tol.atol):
                return False
        return True

    def random_element(self, rng: np.random.Generator, hermitian: bool = False) -> ComplexMatrix:
        c = rng.standard_normal(len(self)) + 1j * rng.standard_normal(len(self))
        x = np.einsum("c,cij->ij", c, self.basis)
        if hermitian:
            x = x + adjoint(x)
        return x

    def span_distance(self, other: "OperatorSpace") -> float:
        """Spectral-norm distance between orthogonal projectors onto the spans.

        This is the sine of the largest principal angle; it equals 1 when
        the dimensions differ.
        """
        if self.dim != other.dim:
            raise DimensionError("operator spaces act on different dimensions")
        if len(self) != len(other):
            return 1.0
        if len(self) == 0:
            return 0.0
        a, b = self.vectors, other.vectors
        # residual of each basis of self after projecting onto other
        r = a - (a @ b.conj().T) @ b
        return float(min(1.0, np.linalg.norm(r, 2)))


AlgebraBasis = OperatorSpace


def generate_algebra(generators: Sequence[ComplexMatrix], tol: Tolerance = DEFAULT_TOL) -> OperatorSpace:
    """Smallest unital *-algebra containing ``generators``.

    Words in the generators and their adjoints are grown by left
    multiplication until the span stops growing; the identity is adjoined.
    """
    gens = [as_matrix(g) for g in generators]
    if not gens:
        raise DimensionError("need at least one generator")
    d = gens[0].shape[0]
    for g in gens:
        if g.shape != (d, d):
            raise DimensionError(f"generator of shape {g.shape}; expected ({d}, {d})")
    letters = gens + [adjoint(g) for g in gens]
    rows = orthonormalize([np.eye(d).ravel()] + [g.ravel() for g in letters], tol)
    frontier = rows
    while frontier.shape[0] and rows.shape[0] < d * d:
        mats = frontier.reshape(-1, d, d)
        cands = (g @ m for g in letters for m in mats)
        new = orthonormalize(cands, tol, basis=rows)
        frontier = new[rows.shape[0]:]
        rows = new
    return OperatorSpace(d, rows.reshape(-1, d, d), tol)


def commutant_of(ops: Sequence[ComplexMatrix], dim: int, tol: Tolerance = DEFAULT_TOL,
                 include_adjoints: bool = True) -> OperatorSpace:
    """``{X : XG = GX for every G in ops (and their adjoints)}``."""
    mats = [as_matrix(o) for o in ops]
    if include_adjoints:
        mats = mats + [adjoint(m) for m in mats]
    if not mats:
        return OperatorSpace(dim, np.eye(dim * dim).reshape(-1, dim, dim), tol)
    eye = np.eye(dim)
    # row-major vec: vec(XG) = (I (x) G^T) vec X, vec(GX) = (G (x) I) vec X
    blocks = [np.kron(eye, g.T) - np.kron(g, eye) for g in mats]
    scale = max(np.linalg.norm(g, 2) for g in mats)
    ker = null_space(np.vstack(blocks), tol, scale)
    return OperatorSpace(dim, ker.T.reshape(-1, dim, dim), tol)


def commutant(alg: OperatorSpace, tol: Tolerance | None = None) -> OperatorSpace:
    """Commutant of a self-adjoint operator space."""
    tol = tol or alg.tol
    if not alg.selfadjoint_closed:
        raise ClosureError("commutant() expects a self-adjoint closed operator space")
    return commutant_of(list(alg.basis), alg.dim, tol, include_adjoints=False)


def intersect(a: OperatorSpace, b: OperatorSpace, tol: Tolerance | None = None) -> OperatorSpace:
    """Common subspace of two operator spaces via principal angles.

    Directions of ``a`` whose distance to span(``b``) is below
    ``sqrt(atol)`` are kept.
    """
    tol = tol or a.tol
    if len(a) == 0 or len(b) == 0:
        return OperatorSpace(a.dim, np.zeros((0, a.dim, a.dim)), tol)
    qa, qb = a.vectors, b.vectors
    g = qb.conj() @ qa.T  # <b_j, a_i>
    _, _, zh = np.linalg.svd(g, full_matrices=True)
    cands = zh.conj() @ qa  # rows: combinations of a's basis along right singular vectors
    resid = np.linalg.norm(cands - (cands @ qb.conj().T) @ qb, axis=1)
    keep = cands[resid <= np.sqrt(tol.atol)]
    return OperatorSpace.span(keep, a.dim, tol)


def center(alg: OperatorSpace, tol: Tolerance | None = None) -> OperatorSpace:
    tol = tol or alg.tol
    if not alg.is_algebra:
        raise ClosureError("center() expects a *-algebra")
    return intersect(alg, commutant(alg, tol), tol)


@dataclass
class Block:
    """One summand ``M_m (x) 1_n`` of a block structure.

    ``isometry`` is ``d x (m*n)``; column ``k*n + l`` (0-based) is the image of
    ``|k> (x) |l>``.  ``matrix_units[k, l]`` is ``P_kl``.
    """

    m: int
    n: int
    isometry: np.ndarray
    matrix_units: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.matrix_units is None:
            self.matrix_units = matrix_units_from_isometry(self.isometry, self.m, self.n)

    @property
    def projection(self) -> ComplexMatrix:
        return self.isometry @ adjoint(self.isometry)


def matrix_units_from_isometry(v: np.ndarray, m: int, n: int) -> np.ndarray:
    """``P_kl = V (|k><l| (x) 1_n) V^dag`` stacked as ``(m, m, d, d)``."""
    vk = v.reshape(v.shape[0], m, n)
    return np.einsum("ikp,jlp->klij", vk, vk.conj())


def matrix_unit_residual(units: np.ndarray) -> float:
    """Largest violation of P_kl = P_kk P_kl P_ll, P_kl^dag = P_lk,
    P_kl P_l'k' = delta_ll' P_kk'."""
    m = units.shape[0]
    worst = 0.0
    for k in range(m):
        for l in range(m):
            p = units[k, l]
            worst = max(worst, fro(p - units[k, k] @ p @ units[l, l]))
            worst = max(worst, fro(adjoint(p) - units[l, k]))
            for l2 in range(m):
                for k2 in range(m):
                    want = units[k, k2] if l == l2 else 0.0
                    worst = max(worst, fro(p @ units[l2, k2] - want))
    return worst


@dataclass
class BlockStructure:
    dim: int
    blocks: list[Block]
    complement_basis: np.ndarray
    seed: int = 0
    reconstruction_residual: float = 0.0
    matrix_unit_residual: float = 0.0

    @property
    def complement_dim(self) -> int:
        return self.complement_basis.shape[1]

    @property
    def dims(self) -> list[tuple[int, int]]:
        return [(b.m, b.n) for b in self.blocks]

    def __repr__(self) -> str:
        table = ", ".join(f"({m},{n})" for m, n in self.dims)
        return f"BlockStructure(dim={self.dim}, blocks=[{table}], complement_dim={self.complement_dim})"


def _clusters(w: np.ndarray, gap: float) -> list[np.ndarray]:
    """Split sorted eigenvalues at gaps larger than ``gap``."""
    cuts = np.flatnonzero(np.diff(w) > gap) + 1
    return np.split(np.arange(w.size), cuts)


def _split_once(alg: OperatorSpace, cent: OperatorSpace, tol: Tolerance,
                seed: int) -> BlockStructure:
    d = alg.dim
    rng = np.random.default_rng(seed)

    # minimal central projections from a generic self-adjoint central element
    h = cent.random_element(rng, hermitian=True)
    h /= max(fro(h), 1e-300)
    w, v = eig_hermitian(h, tol)
    scale = max(1.0, float(np.max(np.abs(w))))
    groups = _clusters(w, GAP_TOL * scale)
    sectors, complement = [], []
    for g in groups:
        q = v[:, g] @ adjoint(v[:, g])
        (sectors if alg.contains(q) else complement).append(v[:, g])
    if len(sectors) != len(cent):
        raise DegenerateStructureError(
            f"central element separated {len(sectors)} sectors but the centre has "
            f"dimension {len(cent)}; retry with another seed"
        )
    comp = np.hstack(complement) if complement else np.zeros((d, 0), dtype=complex)

    blocks = []
    for qb in sectors:
        r = qb.shape[1]
        # compress the algebra onto this sector: q A q ~ M_m (x) 1_n
        comp_alg = np.einsum("ia,kij,jb->kab", qb.conj(), alg.basis, qb)
        rows = orthonormalize(comp_alg.reshape(len(alg), -1), tol)
        m = int(round(np.sqrt(rows.shape[0])))
        if m * m != rows.shape[0] or r % m:
            raise DegenerateStructureError(
                f"sector of rank {r} carries a {rows.shape[0]}-dimensional algebra, "
                f"not a full matrix algebra times multiplicity"
            )
        n = r // m
        local = rows.reshape(-1, r, r)
        c = rng.standard_normal(len(local)) + 1j * rng.standard_normal(len(local))
        a = np.einsum("c,cij->ij", c, local)
        hh = a + adjoint(a)
        hh /= max(fro(hh), 1e-300)
        w2, v2 = eig_hermitian(hh, tol)
        groups2 = _clusters(w2, GAP_TOL * max(1.0, float(np.max(np.abs(w2)))))
        if len(groups2) != m or any(len(g) != n for g in groups2):
            raise DegenerateStructureError(
                f"sector (m={m}, n={n}) split into eigenspaces of sizes "
                f"{[len(g) for g in groups2]}; retry with another seed"
            )
        frames = [v2[:, g] for g in groups2]  # r x n, orthonormal, range of p_kk
        # connect p_11 to p_kk through p_11 a p_kk for a generic algebra element
        c = rng.standard_normal(len(local)) + 1j * rng.standard_normal(len(local))
        g_el = np.einsum("c,cij->ij", c, local)
        f1 = frames[0]
        cols = [f1]
        for fk in frames[1:]:
            x = adjoint(f1) @ g_el @ fk  # n x n, scalar multiple of a unitary
            s = np.linalg.svd(x, compute_uv=False)
            if s[0] < GAP_TOL or s[-1] < 0.5 * s[0]:
                raise DegenerateStructureError(
                    "matrix-unit connector is near singular; retry with another seed"
                )
            u1k = polar_isometry(x, tol)  # maps range p_kk -> range p_11 in frame coords
            cols.append(fk @ adjoint(u1k))
        local_iso = np.hstack(cols)  # r x (m n), column k*n + l
        blocks.append(Block(m, n, qb @ local_iso))

    return BlockStructure(d, blocks, comp, seed)


def _sort_key(b: Block):
    ent = np.round(b.isometry, 8)
    return (-b.m, -b.n, tuple(np.abs(ent).ravel().tolist()), tuple(ent.real.ravel().tolist()))


def _check_structure(bs: BlockStructure, alg: OperatorSpace) -> None:
    recon = 0.0
    for x in alg.basis:
        covered = np.zeros_like(x)
        for b in bs.blocks:
            y = adjoint(b.isometry) @ x @ b.isometry
            t = y.reshape(b.m, b.n, b.m, b.n)
            core = np.einsum("apbp->ab", t) / b.n
            recon = max(recon, fro(y - np.kron(core, np.eye(b.n))))
            covered = covered + b.projection @ x @ b.projection
        recon = max(recon, fro(x - covered))
    bs.reconstruction_residual = recon
    bs.matrix_unit_residual = max(
        (matrix_unit_residual(b.matrix_units) for b in bs.blocks), default=0.0
    )


def decompose_structure(alg: OperatorSpace, tol: Tolerance | None = None,
                        seed: int = 0) -> BlockStructure:
    """Block decomposition ``(+)_J M_{m_J} (x) 1_{n_J}`` of a *-algebra.

    The seeded procedure: split the space with a generic self-adjoint element
    of the centre (one eigenspace per minimal central projection); inside each
    sector, a generic self-adjoint algebra element yields the minimal
    projections ``p_kk``; generic compressions ``p_11 a p_kk`` are polar-
    decomposed into the off-diagonal matrix units.  On a detected degeneracy
    the seeds ``seed+1 .. seed+4`` are tried before giving up.

    Blocks are sorted by ``(m desc, n desc)`` then by rounded isometry entries.
    The result is checked: every algebra element must take the form
    ``M (x) 1_n`` in block coordinates and the matrix-unit identities must
    hold, both within ``atol``.
    """
    tol = tol or alg.tol
    if not alg.is_algebra:
        raise ClosureError("decompose_structure() expects a *-algebra")
    cent = center(alg, tol)
    err = None
    for s in range(seed, seed + RETRY_SEEDS + 1):
        try:
            bs = _split_once(alg, cent, tol, s)
        except DegenerateStructureError as exc:
            log.debug("seed %d degenerate: %s", s, exc)
            err = exc
            continue
        bs.blocks.sort(key=_sort_key)
        _check_structure(bs, alg)
        worst = max(bs.reconstruction_residual, bs.matrix_unit_residual)
        if worst > tol.atol:
            err = DegenerateStructureError(
                f"seed {s}: block reconstruction residual {worst:.3e} exceeds tolerance"
            )
            continue
        return bs
    raise DegenerateStructureError(
        f"block decomposition failed for seeds {seed}..{seed + RETRY_SEEDS}: {err}"
    )


def gamma_map(units: np.ndarray, sigma: ComplexMatrix) -> ComplexMatrix:
    """``sum_kl P_kl sigma P_kl^dag`` for one block's matrix units."""
    sigma = as_matrix(sigma)
    units = np.asarray(units)
    if sigma.shape != units.shape[2:]:
        raise DimensionError(f"operator {sigma.shape} vs matrix units on {units.shape[2:]}")
    return np.einsum("klij,jp,klqp->iq", units, sigma, units.conj())


def commutant_block_dims(bs: BlockStructure) -> list[tuple[int, int]]:
    """Block table of the commutant restricted to the algebra's support."""
    return [(b.n, b.m) for b in bs.blocks]


def complement_of(isometry: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    return complete_basis(isometry, tol)
