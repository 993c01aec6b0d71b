"""Steady-state structure of a Lindbladian.

Two independent routes to the projector onto the steady-state set:

* the spectral route (:func:`zero_group_projector`), valid for any
  generator, unital or not, which also yields the reduced resolvent and the
  dissipative gap;
* the algebraic route (:func:`commutant_projector`), the Hilbert-Schmidt
  orthogonal projector onto the commutant of the interaction algebra, which
  coincides with the spectral one only for unital generators.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from dissproj.exceptions import ConfigError, NotDissipative, NumericalError
from dissproj.tensor import (
    SpectralSplit,
    as_operator,
    dag,
    default_cluster_tol,
    left_mul,
    null_space,
    orthonormal_span,
    right_mul,
    schur_spectral_split,
    spectral_norm,
    unvec,
    vec,
)

logger = logging.getLogger(__name__)

DEFAULT_BLOCK_SEED = 1234


@dataclass(frozen=True)
class SteadyDecomposition:
    """Zero-eigenvalue group of a generator ``l0``.

    Attributes
    ----------
    p0
        Spectral projector onto ``ker l0`` (oblique in general).
    s
        Reduced resolvent: ``s @ l0 == l0 @ s == 1 - p0`` and ``s @ p0 == 0``.
    gap
        Smallest ``|Re lambda|`` over the nonzero eigenvalues (Hz).
    kernel_rank
        Dimension of the kernel.
    """

    p0: np.ndarray
    s: np.ndarray
    gap: float
    kernel_rank: int
    l0: np.ndarray = field(repr=False)
    split: SpectralSplit = field(repr=False)

    @property
    def relaxation_time(self) -> float:
        return 1.0 / self.gap

    @property
    def q0(self) -> np.ndarray:
        return np.eye(self.p0.shape[0]) - self.p0


def zero_group_projector(l0: np.ndarray, tol: Optional[float] = None) -> SteadyDecomposition:
    """Spectral projector onto the kernel of ``l0``, reduced resolvent and gap.

    Raises
    ------
    IllSeparatedSpectrum
        If a nonzero eigenvalue sits within ``10 * tol`` of the kernel cluster.
    NotDissipative
        If some eigenvalue has real part above ``tol``.
    NumericalError
        If the kernel touches purely oscillating modes (zero dissipative gap).
    """
    l0 = np.asarray(l0, dtype=complex)
    if tol is None:
        tol = default_cluster_tol(np.linalg.eigvals(l0))
    split = schur_spectral_split(l0, lambda lam: abs(lam) <= tol, tol)
    rest = split.rest
    if rest.size and np.max(rest.real) > tol:
        raise NotDissipative(
            f"not a dissipative generator: eigenvalue with real part {np.max(rest.real):.3e}"
        )
    gap = float(np.min(np.abs(rest.real))) if rest.size else np.inf
    if rest.size and gap <= 10 * tol:
        raise NumericalError(f"zero dissipative gap (smallest |Re lambda| = {gap:.3e})")
    return SteadyDecomposition(
        p0=split.projector,
        s=split.complement_inverse(),
        gap=gap,
        kernel_rank=split.rank,
        l0=l0,
        split=split,
    )


def close_under_adjoint(generators: Sequence, tol: float = 1e-12) -> tuple[list, bool]:
    """Append missing adjoints; the flag reports whether anything was added."""
    gens = [as_operator(g) for g in generators]
    closed = list(gens)
    changed = False
    for g in gens:
        gd = dag(g)
        scale = max(np.linalg.norm(g), 1.0)
        if not any(np.linalg.norm(gd - h) <= tol * scale for h in closed):
            closed.append(gd)
            changed = True
    return closed, changed


def _commutator_stack(generators: Sequence) -> np.ndarray:
    return np.vstack([left_mul(g) - right_mul(g) for g in generators])


def commutant_basis(generators: Sequence, rtol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (vectorized, as columns) of ``{X : [X, g] = 0 for all g}``."""
    gens, changed = close_under_adjoint(generators)
    if changed:
        logger.info("generator set was not closed under adjoint; adjoints added")
    return null_space(_commutator_stack(gens), rtol)


def commutant_projector(generators: Sequence) -> np.ndarray:
    """Hilbert-Schmidt orthogonal projector onto the commutant of the generators."""
    v = commutant_basis(generators)
    return v @ v.conj().T


@dataclass(frozen=True)
class ConsistencyReport:
    residual: float
    spectral_rank: int
    commutant_rank: int


def unital_consistency(sd: SteadyDecomposition, generators: Sequence) -> ConsistencyReport:
    """Compare the spectral projector with the commutant projector."""
    pc = commutant_projector(generators)
    rank = int(round(np.trace(pc).real))
    return ConsistencyReport(spectral_norm(sd.p0 - pc), sd.kernel_rank, rank)


@dataclass(frozen=True)
class AlgebraDecomposition:
    """Interaction algebra, its commutant and center, and the block structure.

    Bases are Hilbert-Schmidt orthonormal. ``blocks`` lists ``(n_J, d_J)``:
    multiplicity (noiseless factor) and irrep dimension (noisy factor).
    """

    algebra_basis: list
    commutant_basis: list
    center_basis: list
    blocks: list
    block_projectors: list = field(repr=False)
    seed: int = DEFAULT_BLOCK_SEED

    @property
    def dim(self) -> int:
        return self.algebra_basis[0].shape[0]

    @property
    def codimension(self) -> int:
        """Codimension of the Hamiltonian robustness solution space."""
        return sum(n * n - 1 for n, _ in self.blocks)

    def commutant_projector(self) -> np.ndarray:
        v = np.column_stack([vec(b) for b in self.commutant_basis])
        return v @ v.conj().T

    def center_projector(self) -> np.ndarray:
        v = np.column_stack([vec(b) for b in self.center_basis])
        return v @ v.conj().T

    def project(self, x: np.ndarray) -> np.ndarray:
        """Conditional expectation onto the commutant (the unital ``P0``)."""
        return unvec(self.commutant_projector() @ vec(x))


def _algebra_span(gens: list, rtol: float) -> np.ndarray:
    d = gens[0].shape[0]
    cols = [vec(np.eye(d))] + [vec(g) for g in gens]
    q = orthonormal_span(np.column_stack(cols), rtol)
    while True:
        products = [vec(g @ unvec(q[:, i])) for g in gens for i in range(q.shape[1])]
        grown = orthonormal_span(np.column_stack([q] + products), rtol)
        if grown.shape[1] == q.shape[1]:
            return q
        q = grown


def algebra_closure(
    generators: Sequence, seed: int = DEFAULT_BLOCK_SEED, rtol: float = 1e-10
) -> AlgebraDecomposition:
    """Interaction algebra generated by ``generators`` and their adjoints.

    The algebra is grown from words in the generators until its dimension
    stabilizes. The center is the intersection of the algebra and commutant
    spans. Central projectors are read off the eigenspaces of a seeded random
    hermitian central element; for each block ``n_J**2`` is the dimension of
    the commutant compressed to the block, and ``d_J = rank(Pi_J) / n_J``.
    """
    gens, changed = close_under_adjoint(generators)
    if changed:
        logger.info("generator set was not closed under adjoint; adjoints added")
    d = gens[0].shape[0]
    if d > 64:
        raise ConfigError("algebra_closure supports Hilbert dimension <= 64")
    qa = _algebra_span(gens, rtol)
    qc = null_space(_commutator_stack(gens), rtol)

    u, s, _ = np.linalg.svd(qa.conj().T @ qc, full_matrices=False)
    qz = qa @ u[:, s > 1 - 1e-8]

    rng = np.random.default_rng(seed)
    coeffs = rng.normal(size=qz.shape[1]) + 1j * rng.normal(size=qz.shape[1])
    z = unvec(qz @ coeffs)
    z = 0.5 * (z + dag(z))
    evals, evecs = np.linalg.eigh(z)
    scale = max(np.max(np.abs(evals)), 1.0)
    cuts = np.nonzero(np.diff(evals) > 1e-8 * scale)[0] + 1
    groups = np.split(np.arange(d), cuts)
    if len(groups) != qz.shape[1]:
        raise NumericalError(
            f"found {len(groups)} central projectors for a {qz.shape[1]}-dimensional center"
        )

    blocks = []
    for idx in groups:
        v = evecs[:, idx]
        pi = v @ dag(v)
        compressed = np.column_stack([vec(pi @ unvec(qc[:, i]) @ pi) for i in range(qc.shape[1])])
        n2 = orthonormal_span(compressed, rtol).shape[1]
        n = int(round(np.sqrt(n2)))
        rank = len(idx)
        if n * n != n2 or rank % n:
            raise NumericalError(f"inconsistent block factorization: rank {rank}, n^2 = {n2}")
        blocks.append((n, rank // n, pi))
    blocks.sort(key=lambda b: (b[1], b[0]))

    def ops(q):
        return [unvec(q[:, i]) for i in range(q.shape[1])]

    return AlgebraDecomposition(
        algebra_basis=ops(qa),
        commutant_basis=ops(qc),
        center_basis=ops(qz),
        blocks=[(n, dj) for n, dj, _ in blocks],
        block_projectors=[pi for _, _, pi in blocks],
        seed=seed,
    )


@dataclass(frozen=True)
class HamiltonianRobustness:
    robust: bool
    center_residual: float
    projected: np.ndarray
    codimension: int


def hamiltonian_robustness_check(
    v: np.ndarray, alg: AlgebraDecomposition, rtol: float = 1e-9
) -> HamiltonianRobustness:
    """Test whether the projected perturbation ``P0(V)`` lies in the center.

    Such perturbations leave the dissipation-projected dynamics unchanged.
    """
    v = as_operator(v, alg.dim)
    pv = alg.commutant_projector() @ vec(v)
    off_center = pv - alg.center_projector() @ pv
    residual = float(np.linalg.norm(off_center))
    robust = residual <= rtol * max(np.linalg.norm(v), np.finfo(float).tiny)
    return HamiltonianRobustness(robust, residual, unvec(pv), alg.codimension)
