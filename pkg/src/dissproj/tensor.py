"""Dense complex linear algebra primitives.

Operators are plain ``(d, d)`` complex numpy arrays. Superoperators are
``(d**2, d**2)`` arrays acting on column-stacked vectorizations, so that

    vec(A @ X @ B) == kron(B.T, A) @ vec(X)

Every superoperator formula in the package is written against this
convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg

from dissproj.exceptions import ConfigError, IllSeparatedSpectrum, NumericalError

HERMITIAN_TOL = 1e-12

# Pauli matrices; site ordering elsewhere puts site 1 as the leftmost factor.
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# Unnormalized ladder operators, sigma^- = sigma^x - i sigma^y = 2|1><0|.
# This normalization reproduces A = sigma^y (x) 1 for the two-qubit
# emergent model, with Bohr phases exp(+-2i).
SIGMA_MINUS = SIGMA_X - 1j * SIGMA_Y
SIGMA_PLUS = SIGMA_X + 1j * SIGMA_Y
PAULIS = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}


def as_operator(x, dim: Optional[int] = None) -> np.ndarray:
    a = np.asarray(x, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ConfigError(f"expected a square matrix, got shape {a.shape}")
    if dim is not None and a.shape[0] != dim:
        raise ConfigError(f"expected dimension {dim}, got {a.shape[0]}")
    return a


def kron(*ops) -> np.ndarray:
    """Kronecker product of one or more operators, left to right."""
    if not ops:
        raise ValueError("kron needs at least one operand")
    return reduce(np.kron, (np.asarray(o, dtype=complex) for o in ops))


def dag(x: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(x)).T


def comm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def vec(x: np.ndarray) -> np.ndarray:
    """Column-stack an operator into a vector of length d**2."""
    return np.asarray(x, dtype=complex).reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex).ravel()
    d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise ConfigError(f"vector length {v.size} is not a perfect square")
    return v.reshape((d, d), order="F")


def apply_super(s: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Apply a superoperator matrix to an operator."""
    return unvec(s @ vec(x))


def super_dim(s: np.ndarray) -> int:
    n = s.shape[0]
    d = int(round(np.sqrt(n)))
    if d * d != n or s.shape != (n, n):
        raise ConfigError(f"superoperator shape {s.shape} is not (d^2, d^2)")
    return d


def left_mul(a: np.ndarray) -> np.ndarray:
    """Superoperator of X -> A X."""
    return np.kron(np.eye(a.shape[0]), a)


def right_mul(b: np.ndarray) -> np.ndarray:
    """Superoperator of X -> X B."""
    return np.kron(b.T, np.eye(b.shape[0]))


def sandwich(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Superoperator of X -> A X B."""
    return np.kron(b.T, a)


def partial_trace(x: np.ndarray, dims: Sequence[int], keep) -> np.ndarray:
    """Trace out every subsystem whose (0-based) index is not in ``keep``.

    Parameters
    ----------
    x
        Operator on the tensor product of subsystems with dimensions ``dims``.
    dims
        Subsystem dimensions, leftmost factor first.
    keep
        Iterable of subsystem indices to keep, in any order. The result keeps
        them in their original tensor order.
    """
    x = np.asarray(x, dtype=complex)
    dims = [int(d) for d in dims]
    if any(d < 1 for d in dims) or int(np.prod(dims)) != x.shape[0] or x.shape[0] != x.shape[1]:
        raise ConfigError(f"dims {dims} inconsistent with operator of shape {x.shape}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ConfigError(f"keep indices {keep} out of range for {len(dims)} subsystems")
    n = len(dims)
    t = x.reshape(dims + dims)
    for i in reversed(range(n)):
        if i in keep:
            continue
        t = np.trace(t, axis1=i, axis2=i + t.ndim // 2)
    kd = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(kd, kd)


def expm(m: np.ndarray) -> np.ndarray:
    """Matrix exponential (scaling and squaring with Pade approximants)."""
    m = np.asarray(m)
    if not np.all(np.isfinite(m)):
        raise NumericalError("expm: non-finite entries")
    out = scipy.linalg.expm(m)
    if not np.all(np.isfinite(out)):
        raise NumericalError("expm: result overflowed")
    return out


def spectral_norm(m: np.ndarray) -> float:
    """Largest singular value."""
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def trace_norm(m: np.ndarray) -> float:
    return float(np.sum(np.linalg.svd(np.asarray(m), compute_uv=False)))


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    return 0.5 * trace_norm(np.asarray(rho) - np.asarray(sigma))


def is_hermitian(x: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    x = np.asarray(x)
    return bool(np.linalg.norm(x - dag(x)) <= tol * np.linalg.norm(x))


def check_density_matrix(rho: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Validate a density matrix: hermitian, unit trace, positive within ``tol``."""
    rho = as_operator(rho)
    if np.linalg.norm(rho - dag(rho)) > tol:
        raise ConfigError("density matrix is not hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise ConfigError(f"density matrix trace is {np.trace(rho).real:.3g}, not 1")
    if np.linalg.eigvalsh(0.5 * (rho + dag(rho)))[0] < -tol:
        raise ConfigError("density matrix has a negative eigenvalue")
    return rho


def hermitian_basis(d: int) -> list[np.ndarray]:
    """Orthonormal (Hilbert-Schmidt) basis of d x d hermitian matrices."""
    basis = []
    for i in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[i, i] = 1.0
        basis.append(e)
    s = 1.0 / np.sqrt(2.0)
    for i in range(d):
        for j in range(i + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = e[j, i] = s
            basis.append(e)
            f = np.zeros((d, d), dtype=complex)
            f[i, j] = -1j * s
            f[j, i] = 1j * s
            basis.append(f)
    return basis


def orthonormal_span(vectors: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (columns) of the span of the columns of ``vectors``."""
    vectors = np.asarray(vectors, dtype=complex)
    if vectors.size == 0:
        return np.zeros((vectors.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(vectors, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((vectors.shape[0], 0), dtype=complex)
    return u[:, s > rtol * s[0]]


def null_space(m: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of the right null space, rank cut at ``rtol * s_max``."""
    m = np.asarray(m, dtype=complex)
    _, s, vh = np.linalg.svd(m, full_matrices=True)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > rtol * smax)) if smax > 0 else 0
    return vh[rank:].conj().T


@dataclass(frozen=True)
class SpectralSplit:
    """Invariant-subspace splitting of a matrix ``m`` from its ordered Schur form.

    With ``m = Z T Z^H`` ordered so the selected eigenvalues come first and
    ``T11 Y - Y T22 = -T12``, the spectral projector is
    ``Z [[I, -Y], [0, 0]] Z^H``. The range and complement are returned as
    biorthogonal basis/dual pairs so that ``projector = range_basis @ range_dual``
    and ``1 - projector = complement_basis @ complement_dual``.
    """

    projector: np.ndarray
    range_basis: np.ndarray
    range_dual: np.ndarray
    complement_basis: np.ndarray
    complement_dual: np.ndarray
    selected: np.ndarray
    rest: np.ndarray
    rest_block: np.ndarray
    tol: float

    @property
    def rank(self) -> int:
        return self.range_basis.shape[1]

    def complement_inverse(self) -> np.ndarray:
        """Inverse of ``m`` on the complementary invariant subspace, zero on the range."""
        if self.rest_block.size == 0:
            n = self.projector.shape[0]
            return np.zeros((n, n), dtype=complex)
        inv = np.linalg.solve(self.rest_block, self.complement_dual)
        return self.complement_basis @ inv


def default_cluster_tol(eigenvalues: np.ndarray) -> float:
    """``1e-8`` times the spectral radius (``1e-8`` for a nilpotent matrix)."""
    radius = float(np.max(np.abs(eigenvalues))) if np.size(eigenvalues) else 0.0
    return 1e-8 * radius if radius > 0 else 1e-8


def schur_spectral_split(
    m: np.ndarray,
    cluster: Callable[[complex], bool],
    tol: Optional[float] = None,
) -> SpectralSplit:
    """Spectral projector onto the invariant subspace of a cluster of eigenvalues.

    Uses an ordered complex Schur form and a Sylvester solve to decouple the
    two diagonal blocks, so no eigenvector matrix is ever inverted.

    Parameters
    ----------
    m
        Square complex matrix, possibly non-normal.
    cluster
        Predicate on an eigenvalue; ``True`` selects it.
    tol
        Cluster tolerance. Selected and unselected eigenvalues must be at
        least ``10 * tol`` apart. Defaults to ``1e-8`` times the spectral radius.

    Raises
    ------
    IllSeparatedSpectrum
        If some selected eigenvalue lies within ``10 * tol`` of an unselected one.
    """
    m = np.asarray(m, dtype=complex)
    if not np.all(np.isfinite(m)):
        raise NumericalError("schur_spectral_split: non-finite entries")
    n = m.shape[0]
    t, z, k = scipy.linalg.schur(m, output="complex", sort=lambda lam: bool(cluster(lam)))
    eigs = np.diag(t)
    if tol is None:
        tol = default_cluster_tol(eigs)
    sel, rest = eigs[:k], eigs[k:]
    if k and n - k:
        sep = np.min(np.abs(sel[:, None] - rest[None, :]))
        if sep < 10 * tol:
            raise IllSeparatedSpectrum(
                f"ill-separated spectrum: cluster separation {sep:.3e} < 10 * tol = {10 * tol:.3e}"
            )
    t11, t12, t22 = t[:k, :k], t[:k, k:], t[k:, k:]
    if k and n - k:
        y = scipy.linalg.solve_sylvester(t11, -t22, -t12)
    else:
        y = np.zeros((k, n - k), dtype=complex)
    zh = z.conj().T
    range_basis = z[:, :k]
    range_dual = np.hstack([np.eye(k), -y]) @ zh
    complement_basis = z @ np.vstack([y, np.eye(n - k)])
    complement_dual = zh[k:, :]
    return SpectralSplit(
        projector=range_basis @ range_dual,
        range_basis=range_basis,
        range_dual=range_dual,
        complement_basis=complement_basis,
        complement_dual=complement_dual,
        selected=sel,
        rest=rest,
        rest_block=t22,
        tol=float(tol),
    )
