"""Perturbation series around the kernel of a dissipative generator.

For ``L(x) = L0 + x L1`` with a semisimple zero eigenvalue of ``L0``, the
projector onto the perturbed zero group and the generator restricted to it
expand as ``P(x) = P0 + x P1 + ...`` and ``R(x) = x R1 + x**2 R2 + ...``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from dissproj.exceptions import NumericalError
from dissproj.liouville import LindbladModel, hamiltonian_superop, unitality_check
from dissproj.steady import SteadyDecomposition
from dissproj.tensor import (
    dag,
    expm,
    hermitian_basis,
    schur_spectral_split,
    spectral_norm,
    super_dim,
    unvec,
    vec,
)


@dataclass(frozen=True)
class KatoSeries:
    p1: np.ndarray
    r1: np.ndarray
    r2: np.ndarray


def kato_terms(sd: SteadyDecomposition, l1: np.ndarray) -> KatoSeries:
    """First-order projector and first two restricted-generator terms."""
    p0, s = sd.p0, sd.s
    p0l1 = p0 @ l1
    sl1 = s @ l1
    r1 = p0l1 @ p0
    p1 = -(p0l1 @ s + sl1 @ p0)
    r2 = -(r1 @ l1 @ s + p0l1 @ sl1 @ p0 + sl1 @ r1)
    return KatoSeries(p1=p1, r1=r1, r2=r2)


def perturbed_projector(sd: SteadyDecomposition, l1: np.ndarray, x: float) -> np.ndarray:
    """``P(x)``: projector of ``L0 + x L1`` onto the eigenvalues that left 0.

    The group is taken as every eigenvalue within half the unperturbed gap
    of the origin, so ``x`` must be small against the gap.
    """
    split = schur_spectral_split(sd.l0 + x * l1, lambda lam: abs(lam) <= 0.5 * sd.gap)
    if split.rank != sd.kernel_rank:
        raise NumericalError(
            f"perturbed group has {split.rank} eigenvalues, expected {sd.kernel_rank}; x too large"
        )
    return split.projector


def projector_derivative_fd(sd: SteadyDecomposition, l1: np.ndarray, h: float) -> tuple:
    """Forward difference of ``P(x)`` at 0 and its Richardson extrapolation.

    Returns ``(forward, richardson)`` where ``forward = (P(h) - P0) / h`` and
    ``richardson = 2 D(h/2) - D(h)`` cancels the first-order error.
    """
    d_h = (perturbed_projector(sd, l1, h) - sd.p0) / h
    d_half = (perturbed_projector(sd, l1, h / 2) - sd.p0) / (h / 2)
    return d_h, 2 * d_half - d_h


def effective_generator(sd: SteadyDecomposition, l1: np.ndarray) -> np.ndarray:
    """``P0 L1 P0``, the generator of the dynamics inside the steady-state set."""
    return sd.p0 @ l1 @ sd.p0


def extract_effective_hamiltonian(leff: np.ndarray, sd: SteadyDecomposition):
    """Best hermitian ``A`` with ``leff P0 ~ -i[A, .] P0``.

    Solves the least-squares problem ``min_A ||(leff + i[A, .]) P0||_F`` over
    hermitian ``A``. Operators that commute with the whole steady-state set
    are invisible to it; the minimum-norm solution removes them, so ``A``
    is traceless.

    Returns
    -------
    a : ndarray
        The hermitian effective Hamiltonian.
    residual : float
        Spectral norm of ``(leff + i[A, .]) P0``. It is near zero iff the
        projected dynamics is Hamiltonian on the steady-state set.
    """
    d = super_dim(leff)
    w, c = sd.split.range_basis, sd.split.range_dual
    k = w.shape[1]
    if k == 0:
        return np.zeros((d, d), dtype=complex), 0.0
    # ||M P0||_F = ||M W G||_F with G = (C C^+)^(1/2), since P0 = W C.
    ev, u = np.linalg.eigh(c @ c.conj().T)
    g = (u * np.sqrt(np.clip(ev, 0, None))) @ u.conj().T
    target = (leff @ w @ g).ravel(order="F")
    xs = np.stack([unvec(w[:, j]) for j in range(k)])
    basis = hermitian_basis(d)
    cols = []
    for b in basis:
        kb = -1j * (b @ xs - xs @ b)
        cols.append((kb.reshape(k, -1, order="F").T @ g).ravel(order="F"))
    design = np.column_stack(cols)
    real_design = np.vstack([design.real, design.imag])
    real_target = np.concatenate([target.real, target.imag])
    coeffs, *_ = np.linalg.lstsq(real_design, real_target, rcond=1e-10)
    a = sum(ci * b for ci, b in zip(coeffs, basis))
    a = 0.5 * (a + dag(a))
    a = a - np.trace(a) / d * np.eye(d)
    residual = spectral_norm((leff - hamiltonian_superop(a)) @ sd.p0)
    return a, residual


def emergent_hamiltonian_formula(
    model: LindbladModel, deltas, sd: SteadyDecomposition
) -> np.ndarray:
    """Closed-form Hamiltonian generated by a first-order Lindblad shift.

    Unital generators: ``A = Im P0(sum_a gamma_a dL_a^+ L_a)``. Otherwise
    ``P0`` is replaced by its Hilbert-Schmidt adjoint, which maps ``Y`` to
    ``sum_J Tr_dJ(Pi_J Y Pi_J (1 (x) rho_0J)) (x) 1_dJ``. The two agree
    whenever ``P0`` is an orthogonal projector.
    """
    m = sum(rate * dag(delta) @ op for (op, rate), delta in zip(model.lindblads, deltas))
    if unitality_check(model).unital:
        projected = unvec(sd.p0 @ vec(m))
    else:
        projected = unvec(sd.p0.conj().T @ vec(m))
    return (projected - dag(projected)) / 2j


@dataclass(frozen=True)
class ErrorBoundReport:
    x: float
    t: float
    T: float
    lhs: float
    rhs: float
    s_norm: float
    l1_norm: float
    p0_norm: float
    C: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs


def _sup_exp_norm(r: np.ndarray, points: int = 64) -> float:
    grid = np.linspace(0.0, 1.0, points)
    vals = np.array([spectral_norm(expm(s * r)) for s in grid])
    i = int(np.argmax(vals))
    best = vals[i]
    if 0 < i < points - 1:
        # parabola through the grid maximum and its neighbours
        h = grid[1] - grid[0]
        y0, y1, y2 = vals[i - 1], vals[i], vals[i + 1]
        denom = y0 - 2 * y1 + y2
        if denom < 0:
            s_star = grid[i] + 0.5 * h * (y0 - y2) / denom
            best = max(best, spectral_norm(expm(s_star * r)))
    return float(best)


def error_bound(sd: SteadyDecomposition, l1: np.ndarray, x: float, t: float) -> ErrorBoundReport:
    """Measured projection error at time ``t`` versus its first-order bound.

    The generator is ``L0 + x L1``. Times are nondimensionalized by the
    relaxation time ``1 / gap``; the control timescale is ``T = 1 / (x gap)``.
    """
    gamma0 = sd.gap
    p0 = sd.p0
    r_eff = t * x * (p0 @ l1 @ p0)
    lhs = spectral_norm((expm(t * (sd.l0 + x * l1)) - expm(r_eff)) @ p0)
    s_norm = spectral_norm(gamma0 * sd.s)
    l1_norm = spectral_norm(l1 / gamma0)
    p0_norm = spectral_norm(p0)
    c = _sup_exp_norm(r_eff)
    t_over_T = t * x * gamma0
    rhs = x * s_norm * l1_norm * p0_norm * (3 * t_over_T * c**2 * p0_norm**2 * l1_norm + 4)
    return ErrorBoundReport(
        x=float(x), t=float(t), T=1.0 / (x * gamma0) if x else np.inf,
        lhs=lhs, rhs=float(rhs), s_norm=s_norm, l1_norm=l1_norm, p0_norm=p0_norm, C=c,
    )
