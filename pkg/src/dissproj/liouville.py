"""Lindbladian superoperators, Hamiltonian generators and their perturbations."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from dissproj.exceptions import ConfigError
from dissproj.tensor import (
    as_operator,
    comm,
    dag,
    is_hermitian,
    left_mul,
    right_mul,
    sandwich,
    spectral_norm,
    vec,
)

UNITALITY_TOL = 1e-10


@dataclass(frozen=True)
class LindbladModel:
    """Hamiltonian plus weighted Lindblad operators.

    ``lindblads`` holds ``(L_alpha, gamma_alpha)`` pairs. Rates are folded
    into the generator at build time but kept here for reporting.
    """

    dim: int
    lindblads: tuple = ()
    hamiltonian: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigError("dim must be positive")
        checked = []
        for item in self.lindblads:
            op, rate = item
            rate = float(rate)
            if not np.isfinite(rate) or rate < 0:
                raise ConfigError(f"Lindblad rate must be finite and nonnegative, got {rate}")
            checked.append((as_operator(op, self.dim), rate))
        object.__setattr__(self, "lindblads", tuple(checked))
        if self.hamiltonian is not None:
            h = as_operator(self.hamiltonian, self.dim)
            if not is_hermitian(h, 1e-10):
                raise ConfigError("model Hamiltonian is not hermitian")
            object.__setattr__(self, "hamiltonian", h)

    @classmethod
    def from_operators(cls, ops: Sequence, rates=None, hamiltonian=None) -> "LindbladModel":
        ops = [as_operator(o) for o in ops]
        if not ops and hamiltonian is None:
            raise ConfigError("model needs at least one operator")
        dim = ops[0].shape[0] if ops else as_operator(hamiltonian).shape[0]
        if rates is None:
            rates = [1.0] * len(ops)
        if len(rates) != len(ops):
            raise ConfigError("rates and Lindblad operators differ in length")
        return cls(dim=dim, lindblads=tuple(zip(ops, rates)), hamiltonian=hamiltonian)

    @property
    def operators(self) -> list:
        return [op for op, _ in self.lindblads]

    @property
    def rates(self) -> list:
        return [rate for _, rate in self.lindblads]

    def without_hamiltonian(self) -> "LindbladModel":
        return replace(self, hamiltonian=None)

    def shifted(self, deltas: Sequence, scale: float = 1.0) -> "LindbladModel":
        """Model with every ``L_alpha`` replaced by ``L_alpha + scale * delta_alpha``."""
        _check_deltas(self, deltas)
        shifted = tuple(
            (op + scale * as_operator(d, self.dim), rate)
            for (op, rate), d in zip(self.lindblads, deltas)
        )
        return replace(self, lindblads=shifted)


def _check_deltas(model: LindbladModel, deltas: Sequence) -> None:
    if len(deltas) != len(model.lindblads):
        raise ConfigError(
            f"{len(deltas)} perturbations for {len(model.lindblads)} Lindblad operators"
        )


def hamiltonian_superop(k: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Superoperator of ``X -> -i[K, X]`` for hermitian ``K``."""
    k = as_operator(k)
    if not is_hermitian(k, tol):
        raise ConfigError("hamiltonian_superop: K is not hermitian")
    return -1j * (left_mul(k) - right_mul(k))


def single_dissipator(op: np.ndarray, rate: float = 1.0) -> np.ndarray:
    """Vectorized ``rate * (L X L^+ - 1/2 {L^+ L, X})``."""
    ldl = dag(op) @ op
    return rate * (sandwich(op, dag(op)) - 0.5 * left_mul(ldl) - 0.5 * right_mul(ldl))


def dissipative_part(model: LindbladModel) -> np.ndarray:
    n = model.dim * model.dim
    out = np.zeros((n, n), dtype=complex)
    for op, rate in model.lindblads:
        out += single_dissipator(op, rate)
    return out


def hamiltonian_part(model: LindbladModel) -> np.ndarray:
    if model.hamiltonian is None:
        n = model.dim * model.dim
        return np.zeros((n, n), dtype=complex)
    return hamiltonian_superop(model.hamiltonian)


def dissipator(model: LindbladModel) -> np.ndarray:
    """Full Lindblad generator of ``model`` (dissipative part plus Hamiltonian part)."""
    return dissipative_part(model) + hamiltonian_part(model)


@dataclass(frozen=True)
class UnitalityReport:
    unital: bool
    commutator_residual: float
    identity_residual: float


def unitality_check(model: LindbladModel, tol: float = UNITALITY_TOL) -> UnitalityReport:
    """Check ``sum_a gamma_a [L_a, L_a^+] = 0`` and ``L0(1) = 0``."""
    d = model.dim
    acc = np.zeros((d, d), dtype=complex)
    for op, rate in model.lindblads:
        acc += rate * comm(op, dag(op))
    comm_res = spectral_norm(acc)
    ident_res = float(np.linalg.norm(dissipative_part(model) @ vec(np.eye(d))))
    return UnitalityReport(comm_res <= tol and ident_res <= tol, comm_res, ident_res)


def first_variation_dissipator(model: LindbladModel, deltas: Sequence) -> np.ndarray:
    """First-order change of the dissipator under ``L_a -> L_a + delta_a``.

    Returns the vectorized
    ``sum_a gamma_a (dL X L^+ - 1/2 (dL^+ L + L^+ dL) X + h.c.)``,
    where the hermitian conjugate acts on the image, i.e. the three terms are
    mirrored as ``L X dL^+ - 1/2 X (L^+ dL + dL^+ L)``.
    """
    _check_deltas(model, deltas)
    n = model.dim * model.dim
    out = np.zeros((n, n), dtype=complex)
    for (op, rate), delta in zip(model.lindblads, deltas):
        delta = as_operator(delta, model.dim)
        anti = dag(delta) @ op + dag(op) @ delta
        term = (
            sandwich(delta, dag(op))
            + sandwich(op, dag(delta))
            - 0.5 * left_mul(anti)
            - 0.5 * right_mul(anti)
        )
        out += rate * term
    return out


def perturbed_lindbladian(model: LindbladModel, deltas: Sequence, T: float) -> np.ndarray:
    """Dissipative generator with every ``L_a`` shifted to ``L_a + delta_a / T``.

    The result equals ``L0 + L1 / T + L2 / T**2`` exactly; the quadratic
    term comes from the substitution and is never formed on its own.
    """
    if not T > 0:
        raise ConfigError("T must be positive")
    shifted = model.without_hamiltonian().shifted(deltas, 1.0 / T)
    return dissipative_part(shifted)


def perturbed_collective_lindbladian(model: LindbladModel, X: Sequence, T: float) -> np.ndarray:
    """Collective-noise generator with ``S^mu -> S^mu + X^mu / T``."""
    return perturbed_lindbladian(model, X, T)


def trace_functional_residual(generator: np.ndarray) -> float:
    """``|| vec(1)^+ L ||``; zero for trace-preserving generators."""
    d = int(round(np.sqrt(generator.shape[0])))
    return float(np.linalg.norm(vec(np.eye(d)).conj() @ generator))
