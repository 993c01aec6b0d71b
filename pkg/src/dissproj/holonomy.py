"""Geometric form of the projected dynamics in the rotating frame.

In the frame co-moving with the control ``K``, the steady-state projector
becomes ``P_t = exp(-t K) P0 exp(t K)`` and the projected evolution is the
time-ordered product of these projectors (a superoperator holonomy).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from dissproj.liouville import hamiltonian_superop
from dissproj.tensor import expm, spectral_norm


@dataclass(frozen=True)
class HolonomyRun:
    t: float
    n: int
    product_value: np.ndarray
    closed_form: np.ndarray
    deviation: float


def _generator(k) -> np.ndarray:
    return hamiltonian_superop(k)


def instantaneous_projector(k: np.ndarray, p0: np.ndarray, t: float) -> np.ndarray:
    """Steady-state projector of the rotated generator at time ``t``."""
    gen = _generator(k)
    return expm(-t * gen) @ p0 @ expm(t * gen)


def projector_derivative(k: np.ndarray, p0: np.ndarray, t: float) -> np.ndarray:
    """Exact ``dP_t/dt = [-K, P_t]``."""
    gen = _generator(k)
    pt = expm(-t * gen) @ p0 @ expm(t * gen)
    return pt @ gen - gen @ pt


def holonomy_closed_form(k: np.ndarray, p0: np.ndarray, t: float) -> np.ndarray:
    """``exp(-t K) exp(t P0 K P0) P0``."""
    gen = _generator(k)
    return expm(-t * gen) @ expm(t * (p0 @ gen @ p0)) @ p0


def projection_product(k: np.ndarray, p0: np.ndarray, times: Sequence[float]) -> np.ndarray:
    """Projection string over an arbitrary nondecreasing grid starting at 0.

    Computes ``exp(-t_n K) (exp(d_n K) P0) ... (exp(d_1 K) P0)`` with
    ``d_j = t_j - t_{j-1}``; on a uniform grid this is ``projection_string``.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 1 or times[0] != 0 or np.any(np.diff(times) < 0):
        raise ValueError("times must be a nondecreasing grid starting at 0")
    gen = _generator(k)
    out = p0.copy()
    for step in np.diff(times):
        out = expm(step * gen) @ p0 @ out
    return expm(-times[-1] * gen) @ out


def projection_string(k: np.ndarray, p0: np.ndarray, t: float, n: int) -> np.ndarray:
    """``exp(-t K) (exp(t K / n) P0)^n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    gen = _generator(k)
    step = expm((t / n) * gen) @ p0
    return expm(-t * gen) @ np.linalg.matrix_power(step, n)


def holonomy_run(k: np.ndarray, p0: np.ndarray, t: float, n: int) -> HolonomyRun:
    prod = projection_string(k, p0, t, n)
    closed = holonomy_closed_form(k, p0, t)
    return HolonomyRun(t, n, prod, closed, spectral_norm(prod - closed))
