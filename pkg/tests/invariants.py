"""Structural invariants shared by the property suite and the acceptance run."""

import numpy as np

from dissproj.liouville import LindbladModel, dissipator, trace_functional_residual
from dissproj.models import ZOO, get_model
from dissproj.steady import zero_group_projector
from dissproj.tensor import expm, spectral_norm, unvec, vec

DIMS = (2, 4, 8)
N_RANDOM = 50
TIMES = (0.1, 1.0, 10.0)


def random_model(seed: int) -> LindbladModel:
    rng = np.random.default_rng(seed)
    d = DIMS[seed % len(DIMS)]
    n_ops = 1 + seed % 3
    hermitian = seed % 5 == 0
    ops = []
    for _ in range(n_ops):
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        ops.append((a + a.conj().T) / 2 if hermitian else a)
    ops = [op / spectral_norm(op) for op in ops]
    h = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return LindbladModel.from_operators(ops, rng.uniform(0.2, 2.0, n_ops), hamiltonian=(h + h.conj().T) / 4)


def all_models():
    out = [(f"zoo:{name}", get_model(name).model) for name in ZOO]
    out += [(f"random:{s}", random_model(s)) for s in range(N_RANDOM)]
    return out


def check_invariants(model: LindbladModel, seed: int = 0) -> dict:
    """Measured residuals of every structural invariant; see ``TOLERANCES``."""
    l0 = dissipator(model)
    d = model.dim
    nl = max(1.0, spectral_norm(l0))
    sd = zero_group_projector(l0)
    p0, s = sd.p0, sd.s
    eye = np.eye(d * d)
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=d) + 1j * rng.normal(size=d)
    rho = np.outer(psi, psi.conj()) / np.vdot(psi, psi).real
    dm = 0.0
    for t in TIMES:
        out = unvec(expm(t * l0) @ vec(rho))
        herm = 0.5 * (out + out.conj().T)
        dm = max(
            dm,
            abs(np.trace(out) - 1),
            float(np.max(np.abs(out - out.conj().T))),
            max(0.0, -float(np.min(np.linalg.eigvalsh(herm)))),
        )
    return {
        "trace_preservation": trace_functional_residual(l0) / nl,
        "p0_idempotent": spectral_norm(p0 @ p0 - p0),
        "p0_commutes": max(spectral_norm(l0 @ p0), spectral_norm(p0 @ l0)) / nl,
        "resolvent": max(spectral_norm(s @ l0 - (eye - p0)), spectral_norm(l0 @ s - (eye - p0))),
        "density_matrix": dm,
    }


TOLERANCES = {
    "trace_preservation": 1e-11,
    "p0_idempotent": 1e-9,
    "p0_commutes": 1e-9,
    "resolvent": 1e-8,
    "density_matrix": 1e-8,
}


def failures(residuals: dict) -> list:
    return [k for k, v in residuals.items() if not v <= TOLERANCES[k]]
