"""Model zoo: the concrete open systems used by the experiments.

Qubit sites are numbered from 1 and site 1 is the leftmost tensor factor.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from dissproj.exceptions import ConfigError
from dissproj.liouville import LindbladModel, dissipator, unitality_check
from dissproj.tensor import (
    PAULIS,
    SIGMA_MINUS,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    as_operator,
    dag,
    kron,
    partial_trace,
    unvec,
)
from dissproj.steady import algebra_closure, zero_group_projector

MAX_QUBITS = 6


def site_op(op: np.ndarray, site: int, n: int) -> np.ndarray:
    """Embed a single-qubit operator at ``site`` (1-based) of an n-qubit register."""
    if not 1 <= site <= n:
        raise ConfigError(f"site {site} out of range for {n} qubits")
    factors = [np.eye(2)] * n
    factors[site - 1] = op
    return kron(*factors)


def pauli(axis: str, site: int, n: int) -> np.ndarray:
    return site_op(PAULIS[axis], site, n)


def spin_dot(i: int, j: int, n: int) -> np.ndarray:
    """``sigma_i . sigma_j``."""
    return sum(pauli(a, i, n) @ pauli(a, j, n) for a in "xyz")


def collective_lindblads(n: int) -> list:
    """Collective spin operators ``S^mu = sum_j sigma_j^mu`` for mu = x, y, z."""
    if not 1 <= n <= MAX_QUBITS:
        raise ConfigError(f"qubit count must be in [1, {MAX_QUBITS}], got {n}")
    return [sum(pauli(a, j, n) for j in range(1, n + 1)) for a in "xyz"]


def permutation_operator(perm: Sequence[int], n: int) -> np.ndarray:
    """Unitary moving the qubit at site ``k`` to site ``perm[k-1]`` (1-based)."""
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(1, n + 1)):
        raise ConfigError(f"{perm} is not a permutation of 1..{n}")
    dim = 2**n
    u = np.zeros((dim, dim))
    for bits in itertools.product((0, 1), repeat=n):
        out = [0] * n
        for k, b in enumerate(bits):
            out[perm[k] - 1] = b
        u[int("".join(map(str, out)), 2), int("".join(map(str, bits)), 2)] = 1.0
    return u.astype(complex)


def swap(i: int, j: int, n: int) -> np.ndarray:
    """Swap of sites i and j built from Pauli operators, ``(1 + sigma_i . sigma_j) / 2``."""
    return 0.5 * (np.eye(2**n) + spin_dot(i, j, n))


def right_shift(n: int = 4) -> np.ndarray:
    """Cyclic right shift of sites, ``|a b c d> -> |d a b c>`` for n = 4."""
    return permutation_operator([(k % n) + 1 for k in range(1, n + 1)], n)


def cross_product_hamiltonian() -> np.ndarray:
    """``[(s1 + s2) x s3] . s4 + [s2 x (s3 + s4)] . s1`` on four qubits."""
    n = 4
    eps = {("x", "y", "z"): 1, ("y", "z", "x"): 1, ("z", "x", "y"): 1,
           ("x", "z", "y"): -1, ("z", "y", "x"): -1, ("y", "x", "z"): -1}
    out = np.zeros((16, 16), dtype=complex)
    for (a, b, c), sign in eps.items():
        out += sign * (pauli(a, 1, n) + pauli(a, 2, n)) @ pauli(b, 3, n) @ pauli(c, 4, n)
        out += sign * pauli(a, 2, n) @ (pauli(b, 3, n) + pauli(b, 4, n)) @ pauli(c, 1, n)
    return out


def im_part(x: np.ndarray) -> np.ndarray:
    """Hermitian ``(X - X^+) / 2i``."""
    return (x - dag(x)) / 2j


def dephasing_model(gamma: float = 1.0) -> LindbladModel:
    return LindbladModel.from_operators([SIGMA_Z], [gamma])


def amplitude_damping_model(gamma: float = 1.0) -> LindbladModel:
    """Single-qubit decay ``L = |0><1|`` with steady state ``|0><0|``."""
    lower = np.array([[0, 1], [0, 0]], dtype=complex)
    return LindbladModel.from_operators([lower], [gamma])


@dataclass
class ModelSpec:
    """A named model with its controls, perturbations and known facts.

    ``perturbations`` maps names either to a single operator (a Hamiltonian
    perturbation) or to a list of operators, one per Lindblad operator
    (a shift ``L_a -> L_a + delta_a / T``). ``deltas`` names the default
    dissipative perturbation, if any.
    """

    name: str
    model: LindbladModel
    controls: dict = field(default_factory=dict)
    perturbations: dict = field(default_factory=dict)
    deltas: Optional[str] = None
    expected: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    description: str = ""

    def __post_init__(self):
        for name, op in self.controls.items():
            self.controls[name] = as_operator(op, self.dim)
        for name, p in self.perturbations.items():
            if isinstance(p, (list, tuple)):
                if len(p) != len(self.model.lindblads):
                    raise ConfigError(f"perturbation {name!r} has wrong length")
                self.perturbations[name] = [as_operator(o, self.dim) for o in p]
            else:
                self.perturbations[name] = as_operator(p, self.dim)
        if self.deltas is not None and self.deltas not in self.perturbations:
            raise ConfigError(f"default deltas {self.deltas!r} not among perturbations")

    @property
    def dim(self) -> int:
        return self.model.dim

    @property
    def delta_list(self) -> Optional[list]:
        return None if self.deltas is None else self.perturbations[self.deltas]

    def generator(self) -> np.ndarray:
        return dissipator(self.model)


def fig1_model(gamma: Sequence[float] = (1.0, 1.0, 1.0), g: float = 1.0, theta: float = 1.0) -> ModelSpec:
    """Four qubits under collective decoherence with the encoded-qubit controls.

    Controls ``Hx`` and ``Hz`` project onto encoded Pauli operators of the
    two-singlet noiseless subsystem; ``X`` is the symmetry-breaking shift
    ``g (s1 . s2) S^z`` applied to every collective Lindblad operator.
    """
    n = 4
    lindblads = collective_lindblads(n)
    zz12 = pauli("z", 1, n) @ pauli("z", 2, n)
    zz23 = pauli("z", 2, n) @ pauli("z", 3, n)
    hx = 1.5 * (zz12 + zz23) + np.eye(16)
    hz = -(np.sqrt(3) / 2) * (zz12 - zz23) + pauli("z", 1, n)
    x = g * spin_dot(1, 2, n) @ lindblads[2]
    fields = sum(pauli(a, j, n) * (0.1 * (j + 1) + 0.05 * k) for k, a in enumerate("xyz") for j in range(1, 5))
    return ModelSpec(
        name="fig1",
        model=LindbladModel.from_operators(lindblads, list(gamma)),
        controls={"Hx": hx, "Hz": hz},
        perturbations={
            "X": [x, x, x],
            "single_site_fields": fields,
            "Sz": lindblads[2],
            "Hz": hz,
        },
        deltas="X",
        expected={
            "kernel_rank": 14,
            "unital": True,
            "blocks": [[2, 1], [3, 3], [1, 5]],
            "codimension": 11,
        },
        params={"gamma": list(gamma), "g": g, "theta": theta},
        description="N=4 collective decoherence with encoded-qubit controls",
    )


def two_qubit_emergent() -> ModelSpec:
    """``L = 1 (x) sigma^z`` perturbed by ``dL = sigma^- (x) sigma^z``."""
    l_op = kron(np.eye(2), SIGMA_Z)
    dl = kron(SIGMA_MINUS, SIGMA_Z)
    return ModelSpec(
        name="two_qubit_emergent",
        model=LindbladModel.from_operators([l_op]),
        perturbations={"dL": [dl], "zero": [np.zeros((4, 4))]},
        deltas="dL",
        expected={
            "kernel_rank": 8,
            "unital": True,
            "A": kron(SIGMA_Y, np.eye(2)),
            "A_spectrum": [-1.0, -1.0, 1.0, 1.0],
            "limit_phases": [-2.0, 0.0, 2.0],
        },
        description="two-qubit emergent unitarity",
    )


def four_qubit_emergent() -> ModelSpec:
    """Collective decoherence perturbed by ``dL_a = U L_a`` with U the right shift."""
    n = 4
    lindblads = collective_lindblads(n)
    u = right_shift(n)
    return ModelSpec(
        name="four_qubit_emergent",
        model=LindbladModel.from_operators(lindblads),
        perturbations={"UL": [u @ op for op in lindblads]},
        deltas="UL",
        expected={
            "kernel_rank": 14,
            "unital": True,
            "A": 8 * im_part(dag(u)),
            "A_spectrum": [-8.0, 0.0, 8.0],
            "limit_phases": [-16.0, -8.0, 0.0, 8.0, 16.0],
        },
        description="four-qubit emergent unitarity from permuted collective noise",
    )


def example0_model(dim_s: int = 2, bath_model: Optional[LindbladModel] = None) -> ModelSpec:
    """System ``S`` untouched, bath ``B`` with a unique steady state.

    The joint generator is ``1_S (x) L_B``, built by lifting the bath
    Lindblad operators and Hamiltonian to ``1_S (x) X_B``.
    """
    if bath_model is None:
        bath_model = amplitude_damping_model()
    bath_sd = zero_group_projector(dissipator(bath_model))
    if bath_sd.kernel_rank != 1:
        raise ConfigError(f"bath must have a unique steady state, kernel rank {bath_sd.kernel_rank}")
    rho_b = unvec(bath_sd.split.range_basis[:, 0])
    rho_b = rho_b / np.trace(rho_b)
    eye = np.eye(dim_s)
    # nearest-neighbour hopping on the system; sigma^x for a qubit
    hop = np.eye(dim_s, k=1) + np.eye(dim_s, k=-1)
    lifted = LindbladModel(
        dim=dim_s * bath_model.dim,
        lindblads=tuple((kron(eye, op), rate) for op, rate in bath_model.lindblads),
        hamiltonian=None if bath_model.hamiltonian is None else kron(eye, bath_model.hamiltonian),
    )
    return ModelSpec(
        name="example0",
        model=lifted,
        controls={"K": kron(hop, SIGMA_Z)},
        expected={"kernel_rank": dim_s**2, "rho_B": rho_b, "dims": [dim_s, bath_model.dim]},
        description="system plus dissipative bath with unique steady state",
    )


def example0_projection(x: np.ndarray, rho_b: np.ndarray, dims: Sequence[int]) -> np.ndarray:
    """``Tr_B(X) (x) rho_B``."""
    return kron(partial_trace(x, dims, [0]), rho_b)


def dephasing_spec() -> ModelSpec:
    return ModelSpec(
        name="dephasing",
        model=dephasing_model(),
        controls={"Hx": SIGMA_X},
        expected={"kernel_rank": 2, "unital": True, "gap": 2.0},
        description="single-qubit dephasing",
    )


ZOO: dict[str, Callable[[], ModelSpec]] = {
    "fig1": fig1_model,
    "two_qubit_emergent": two_qubit_emergent,
    "four_qubit_emergent": four_qubit_emergent,
    "example0": example0_model,
    "dephasing": dephasing_spec,
}


def get_model(name: str) -> ModelSpec:
    try:
        return ZOO[name]()
    except KeyError:
        raise ConfigError(f"unknown model {name!r}; known: {sorted(ZOO)}") from None


def verify_expected(spec: ModelSpec, tol: float = 1e-8) -> dict:
    """Re-derive the recorded facts of ``spec``; returns ``{fact: (ok, measured)}``."""
    from dissproj.kato import emergent_hamiltonian_formula

    exp = spec.expected
    out = {}
    sd = zero_group_projector(dissipator(spec.model.without_hamiltonian()))
    if "kernel_rank" in exp:
        out["kernel_rank"] = (sd.kernel_rank == exp["kernel_rank"], sd.kernel_rank)
    if "gap" in exp:
        out["gap"] = (abs(sd.gap - exp["gap"]) <= tol * max(1, exp["gap"]), sd.gap)
    if "unital" in exp:
        u = unitality_check(spec.model).unital
        out["unital"] = (u == exp["unital"], u)
    if "blocks" in exp or "codimension" in exp:
        alg = algebra_closure(spec.model.operators)
        blocks = sorted(map(list, alg.blocks))
        if "blocks" in exp:
            out["blocks"] = (blocks == sorted(exp["blocks"]), blocks)
        if "codimension" in exp:
            out["codimension"] = (alg.codimension == exp["codimension"], alg.codimension)
    if "A" in exp and spec.delta_list is not None:
        a = emergent_hamiltonian_formula(spec.model, spec.delta_list, sd)
        err = float(np.max(np.abs(a - exp["A"])))
        out["A"] = (err <= tol, err)
        spectrum = np.linalg.eigvalsh(a)
        if "A_spectrum" in exp:
            distinct = np.unique(np.round(spectrum, 6))
            want = np.unique(np.round(exp["A_spectrum"], 6))
            ok = distinct.shape == want.shape and np.allclose(distinct, want, atol=tol)
            out["A_spectrum"] = (bool(ok), distinct.tolist())
    return out
