import logging
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dissproj.exceptions import IllSeparatedSpectrum, NotDissipative, NumericalError
from dissproj.liouville import LindbladModel, dissipator, hamiltonian_superop
from dissproj.models import collective_lindblads, pauli
from dissproj.steady import (
    algebra_closure,
    close_under_adjoint,
    commutant_projector,
    hamiltonian_robustness_check,
    unital_consistency,
    zero_group_projector,
)
from dissproj.tensor import SIGMA_MINUS, SIGMA_PLUS, SIGMA_Z, expm, kron, spectral_norm, unvec, vec


def rand_c(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def collective_model(n=4):
    return LindbladModel.from_operators(collective_lindblads(n))


def spin_half_blocks(n):
    """Angular-momentum addition for n spin-1/2: (multiplicity, 2j+1) per total spin j."""
    out = []
    for k in range(n // 2 + 1):
        mult = comb(n, k) - (comb(n, k - 1) if k else 0)
        out.append((mult, n - 2 * k + 1))
    return sorted(out, key=lambda b: (b[1], b[0]))


def assert_decomposition_identities(sd, l0):
    p0, s = sd.p0, sd.s
    eye = np.eye(p0.shape[0])
    nl = max(1.0, spectral_norm(l0))
    assert spectral_norm(p0 @ p0 - p0) <= 1e-9
    assert spectral_norm(l0 @ p0) <= 1e-9 * nl
    assert spectral_norm(p0 @ l0) <= 1e-9 * nl
    assert spectral_norm(s @ l0 - (eye - p0)) <= 1e-8
    assert spectral_norm(l0 @ s - (eye - p0)) <= 1e-8
    assert spectral_norm(s @ p0) <= 1e-9
    assert spectral_norm(p0 @ s) <= 1e-9


def test_dephasing_decomposition():
    l0 = dissipator(LindbladModel.from_operators([SIGMA_Z]))
    sd = zero_group_projector(l0)
    # 4x4 diagonalization oracle: eigenvalues 0, 0, -2, -2
    w = np.sort(np.linalg.eigvals(l0).real)
    assert np.allclose(w, [-2, -2, 0, 0])
    assert sd.kernel_rank == 2
    assert sd.gap == pytest.approx(2.0)
    assert sd.relaxation_time == pytest.approx(0.5)
    assert_decomposition_identities(sd, l0)


def test_collective_decomposition():
    l0 = dissipator(collective_model())
    sd = zero_group_projector(l0)
    assert sd.kernel_rank == 14
    assert_decomposition_identities(sd, l0)
    assert np.allclose(sd.p0, expm((60 / sd.gap) * l0), atol=1e-7)


def test_amplitude_damping_oblique():
    lower = np.array([[0, 1], [0, 0]], dtype=complex)
    l0 = dissipator(LindbladModel.from_operators([lower]))
    sd = zero_group_projector(l0)
    assert sd.kernel_rank == 1
    x = np.array([[0.3, 1 + 2j], [0.5j, 0.7]])
    assert np.allclose(unvec(sd.p0 @ vec(x)), np.trace(x) * np.diag([1, 0]), atol=1e-12)
    assert spectral_norm(sd.p0 - sd.p0.conj().T) > 0.1
    assert_decomposition_identities(sd, l0)


def test_not_dissipative():
    with pytest.raises(NotDissipative, match="not a dissipative generator"):
        zero_group_projector(np.diag([0.0, 1.0, -1.0]))


def test_ill_separated():
    with pytest.raises(IllSeparatedSpectrum):
        zero_group_projector(np.diag([0.0, -5e-9, -1.0]), tol=1e-9)


def test_zero_gap_is_error():
    # pure Hamiltonian: eigenvalues on the imaginary axis
    with pytest.raises(NumericalError, match="gap"):
        zero_group_projector(hamiltonian_superop(SIGMA_Z))


def test_commutant_examples():
    assert np.allclose(commutant_projector([np.eye(2)]), np.eye(4))
    g = kron(np.eye(2), SIGMA_Z)
    p = commutant_projector([g])
    assert round(np.trace(p).real) == 8
    # brute-force oracle: the nullspace of X -> [X, g] over the 16 matrix units
    units = [np.eye(1, 16, k).reshape(4, 4) for k in range(16)]
    ad = np.column_stack([vec(u @ g - g @ u) for u in units])
    assert 16 - np.linalg.matrix_rank(ad) == 8
    ket0, ket1 = np.diag([1.0, 0]), np.diag([0, 1.0])
    rng = np.random.default_rng(0)
    for proj in (ket0, ket1):
        x = kron(rand_c(rng, 2, 2), proj)
        assert np.allclose(unvec(p @ vec(x)), x)


def test_collective_kills_single_site_paulis():
    p = commutant_projector(collective_lindblads(4))
    for j in range(1, 5):
        for a in "xyz":
            assert np.max(np.abs(p @ vec(pauli(a, j, 4)))) <= 1e-10


def test_close_under_adjoint_logs(caplog):
    gens, changed = close_under_adjoint([SIGMA_MINUS])
    assert changed and len(gens) == 2
    _, changed = close_under_adjoint([SIGMA_Z])
    assert not changed
    with caplog.at_level(logging.INFO, logger="dissproj"):
        commutant_projector([SIGMA_MINUS])
    assert "adjoint" in caplog.text


def test_unital_consistency_dephasing_and_collective():
    l0 = dissipator(LindbladModel.from_operators([SIGMA_Z]))
    rep = unital_consistency(zero_group_projector(l0), [SIGMA_Z])
    assert rep.residual <= 1e-8
    gens = collective_lindblads(4)
    rep = unital_consistency(zero_group_projector(dissipator(collective_model())), gens)
    assert rep.residual <= 1e-8
    assert rep.spectral_rank == rep.commutant_rank == 14


def test_nonunital_projectors_differ():
    l0 = dissipator(LindbladModel.from_operators([SIGMA_MINUS]))
    sd = zero_group_projector(l0)
    rep = unital_consistency(sd, [SIGMA_MINUS, SIGMA_PLUS])
    assert rep.spectral_rank == rep.commutant_rank == 1
    assert rep.residual > 0.1
    # explicit oracle: sigma^- = 2|1><0| pumps into |1>
    x = np.array([[0.2, 0.1j], [0.4, 0.8]])
    assert np.allclose(unvec(sd.p0 @ vec(x)), np.trace(x) * np.diag([0, 1]), atol=1e-12)


def test_algebra_abelian():
    alg = algebra_closure([SIGMA_Z])
    assert len(alg.algebra_basis) == 2
    assert len(alg.commutant_basis) == 2
    assert len(alg.center_basis) == 2
    assert sorted(alg.blocks) == [(1, 1), (1, 1)]


def test_algebra_two_qubit_local():
    alg = algebra_closure([kron(np.eye(2), SIGMA_Z)])
    assert sorted(alg.blocks) == [(2, 1), (2, 1)]


@pytest.mark.parametrize("n", [2, 3, 4])
def test_collective_blocks_angular_momentum(n):
    alg = algebra_closure(collective_lindblads(n))
    oracle = spin_half_blocks(n)
    assert sorted(alg.blocks) == sorted(oracle)
    assert len(alg.commutant_basis) == sum(m * m for m, _ in oracle)
    assert len(alg.center_basis) == len(oracle)
    assert sum(m * d for m, d in alg.blocks) == 2**n


def test_collective_codimension():
    alg = algebra_closure(collective_lindblads(4))
    assert sorted(alg.blocks) == [(1, 5), (2, 1), (3, 3)]
    assert alg.codimension == (4 - 1) + (9 - 1) + (1 - 1) == 11
    gens = collective_lindblads(4)
    for c in alg.commutant_basis:
        for g in gens:
            assert spectral_norm(c @ g - g @ c) <= 1e-10


def test_algebra_seed_recorded():
    alg = algebra_closure([SIGMA_Z], seed=7)
    assert alg.seed == 7


def test_hamiltonian_robustness_examples():
    gens = collective_lindblads(4)
    alg = algebra_closure(gens)
    sz = gens[2]
    assert hamiltonian_robustness_check(sz, alg).robust
    fields = sum(0.3 * j * pauli(a, j, 4) for a in "xyz" for j in range(1, 5))
    res = hamiltonian_robustness_check(fields, alg)
    assert res.robust
    assert np.max(np.abs(res.projected)) <= 1e-10
    assert res.codimension == 11
    swap12 = (np.eye(16) + sum(pauli(a, 1, 4) @ pauli(a, 2, 4) for a in "xyz")) / 2
    assert not hamiltonian_robustness_check(swap12, alg).robust


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_commutant_projector_properties(seed):
    rng = np.random.default_rng(seed)
    # commutant of 1 (x) g is M_2 (x) 1 for generic g
    gens = [np.kron(np.eye(2), rand_c(rng, 3, 3))]
    p = commutant_projector(gens)
    assert np.allclose(p, p.conj().T, atol=1e-10)
    assert np.allclose(p @ p, p, atol=1e-10)
    assert np.allclose(p @ vec(np.eye(6)), vec(np.eye(6)), atol=1e-10)
    assert round(np.trace(p).real) == 4
    x = rand_c(rng, 6, 6)
    px = unvec(p @ vec(x))
    assert np.allclose(unvec(p @ vec(x.conj().T)), px.conj().T, atol=1e-10)
    for gen in gens:
        assert spectral_norm(px @ gen - gen @ px) <= 1e-9 * spectral_norm(x) * spectral_norm(gen)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_unital_projection_preserves_states(seed):
    rng = np.random.default_rng(seed)
    sd = zero_group_projector(dissipator(collective_model(3)))
    psi = rand_c(rng, 8)
    rho = np.outer(psi, psi.conj()) / np.vdot(psi, psi).real
    out = unvec(sd.p0 @ vec(rho))
    assert abs(np.trace(out) - 1) < 1e-10
    assert np.min(np.linalg.eigvalsh((out + out.conj().T) / 2)) > -1e-8
