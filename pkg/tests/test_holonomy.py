import numpy as np
import pytest

from dissproj.holonomy import (
    holonomy_closed_form,
    holonomy_run,
    instantaneous_projector,
    projection_product,
    projection_string,
    projector_derivative,
)
from dissproj.liouville import LindbladModel, dissipator
from dissproj.models import collective_lindblads, fig1_model
from dissproj.steady import zero_group_projector
from dissproj.tensor import SIGMA_X, SIGMA_Z, kron, spectral_norm


@pytest.fixture(scope="module")
def fig1():
    spec = fig1_model()
    return spec, zero_group_projector(dissipator(spec.model)).p0


@pytest.fixture(scope="module")
def small():
    # two qubits, the second one dephased: modest norms for derivative checks
    model = LindbladModel.from_operators([kron(np.eye(2), SIGMA_Z)])
    p0 = zero_group_projector(dissipator(model)).p0
    k = 0.6 * kron(SIGMA_X, SIGMA_X) + 0.3 * kron(SIGMA_Z, np.eye(2))
    return k, p0


def test_trivial_cases(fig1):
    spec, p0 = fig1
    zero = np.zeros((16, 16))
    for n in (1, 5):
        assert np.allclose(projection_string(zero, p0, 1.0, n), p0)
    k = spec.controls["Hx"]
    assert np.allclose(projection_string(k, p0, 0.7, 1), p0, atol=1e-12)
    assert np.allclose(holonomy_closed_form(k, p0, 0.0), p0)
    assert np.allclose(instantaneous_projector(k, p0, 0.0), p0)


def test_commuting_control(fig1):
    _, p0 = fig1
    # collective S^z lies in the algebra, so its superoperator commutes with P0
    k = collective_lindblads(4)[2]
    assert np.allclose(holonomy_closed_form(k, p0, 0.9), p0, atol=1e-12)


def test_convergence_rate(fig1):
    spec, p0 = fig1
    ns = [8, 16, 32, 64, 128, 256, 512]
    dev = [holonomy_run(spec.controls["Hx"], p0, 1.0, n).deviation for n in ns]
    slope = np.polyfit(np.log(ns), np.log(dev), 1)[0]
    assert abs(slope + 1) <= 0.1
    c = max(n * d for n, d in zip(ns, dev))
    assert all(d <= c / n for n, d in zip(ns, dev))


def test_instantaneous_projector_idempotent(fig1):
    spec, p0 = fig1
    pt = instantaneous_projector(spec.controls["Hz"], p0, 0.8)
    assert spectral_norm(pt @ pt - pt) <= 1e-10


def test_ppp_vanishes_finite_difference(small):
    k, p0 = small
    t, h = 0.4, 1e-5
    pt = instantaneous_projector(k, p0, t)
    fd = (instantaneous_projector(k, p0, t + h) - instantaneous_projector(k, p0, t - h)) / (2 * h)
    assert spectral_norm(fd - projector_derivative(k, p0, t)) <= 1e-8
    assert spectral_norm(pt @ fd @ pt) <= 1e-7


def test_closed_form_solves_transport_equation(small):
    k, p0 = small
    t, h = 0.7, 1e-4
    x = holonomy_closed_form(k, p0, t)
    dx = (holonomy_closed_form(k, p0, t + h) - holonomy_closed_form(k, p0, t - h)) / (2 * h)
    pt = instantaneous_projector(k, p0, t)
    dp = projector_derivative(k, p0, t)
    assert spectral_norm(dx - (dp @ pt - pt @ dp) @ x) <= 1e-6


def test_reparametrization_invariance(fig1):
    spec, p0 = fig1
    k = spec.controls["Hx"]
    closed = holonomy_closed_form(k, p0, 1.0)
    devs = []
    for n in (64, 256):
        grid = np.linspace(0.0, 1.0, n + 1) ** 2
        devs.append(spectral_norm(projection_product(k, p0, grid) - closed))
    # the tau^2 grid converges to the same limit, at the O(1/n) rate
    assert devs[1] < devs[0] / 3
    assert devs[1] * 256 < 20


def test_uniform_product_matches_string(fig1):
    spec, p0 = fig1
    k = spec.controls["Hz"]
    grid = np.linspace(0.0, 0.5, 11)
    assert np.allclose(projection_product(k, p0, grid), projection_string(k, p0, 0.5, 10), atol=1e-10)


def test_identity_shift_is_gauge(fig1):
    spec, p0 = fig1
    k = spec.controls["Hz"]
    shifted = k + 2.5 * np.eye(16)
    for f in (
        lambda q: projection_string(q, p0, 0.6, 12),
        lambda q: holonomy_closed_form(q, p0, 0.6),
        lambda q: instantaneous_projector(q, p0, 0.6),
    ):
        assert np.allclose(f(k), f(shifted), atol=1e-10)


def test_bad_inputs(fig1):
    spec, p0 = fig1
    with pytest.raises(ValueError):
        projection_string(spec.controls["Hx"], p0, 1.0, 0)
    with pytest.raises(ValueError):
        projection_product(spec.controls["Hx"], p0, [0.1, 0.5])
