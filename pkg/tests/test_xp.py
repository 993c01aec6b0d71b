import json

import numpy as np
import pytest

from dissproj.exceptions import ConfigError
from dissproj.liouville import hamiltonian_superop
from dissproj.models import fig1_model, four_qubit_emergent, get_model
from dissproj.tensor import SIGMA_X, SIGMA_Z, kron
from dissproj.xp.config import (
    matrix_from_json,
    matrix_to_json,
    model_from_dict,
    model_to_dict,
    parse_config,
)
from dissproj.xp.experiments import (
    coherence_trace,
    kasa_circle_fit,
    loglog_fit,
    robustness_report,
    scaling_sweep,
    spectrum_sweep,
    trace_series,
)
from dissproj.xp.io import csv_text


def cfg(**raw):
    return parse_config(raw)


DEPHASING_ZERO_CONTROL = {
    "name": "dephased",
    "lindblads": [{"op": matrix_to_json(SIGMA_Z), "rate": 1.0}],
    "controls": {"zero": matrix_to_json(np.zeros((2, 2)))},
}


def test_matrix_json_round_trip():
    m = np.array([[1, 2j], [-0.5, 3 - 1j]])
    assert np.array_equal(matrix_from_json(matrix_to_json(m)), m)
    with pytest.raises(ConfigError):
        matrix_from_json([[1, 2], [3, 4]])


@pytest.mark.parametrize("name", ["fig1", "two_qubit_emergent", "four_qubit_emergent"])
def test_model_round_trip(name):
    spec = get_model(name)
    back = model_from_dict(json.loads(json.dumps(model_to_dict(spec))))
    assert np.allclose(back.generator(), spec.generator())
    assert back.deltas == spec.deltas
    for key, val in spec.controls.items():
        assert np.allclose(back.controls[key], val)
    for key, val in spec.perturbations.items():
        assert np.allclose(np.asarray(back.perturbations[key]), np.asarray(val))


def test_config_validation():
    with pytest.raises(ConfigError):
        cfg(experiment="scaling", model="fig1", T_values=[100, 50])
    with pytest.raises(ConfigError):
        cfg(experiment="scaling", model="fig1", T_values=[])
    with pytest.raises(ConfigError):
        cfg(experiment="scaling", model="fig1", T_values=[-1, 2])
    with pytest.raises(ConfigError):
        cfg(experiment="scaling", model="fig1")
    with pytest.raises(ConfigError):
        cfg(experiment="warp", model="fig1")
    with pytest.raises(ConfigError):
        cfg(experiment="scaling", model="nope", T_values=[1])
    with pytest.raises(ConfigError):
        cfg(experiment="scaling", model="fig1", control="Hy", T_values=[1])
    with pytest.raises(ConfigError):
        cfg(experiment="scaling", model="fig1", T_values=[1], bogus=1)


def test_scaling_zero_control_is_exact():
    res = scaling_sweep(cfg(experiment="scaling", model=DEPHASING_ZERO_CONTROL, T_values=[10, 20, 40]))
    assert np.all(res.column("distance") == 0)
    assert res.fit is None
    assert len(res.rows) == 3


def test_scaling_columns_and_fit():
    res = scaling_sweep(cfg(experiment="scaling", model="fig1", control="Hx", T_values=[50, 100, 200, 400, 800]))
    assert res.columns == ["T", "inv_T", "distance", "fit_used"]
    assert list(res.column("fit_used")) == [0, 1, 1, 1, 1]
    assert res.fit["points_used"] == [0.01, 0.005, 0.0025, 0.00125]
    assert abs(res.fit["slope"] - 1) <= 0.1


def test_scaling_sup_grid_dominates():
    res = scaling_sweep(
        cfg(experiment="scaling", model="fig1", control="Hx", T_values=[50, 100], sup_grid=True)
    )
    assert np.all(res.column("distance_sup") >= res.column("distance"))


def test_faster_dissipation_halves_distance():
    slow = scaling_sweep(cfg(experiment="scaling", model="fig1", control="Hx", T_values=[200]))
    fast = scaling_sweep(
        cfg(experiment="scaling", model={"zoo": "fig1", "params": {"gamma": [2, 2, 2]}}, control="Hx", T_values=[200])
    )
    assert fast.extra["gap"] == pytest.approx(2 * slow.extra["gap"])
    ratio = slow.column("distance")[0] / fast.column("distance")[0]
    assert ratio == pytest.approx(2, rel=0.1)


def test_spectrum_zero_perturbation_is_fixed():
    res = spectrum_sweep(cfg(experiment="spectrum", model="two_qubit_emergent", perturbation="zero", T_values=[10, 100]))
    for eigs in res.extra["eigenvalues"].values():
        z = np.array(eigs)
        assert np.allclose(z[:, 0], 1, atol=1e-12) and np.allclose(z[:, 1], 0, atol=1e-12)
    assert np.all(res.column("n_eigenvalues") == 8)


def test_spectrum_contractive():
    res = spectrum_sweep(cfg(experiment="spectrum", model="two_qubit_emergent", T_values=[5, 50, 500]))
    assert np.all(res.column("max_modulus") <= 1 + 1e-9)
    d = res.column("max_phase_distance")
    assert d[-1] < d[0]


def test_trace_pure_hamiltonian_circle():
    h = kron(SIGMA_X, np.eye(2)) + 0.5 * kron(SIGMA_Z, SIGMA_Z)
    gen = hamiltonian_superop(h)
    psi = np.ones(4) / 2
    rho = np.outer(psi, psi)
    energies, u = np.linalg.eigh(h)
    z = trace_series(gen, rho, np.linspace(0, 9, 300), (0, 3), u)
    _, radius, dev = kasa_circle_fit(z)
    assert radius > 0
    assert dev <= 1e-9


def test_trace_two_qubit_window():
    res = coherence_trace(cfg(experiment="trace", model="two_qubit_emergent", T=100, n_points=200, seed=1))
    assert res.extra["window"] == [1.0, 1000.0]
    assert res.extra["max_radial_deviation"] <= 0.05
    assert len(res.rows) == 200


def test_trace_full_generator_decays():
    res = coherence_trace(
        cfg(experiment="trace", model="two_qubit_emergent", T=100, n_points=200, seed=1, generator="full")
    )
    # the 1/T^2 term adds slow damping on top of the rotation
    assert res.extra["max_radial_deviation"] > 0.05


def test_trace_four_qubit_window():
    res = coherence_trace(
        cfg(experiment="trace", model="four_qubit_emergent", T=100, window=[50, 400], n_points=150)
    )
    assert res.extra["max_radial_deviation"] <= 0.05


def test_trace_rejects_state_outside_steady_set():
    bad = np.zeros((4, 4))
    bad[0, 1] = bad[1, 0] = 0.5
    bad[0, 0] = bad[1, 1] = 0.5
    with pytest.raises(ConfigError, match="steady-state set"):
        coherence_trace(cfg(experiment="trace", model="two_qubit_emergent", initial_state=matrix_to_json(bad)))


def test_robustness_classification():
    res = robustness_report(
        cfg(experiment="robustness", model="fig1", control="Hx", candidates=["single_site_fields", "Hz", "X"])
    )
    rows = {r[0]: dict(zip(res.columns, r)) for r in res.rows}
    assert rows["single_site_fields"]["kind"] == "hamiltonian"
    assert rows["single_site_fields"]["robust"] == 1
    assert rows["Hz"]["robust"] == 0
    assert rows["Hz"]["effective_difference"] > 0.1
    assert rows["X"]["kind"] == "dissipative"
    assert rows["X"]["robust"] == 1
    assert rows["X"]["projected_norm"] <= 1e-10
    assert res.extra["codimension"] == 11


def test_loglog_fit():
    fit = loglog_fit([1, 2, 4], [3, 1.5, 0.75], "x", "y")
    assert fit["slope"] == pytest.approx(-1)
    assert fit["intercept"] == pytest.approx(np.log(3))
    assert loglog_fit([1, 2], [0, 1], "x", "y") is None


def test_csv_format():
    res = scaling_sweep(cfg(experiment="scaling", model=DEPHASING_ZERO_CONTROL, T_values=[0.1]))
    text = csv_text(res)
    assert text == "T,inv_T,distance,fit_used\r\n0.1,10.0,0.0,1\r\n"


def test_modelspec_expected_serializes():
    d = model_to_dict(four_qubit_emergent())
    assert d["expected"]["A_spectrum"] == [-8.0, 0.0, 8.0]
    json.dumps(model_to_dict(fig1_model()))
