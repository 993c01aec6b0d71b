"""Experiment drivers. Each takes an ``ExperimentConfig`` and returns a ``SweepResult``."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from dissproj.exceptions import ConfigError, NumericalError
from dissproj.holonomy import (
    holonomy_run,
    instantaneous_projector,
    projector_derivative,
)
from dissproj.kato import (
    emergent_hamiltonian_formula,
    error_bound,
    kato_terms,
    projector_derivative_fd,
)
from dissproj.liouville import (
    dissipator,
    first_variation_dissipator,
    hamiltonian_part,
    hamiltonian_superop,
    perturbed_lindbladian,
    unitality_check,
)
from dissproj.steady import (
    SteadyDecomposition,
    algebra_closure,
    hamiltonian_robustness_check,
    zero_group_projector,
)
from dissproj.tensor import dag, expm, spectral_norm, unvec, vec
from dissproj.xp.config import ExperimentConfig, matrix_from_json

log = logging.getLogger(__name__)


@dataclass
class SweepResult:
    """Table of sweep points plus an optional log-log fit.

    ``fit`` holds ``slope``, ``intercept`` and ``points_used`` of a fit of
    ``log y`` against ``log x``; its ``x`` and ``y`` entries name the columns.
    """

    experiment: str
    columns: list
    rows: list
    fit: Optional[dict] = None
    extra: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([row[i] for row in self.rows])


def loglog_fit(x: Sequence[float], y: Sequence[float], x_name: str, y_name: str) -> Optional[dict]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or np.any(y <= 0) or not np.all(np.isfinite(y)):
        return None
    slope, intercept = np.polyfit(np.log(x), np.log(y), 1)
    if not np.isfinite(slope):
        return None
    return {
        "x": x_name,
        "y": y_name,
        "slope": float(slope),
        "intercept": float(intercept),
        "points_used": [float(v) for v in x],
    }


def _steady(cfg: ExperimentConfig, l0: np.ndarray) -> SteadyDecomposition:
    return zero_group_projector(l0, cfg.tolerances.get("kernel"))


def _control(cfg: ExperimentConfig, required: bool = True) -> Optional[np.ndarray]:
    controls = cfg.model.controls
    if cfg.control is not None:
        return controls[cfg.control]
    if controls:
        name = next(iter(controls))
        log.info("no control given; using %r", name)
        return controls[name]
    if required:
        raise ConfigError(f"model {cfg.model.name!r} has no control Hamiltonian")
    return None


def _deltas(cfg: ExperimentConfig, name: Optional[str] = None):
    spec = cfg.model
    name = name or cfg.perturbation or spec.deltas
    if name is None:
        raise ConfigError(f"model {spec.name!r} has no dissipative perturbation")
    p = spec.perturbations[name]
    if not isinstance(p, list):
        raise ConfigError(f"perturbation {name!r} is a Hamiltonian, not a Lindblad shift")
    return p


def _restricted_eigenvalues(sd: SteadyDecomposition, m: np.ndarray) -> np.ndarray:
    """Eigenvalues of ``m`` compressed to the range of ``P0``."""
    split = sd.split
    return np.linalg.eigvals(split.range_dual @ m @ split.range_basis)


# ---------------------------------------------------------------- scaling


def scaling_sweep(cfg: ExperimentConfig) -> SweepResult:
    """Distance between the exact and the dissipation-projected evolution.

    For each ``T`` the generator is ``L0 + K/T`` (with ``L0`` optionally
    carrying a perturbation scaled by ``1/T``) and the reference map is
    ``exp(t P0 K P0 / T) P0``; the distance is taken at ``t = T`` and,
    with ``sup_grid``, also as the maximum over an even grid on ``[0, T]``.
    """
    spec = cfg.model
    l0 = dissipator(spec.model)
    sd = _steady(cfg, l0)
    kk = hamiltonian_superop(_control(cfg))
    p0 = sd.p0
    keff = p0 @ kk @ p0
    pert = spec.perturbations.get(cfg.perturbation) if cfg.perturbation else None
    columns = ["T", "inv_T", "distance"] + (["distance_sup"] if cfg.sup_grid else []) + ["fit_used"]
    ts = sorted(float(T) for T in cfg.T_values)
    used = set(ts[-cfg.fit_points:])
    rows = []
    for T in ts:
        if isinstance(pert, list):
            base = perturbed_lindbladian(spec.model, pert, T) + hamiltonian_part(spec.model)
        elif pert is not None:
            base = l0 + hamiltonian_superop(pert) / T
        else:
            base = l0
        gen = base + kk / T
        dist = spectral_norm((expm(T * gen) - expm(keff)) @ p0)
        row = [T, 1.0 / T, dist]
        if cfg.sup_grid:
            steps = cfg.sup_points - 1
            step = expm((T / steps) * gen)
            eff_step = expm(keff / steps)
            exact, eff = p0, p0
            best = 0.0
            for _ in range(steps):
                exact = step @ exact
                eff = eff_step @ eff
                best = max(best, spectral_norm(exact - eff))
            # t = T belongs to the grid; its directly computed value counts too
            row.append(max(best, dist))
        row.append(int(T in used))
        rows.append(row)
    res = SweepResult("scaling", columns, rows)
    fit_t = [r[0] for r in rows if r[-1]]
    fit_d = [r[2] for r in rows if r[-1]]
    res.fit = loglog_fit([1.0 / T for T in fit_t], fit_d, "inv_T", "distance")
    res.extra = {"gap": sd.gap, "kernel_rank": sd.kernel_rank, "perturbation": cfg.perturbation}
    return res


# ---------------------------------------------------------------- spectrum


def predicted_phases(a_spectrum: Sequence[float], decimals: int = 9) -> np.ndarray:
    """Distinct ``exp(-i (a_n - a_m))`` over all ordered pairs."""
    a = np.asarray(a_spectrum, dtype=float)
    diffs = np.unique(np.round((a[:, None] - a[None, :]).ravel(), decimals))
    return np.exp(-1j * diffs)


def _a_spectrum(cfg: ExperimentConfig, sd: SteadyDecomposition, deltas) -> np.ndarray:
    spec = cfg.model
    default = cfg.perturbation is None or cfg.perturbation == spec.deltas
    if default and "A_spectrum" in spec.expected:
        return np.asarray(spec.expected["A_spectrum"], dtype=float)
    return np.linalg.eigvalsh(emergent_hamiltonian_formula(spec.model, deltas, sd))


def _sorted_complex(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z)
    return z[np.lexsort((np.round(np.abs(z), 12), np.round(np.angle(z), 12)))]


def _phase_distances(eigs: np.ndarray, targets: np.ndarray) -> tuple[float, float]:
    if eigs.size == 0:
        return np.inf, np.inf
    d = np.abs(eigs[:, None] - targets[None, :])
    return float(np.max(np.min(d, axis=1))), float(np.max(np.min(d, axis=0)))


def spectrum_sweep(cfg: ExperimentConfig) -> SweepResult:
    """Eigenvalues of ``exp(T L(T)) P0`` on the steady-state set.

    ``L(T)`` is the dissipative generator with every Lindblad operator
    shifted by ``delta / T`` (the full substitution, quadratic term
    included). Eigenvalues below ``drop_modulus`` are discarded.
    """
    spec = cfg.model
    deltas = _deltas(cfg)
    sd = _steady(cfg, dissipator(spec.model))
    targets = predicted_phases(_a_spectrum(cfg, sd, deltas))
    drop = cfg.tolerances["drop_modulus"]
    columns = [
        "T", "inv_T", "n_eigenvalues", "max_modulus", "min_modulus",
        "max_phase_distance", "max_coverage_distance",
    ]
    rows, eig_dump = [], {}
    for T in sorted(float(v) for v in cfg.T_values):
        gen = perturbed_lindbladian(spec.model, deltas, T) + hamiltonian_part(spec.model)
        eigs = _restricted_eigenvalues(sd, expm(T * gen) @ sd.p0)
        eigs = _sorted_complex(eigs[np.abs(eigs) >= drop])
        dist, cover = _phase_distances(eigs, targets)
        mods = np.abs(eigs)
        rows.append([
            T, 1.0 / T, int(eigs.size),
            float(mods.max()) if eigs.size else 0.0,
            float(mods.min()) if eigs.size else 0.0,
            dist, cover,
        ])
        eig_dump[repr(T)] = [[float(z.real), float(z.imag)] for z in eigs]
    res = SweepResult("spectrum", columns, rows)
    res.extra = {
        "eigenvalues": eig_dump,
        "predicted_phases": [[float(z.real), float(z.imag)] for z in _sorted_complex(targets)],
        "kernel_rank": sd.kernel_rank,
    }
    return res


# ---------------------------------------------------------------- coherence trace


def kasa_circle_fit(z: np.ndarray) -> tuple[complex, float, float]:
    """Algebraic least-squares circle through complex points.

    Returns ``(center, radius, max_relative_radial_deviation)``.
    """
    z = np.asarray(z, dtype=complex)
    x, y = z.real, z.imag
    design = np.column_stack([x, y, np.ones_like(x)])
    c, *_ = np.linalg.lstsq(design, x**2 + y**2, rcond=None)
    center = complex(c[0] / 2, c[1] / 2)
    r2 = c[2] + center.real**2 + center.imag**2
    radius = float(np.sqrt(max(r2, 0.0)))
    if radius <= 1e-14 * max(1.0, float(np.max(np.abs(z)))):
        return center, radius, float("nan")
    dev = float(np.max(np.abs(np.abs(z - center) - radius)) / radius)
    return center, radius, dev


def trace_series(
    generator: np.ndarray,
    rho0: np.ndarray,
    times: Sequence[float],
    element: tuple[int, int],
    basis: Optional[np.ndarray] = None,
) -> np.ndarray:
    """``<n| U^+ rho(t) U |m>`` along an evenly spaced time grid.

    ``basis`` is a unitary whose columns are the reading basis (identity
    when omitted). ``times`` must be evenly spaced.
    """
    times = np.asarray(times, dtype=float)
    dts = np.diff(times)
    if dts.size and not np.allclose(dts, dts[0], rtol=1e-9, atol=0):
        raise ValueError("times must be evenly spaced")
    d = rho0.shape[0]
    u = np.eye(d) if basis is None else basis
    n, m = element
    state = expm(times[0] * generator) @ vec(rho0)
    step = expm(dts[0] * generator) if dts.size else None
    out = np.empty(times.size, dtype=complex)
    for i in range(times.size):
        if i:
            state = step @ state
        rho = unvec(state)
        out[i] = (dag(u) @ rho @ u)[n, m]
    return out


def _random_steady_state(sd: SteadyDecomposition, dim: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    psi /= np.linalg.norm(psi)
    rho = unvec(sd.p0 @ vec(np.outer(psi, psi.conj())))
    rho = 0.5 * (rho + dag(rho))
    return rho / np.trace(rho).real


def coherence_trace(cfg: ExperimentConfig) -> SweepResult:
    """Time series of one coherence of ``rho(t)`` and its circle fit.

    With ``generator="linear"`` the evolution uses ``L0 + L1 / T`` (first
    variation of the Lindblad shift); ``"full"`` uses the substituted
    generator including the ``1/T**2`` term. Models without a dissipative
    perturbation are driven by ``L0 + K / T`` instead.
    """
    spec = cfg.model
    T = float(cfg.T)
    l0 = dissipator(spec.model)
    sd = _steady(cfg, l0)
    d = spec.dim
    if spec.deltas is not None or cfg.perturbation is not None:
        deltas = _deltas(cfg)
        if cfg.generator == "linear":
            gen = l0 + first_variation_dissipator(spec.model, deltas) / T
        else:
            gen = perturbed_lindbladian(spec.model, deltas, T) + hamiltonian_part(spec.model)
        a = emergent_hamiltonian_formula(spec.model, deltas, sd)
    else:
        k = _control(cfg)
        gen = l0 + hamiltonian_superop(k) / T
        a = unvec(sd.p0 @ vec(k))
        a = 0.5 * (a + dag(a))

    if isinstance(cfg.initial_state, str):
        rho0 = _random_steady_state(sd, d, cfg.seed)
    else:
        rho0 = matrix_from_json(cfg.initial_state)
        if rho0.shape != (d, d):
            raise ConfigError(f"initial state must be {d}x{d}")
    miss = float(np.linalg.norm(sd.p0 @ vec(rho0) - vec(rho0)))
    if miss > cfg.tolerances["steady_membership"]:
        raise ConfigError(f"initial state is not in the steady-state set (||P0 rho - rho|| = {miss:.3e})")

    if cfg.basis == "heff":
        energies, u = np.linalg.eigh(a)
    else:
        energies, u = np.zeros(d), np.eye(d)
    if cfg.element is not None:
        n, m = cfg.element
        if max(n, m) >= d:
            raise ConfigError(f"element {cfg.element} out of range for dimension {d}")
    else:
        r = np.abs(dag(u) @ rho0 @ u)
        if cfg.basis == "heff":
            r[np.abs(energies[:, None] - energies[None, :]) <= 1e-9] = -1.0
        else:
            np.fill_diagonal(r, -1.0)
        n, m = (int(i) for i in np.unravel_index(np.argmax(r), r.shape))

    window = cfg.window or (T / 100, 10 * T)
    times = np.linspace(window[0], window[1], cfg.n_points)
    z = trace_series(gen, rho0, times, (n, m), u)
    center, radius, dev = kasa_circle_fit(z)
    rows = [[float(t), float(v.real), float(v.imag), float(abs(v - center))] for t, v in zip(times, z)]
    res = SweepResult("trace", ["t", "re", "im", "distance_to_center"], rows)
    res.extra = {
        "element": [n, m],
        "basis": cfg.basis,
        "generator": cfg.generator,
        "T": T,
        "window": [float(window[0]), float(window[1])],
        "center": [center.real, center.imag],
        "radius": radius,
        "max_radial_deviation": dev,
    }
    return res


# ---------------------------------------------------------------- robustness


def robustness_report(cfg: ExperimentConfig) -> SweepResult:
    """Classify perturbations as harmless or harmful to the projected dynamics.

    Hamiltonian perturbations ``V`` are tested for ``P0(V)`` lying in the
    center of the interaction algebra (unital models) or for ``P0 V P0 = 0``.
    Lindblad shifts are tested for ``P0 L1 P0 = 0``. Each row also carries
    ``||(exp(T L') - exp(T L)) P0||`` at ``reference_T``, where ``L`` is the
    controlled generator and ``L'`` its perturbed version.
    """
    spec = cfg.model
    l0 = dissipator(spec.model)
    sd = _steady(cfg, l0)
    p0 = sd.p0
    tol = cfg.tolerances["robust"]
    k = _control(cfg, required=False)
    kk = hamiltonian_superop(k) if k is not None else np.zeros_like(l0)
    T = float(cfg.reference_T)
    base = expm(T * (l0 + kk / T)) @ p0
    unital = unitality_check(spec.model).unital
    alg = algebra_closure(spec.model.operators) if unital and spec.model.operators else None

    names = cfg.candidates if cfg.candidates is not None else list(spec.perturbations)
    columns = ["name", "kind", "projected_norm", "center_residual", "robust", "effective_difference"]
    rows = []
    for name in names:
        p = spec.perturbations[name]
        if isinstance(p, list):
            kind = "dissipative"
            l1 = first_variation_dissipator(spec.model, p)
            projected = spectral_norm(p0 @ l1 @ p0)
            center_res = float("nan")
            robust = projected <= tol * max(1.0, spectral_norm(l1))
            gen = perturbed_lindbladian(spec.model, p, T) + hamiltonian_part(spec.model) + kk / T
        else:
            kind = "hamiltonian"
            v = hamiltonian_superop(p)
            projected = spectral_norm(p0 @ v @ p0)
            if alg is not None:
                check = hamiltonian_robustness_check(p, alg)
                center_res, robust = check.center_residual, check.robust
            else:
                center_res = float("nan")
                robust = projected <= tol * max(1.0, spectral_norm(v))
            gen = l0 + (kk + v) / T
        diff = spectral_norm(expm(T * gen) @ p0 - base)
        rows.append([name, kind, projected, center_res, int(bool(robust)), diff])
    res = SweepResult("robustness", columns, rows)
    res.extra = {"reference_T": T, "unital": unital}
    if alg is not None:
        res.extra["codimension"] = alg.codimension
        res.extra["blocks"] = [list(b) for b in alg.blocks]
    return res


# ---------------------------------------------------------------- holonomy


def holonomy_sweep(cfg: ExperimentConfig) -> SweepResult:
    """Projection string versus the closed-form holonomy for each ``n``."""
    spec = cfg.model
    sd = _steady(cfg, dissipator(spec.model))
    k = _control(cfg)
    t = 1.0 if cfg.t is None else float(cfg.t)
    rows = []
    for n in sorted(int(v) for v in cfg.n_values):
        run = holonomy_run(k, sd.p0, t, n)
        rows.append([n, run.deviation, n * run.deviation])
    res = SweepResult("holonomy", ["n", "deviation", "n_times_deviation"], rows)
    res.fit = loglog_fit([r[0] for r in rows], [r[1] for r in rows], "n", "deviation")
    grid = np.linspace(0.0, t, 9)
    ppp = max(
        spectral_norm(
            instantaneous_projector(k, sd.p0, s) @ projector_derivative(k, sd.p0, s)
            @ instantaneous_projector(k, sd.p0, s)
        )
        for s in grid
    )
    res.extra = {"t": t, "c_estimate": max(r[2] for r in rows), "ppp_residual": ppp}
    return res


# ---------------------------------------------------------------- kato


def kato_report(cfg: ExperimentConfig) -> SweepResult:
    """First-order error bound at each ``x`` plus a finite-difference check of ``P1``.

    ``L1`` is the control Hamiltonian when one is named (or the model has
    no dissipative perturbation), otherwise the first variation of the
    default Lindblad shift. ``t`` defaults to the control time ``1/(x gap)``.
    """
    spec = cfg.model
    sd = _steady(cfg, dissipator(spec.model))
    if cfg.control is not None or (spec.deltas is None and cfg.perturbation is None):
        l1 = hamiltonian_superop(_control(cfg))
        source = cfg.control or next(iter(spec.controls))
    else:
        l1 = first_variation_dissipator(spec.model, _deltas(cfg))
        source = cfg.perturbation or spec.deltas
    rows = []
    for x in sorted(float(v) for v in cfg.x_values):
        t = 1.0 / (x * sd.gap) if cfg.t is None else float(cfg.t)
        rep = error_bound(sd, l1, x, t)
        rows.append([x, rep.t, rep.T, rep.lhs, rep.rhs, rep.C, int(rep.holds)])
    res = SweepResult("kato", ["x", "t", "T", "lhs", "rhs", "C", "holds"], rows)
    p1 = kato_terms(sd, l1).p1
    h = 1e-4
    try:
        fwd, rich = projector_derivative_fd(sd, l1, h)
        fd = {"h": h, "forward_error": spectral_norm(fwd - p1), "richardson_error": spectral_norm(rich - p1)}
    except NumericalError as exc:
        log.warning("finite-difference check skipped: %s", exc)
        fd = None
    res.extra = {"l1_source": source, "gap": sd.gap, "p1_norm": spectral_norm(p1), "finite_difference": fd}
    return res


RUNNERS = {
    "scaling": scaling_sweep,
    "spectrum": spectrum_sweep,
    "trace": coherence_trace,
    "robustness": robustness_report,
    "holonomy": holonomy_sweep,
    "kato": kato_report,
}


def run_experiment(cfg: ExperimentConfig) -> SweepResult:
    return RUNNERS[cfg.experiment](cfg)
