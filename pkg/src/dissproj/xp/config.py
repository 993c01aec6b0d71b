"""Experiment configuration: JSON schema, loading, and model (de)serialization.

Matrices are written as nested lists of ``[re, im]`` pairs, row by row::

    [[[0, 0], [1, 0]],
     [[1, 0], [0, 0]]]

A model is either a model-zoo name (``"fig1"``), a zoo name with
constructor parameters (``{"zoo": "fig1", "params": {"gamma": [2, 2, 2]}}``),
or an inline definition (see ``INLINE_MODEL_SCHEMA``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np

from dissproj.exceptions import ConfigError
from dissproj.liouville import LindbladModel
from dissproj.models import ZOO, ModelSpec, get_model

EXPERIMENTS = ("scaling", "spectrum", "holonomy", "robustness", "trace", "kato")

MATRIX_SCHEMA = {
    "type": "array",
    "minItems": 1,
    "items": {
        "type": "array",
        "minItems": 1,
        "items": {
            "type": "array",
            "minItems": 2,
            "maxItems": 2,
            "items": {"type": "number"},
        },
    },
}

INLINE_MODEL_SCHEMA = {
    "type": "object",
    "required": ["lindblads"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "lindblads": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["op"],
                "additionalProperties": False,
                "properties": {"op": MATRIX_SCHEMA, "rate": {"type": "number", "minimum": 0}},
            },
        },
        "hamiltonian": MATRIX_SCHEMA,
        "controls": {"type": "object", "additionalProperties": MATRIX_SCHEMA},
        "perturbations": {
            "type": "object",
            "additionalProperties": {
                "oneOf": [MATRIX_SCHEMA, {"type": "array", "items": MATRIX_SCHEMA}]
            },
        },
        "deltas": {"type": "string"},
        "expected": {"type": "object"},
        "params": {"type": "object"},
    },
}

_POSITIVE_LIST = {"type": "array", "minItems": 1, "items": {"type": "number", "exclusiveMinimum": 0}}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["experiment", "model"],
    "additionalProperties": False,
    "properties": {
        "experiment": {"enum": list(EXPERIMENTS)},
        "model": {
            "oneOf": [
                {"type": "string"},
                {
                    "type": "object",
                    "required": ["zoo"],
                    "additionalProperties": False,
                    "properties": {"zoo": {"type": "string"}, "params": {"type": "object"}},
                },
                INLINE_MODEL_SCHEMA,
            ]
        },
        "control": {"type": ["string", "null"]},
        "perturbation": {"type": ["string", "null"]},
        "candidates": {"type": "array", "items": {"type": "string"}},
        "T_values": _POSITIVE_LIST,
        "n_values": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 1}},
        "x_values": _POSITIVE_LIST,
        "t": {"type": "number", "minimum": 0},
        "T": {"type": "number", "exclusiveMinimum": 0},
        "window": {"type": "array", "minItems": 2, "maxItems": 2, "items": {"type": "number", "minimum": 0}},
        "n_points": {"type": "integer", "minimum": 3},
        "element": {"type": "array", "minItems": 2, "maxItems": 2, "items": {"type": "integer", "minimum": 0}},
        "basis": {"enum": ["heff", "computational"]},
        "generator": {"enum": ["linear", "full"]},
        "initial_state": {"oneOf": [{"enum": ["random_steady"]}, MATRIX_SCHEMA]},
        "sup_grid": {"type": "boolean"},
        "sup_points": {"type": "integer", "minimum": 2},
        "fit_points": {"type": "integer", "minimum": 2},
        "reference_T": {"type": "number", "exclusiveMinimum": 0},
        "tolerances": {"type": "object", "additionalProperties": {"type": "number", "minimum": 0}},
        "seed": {"type": "integer"},
        "output_path": {"type": "string"},
    },
}

DEFAULT_TOLERANCES = {
    "kernel": None,
    "robust": 1e-10,
    "steady_membership": 1e-8,
    "drop_modulus": 1e-6,
}


def matrix_from_json(m) -> np.ndarray:
    a = np.asarray(m, dtype=float)
    if a.ndim != 3 or a.shape[2] != 2 or a.shape[0] != a.shape[1]:
        raise ConfigError(f"matrix must be square nested [re, im] pairs, got shape {a.shape}")
    return a[..., 0] + 1j * a[..., 1]


def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _jsonable(value):
    if isinstance(value, np.ndarray):
        if value.ndim == 2 and value.shape[0] == value.shape[1] and value.shape[0] > 1:
            return matrix_to_json(value)
        return value.real.tolist() if np.isrealobj(value) or not np.any(value.imag) else matrix_to_json(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def model_to_dict(spec: ModelSpec) -> dict:
    m = spec.model
    out = {
        "name": spec.name,
        "description": spec.description,
        "lindblads": [{"op": matrix_to_json(op), "rate": rate} for op, rate in m.lindblads],
        "controls": {k: matrix_to_json(v) for k, v in spec.controls.items()},
        "perturbations": {
            k: [matrix_to_json(o) for o in v] if isinstance(v, list) else matrix_to_json(v)
            for k, v in spec.perturbations.items()
        },
        "expected": _jsonable(spec.expected),
        "params": _jsonable(spec.params),
    }
    if m.hamiltonian is not None:
        out["hamiltonian"] = matrix_to_json(m.hamiltonian)
    if spec.deltas is not None:
        out["deltas"] = spec.deltas
    return out


def model_from_dict(d: dict) -> ModelSpec:
    try:
        jsonschema.validate(d, INLINE_MODEL_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid inline model: {exc.message}") from None
    ops = [matrix_from_json(item["op"]) for item in d["lindblads"]]
    rates = [float(item.get("rate", 1.0)) for item in d["lindblads"]]
    ham = matrix_from_json(d["hamiltonian"]) if "hamiltonian" in d else None
    if not ops and ham is None:
        raise ConfigError("inline model needs Lindblad operators or a Hamiltonian")
    dim = ops[0].shape[0] if ops else ham.shape[0]
    model = LindbladModel(dim=dim, lindblads=tuple(zip(ops, rates)), hamiltonian=ham)
    perturbations = {}
    for k, v in d.get("perturbations", {}).items():
        arr = np.asarray(v, dtype=float)
        perturbations[k] = [matrix_from_json(o) for o in v] if arr.ndim == 4 else matrix_from_json(v)
    return ModelSpec(
        name=d.get("name", "inline"),
        model=model,
        controls={k: matrix_from_json(v) for k, v in d.get("controls", {}).items()},
        perturbations=perturbations,
        deltas=d.get("deltas"),
        expected=d.get("expected", {}),
        params=d.get("params", {}),
        description=d.get("description", ""),
    )


def resolve_model(ref) -> ModelSpec:
    if isinstance(ref, str):
        return get_model(ref)
    if "zoo" in ref:
        name = ref["zoo"]
        if name not in ZOO:
            raise ConfigError(f"unknown model {name!r}; known: {sorted(ZOO)}")
        params = dict(ref.get("params", {}))
        try:
            return ZOO[name](**params)
        except TypeError as exc:
            raise ConfigError(f"bad parameters for model {name!r}: {exc}") from None
    return model_from_dict(ref)


@dataclass
class ExperimentConfig:
    experiment: str
    model: ModelSpec
    model_ref: object
    control: Optional[str] = None
    perturbation: Optional[str] = None
    candidates: Optional[list] = None
    T_values: list = field(default_factory=list)
    n_values: list = field(default_factory=list)
    x_values: list = field(default_factory=list)
    t: Optional[float] = None
    T: float = 100.0
    window: Optional[tuple] = None
    n_points: int = 400
    element: Optional[tuple] = None
    basis: str = "heff"
    generator: str = "linear"
    initial_state: object = "random_steady"
    sup_grid: bool = False
    sup_points: int = 16
    fit_points: int = 4
    reference_T: float = 400.0
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    seed: int = 0
    output_path: Optional[str] = None
    raw: dict = field(default_factory=dict, repr=False)


_REQUIRED = {
    "scaling": ["T_values"],
    "spectrum": ["T_values"],
    "holonomy": ["n_values"],
    "robustness": [],
    "trace": [],
    "kato": ["x_values"],
}


def parse_config(raw: dict) -> ExperimentConfig:
    """Validate a config dictionary and resolve its model."""
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from None
    exp = raw["experiment"]
    for key in _REQUIRED[exp]:
        if key not in raw:
            raise ConfigError(f"experiment {exp!r} requires {key!r}")
    if "T_values" in raw and list(raw["T_values"]) != sorted(set(raw["T_values"])):
        raise ConfigError("T_values must be strictly increasing")
    spec = resolve_model(raw["model"])
    tolerances = dict(DEFAULT_TOLERANCES)
    tolerances.update(raw.get("tolerances", {}))
    kwargs = {k: v for k, v in raw.items() if k not in ("model", "tolerances")}
    for key in ("window", "element"):
        if key in kwargs:
            kwargs[key] = tuple(kwargs[key])
    if kwargs.get("window") and kwargs["window"][1] <= kwargs["window"][0]:
        raise ConfigError("window must satisfy start < end")
    cfg = ExperimentConfig(model=spec, model_ref=raw["model"], tolerances=tolerances, raw=raw, **kwargs)
    for name in (cfg.control,):
        if name is not None and name not in spec.controls:
            raise ConfigError(f"model {spec.name!r} has no control {name!r}")
    if cfg.perturbation is not None and cfg.perturbation not in spec.perturbations:
        raise ConfigError(f"model {spec.name!r} has no perturbation {cfg.perturbation!r}")
    for name in cfg.candidates or []:
        if name not in spec.perturbations:
            raise ConfigError(f"model {spec.name!r} has no perturbation {name!r}")
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return parse_config(raw)
