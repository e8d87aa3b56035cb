"""JSON experiment configs: schema, parsing and echo."""

import json
from dataclasses import asdict

import jsonschema
import numpy as np

from .encoding import SchemeAParams, SchemeBParams, TwoGenParams
from .engine import FockConfig
from .scenario import SPINOR_MODES, ExperimentConfig, GaussianMomentum, MomentumEigenstate
from .theory import MixingMatrix, flavor_index, rotation2, tribimaximal

_number = {"type": "number"}
_complex = {"oneOf": [_number, {"type": "array", "items": _number, "minItems": 2, "maxItems": 2}]}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


SCHEMA = _obj(
    {
        "scheme": {"enum": ["A", "B", "two-gen"]},
        "masses": {"type": "array", "items": _number, "minItems": 2, "maxItems": 3},
        "params": {
            "oneOf": [
                _obj({"Omega": _number, "Omega1": _number, "Omega2": _number}, ["Omega", "Omega1", "Omega2"]),
                _obj({"J": _number, "J1": _number, "J2": _number}, ["J", "J1", "J2"]),
                _obj({"Omega": _number, "Omega1": _number}, ["Omega", "Omega1"]),
            ]
        },
        "c": {"type": "number", "exclusiveMinimum": 0},
        "mixing": {
            "oneOf": [
                {"const": "tribimaximal"},
                _obj({"rotation2": _number}, ["rotation2"]),
                _obj({"matrix": {"type": "array", "items": {"type": "array", "items": _complex}}}, ["matrix"]),
            ]
        },
        "alpha": {"oneOf": [{"enum": ["e", "mu", "tau"]}, {"type": "integer", "minimum": 0}]},
        "spinor": {
            "oneOf": [
                {"enum": list(SPINOR_MODES)},
                _obj({"custom": {"type": "array", "items": _complex, "minItems": 2, "maxItems": 2}}, ["custom"]),
            ]
        },
        "momentum": {
            "oneOf": [
                _obj({"type": {"const": "eigenstate"}, "p": _number}, ["type", "p"]),
                _obj(
                    {
                        "type": {"const": "gaussian"},
                        "p0": _number,
                        "sigma": {"type": "number", "exclusiveMinimum": 0},
                        "n_points": {"type": "integer", "minimum": 1},
                        "half_width": {"type": "number", "exclusiveMinimum": 0},
                    },
                    ["type", "p0", "sigma"],
                ),
            ]
        },
        "engine": {
            "oneOf": [
                {"const": "sector"},
                _obj(
                    {
                        "type": {"const": "fock"},
                        "n_cut": {"type": "integer", "minimum": 2},
                        "delta": {"type": "number", "exclusiveMinimum": 0},
                        "auto_extend": {"type": "boolean"},
                        "tol": {"type": "number", "exclusiveMinimum": 0},
                        "max_n_cut": {"type": "integer", "minimum": 2},
                    },
                    ["type"],
                ),
            ]
        },
        "observable": {"enum": ["auto", "component", "energy"]},
        "times": {
            "oneOf": [
                _obj(
                    {"tmax": {"type": "number", "minimum": 0}, "dt": {"type": "number", "exclusiveMinimum": 0}},
                    ["tmax", "dt"],
                ),
                _obj({"values": {"type": "array", "items": _number, "minItems": 1}}, ["values"]),
            ]
        },
        "output": _obj({"csv": {"type": "string"}, "json": {"type": "string"}}),
    },
    required=["scheme", "momentum", "times"],
)


class ConfigError(ValueError):
    """Config failed schema validation or semantic checks."""


def _to_complex(x):
    return complex(x[0], x[1]) if isinstance(x, list) else complex(x)


def parse_matrix(rows):
    return MixingMatrix(np.array([[_to_complex(x) for x in row] for row in rows], dtype=complex))


def parse_mixing(spec):
    if spec == "tribimaximal":
        return tribimaximal()
    if "rotation2" in spec:
        return rotation2(spec["rotation2"])
    return parse_matrix(spec["matrix"])


def time_grid(spec):
    if "values" in spec:
        return np.asarray(spec["values"], dtype=float)
    n = int(np.floor(spec["tmax"] / spec["dt"] + 1e-9)) + 1
    return np.arange(n) * spec["dt"]


_PARAMS = {"A": SchemeAParams, "B": SchemeBParams, "two-gen": TwoGenParams}


def parse_config(data):
    """Validate a config dict and build an :class:`ExperimentConfig`.

    Raises
    ------
    ConfigError
        On any schema or consistency problem.
    """
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {path}: {exc.message}") from None
    try:
        return _build(data)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _build(data):
    scheme = data["scheme"]
    c = float(data.get("c", 1.0))
    params = None
    if "params" in data:
        try:
            params = _PARAMS[scheme](**data["params"], c=c)
        except TypeError:
            raise ValueError(f"params {sorted(data['params'])} do not fit scheme {scheme}") from None
    mixing = data.get("mixing", "tribimaximal" if scheme != "two-gen" else {"rotation2": np.pi / 4})
    spinor = data.get("spinor", "symmetric")
    if isinstance(spinor, dict):
        spinor = tuple(_to_complex(x) for x in spinor["custom"])
    mom = data["momentum"]
    if mom["type"] == "eigenstate":
        momentum = MomentumEigenstate(float(mom["p"]))
    else:
        momentum = GaussianMomentum(
            float(mom["p0"]), float(mom["sigma"]), int(mom.get("n_points", 129)), float(mom.get("half_width", 5.0))
        )
    engine = data.get("engine", "sector")
    if isinstance(engine, dict):
        engine = FockConfig(**{k: v for k, v in engine.items() if k != "type"})
    return ExperimentConfig(
        scheme=scheme,
        masses=tuple(data["masses"]) if "masses" in data else None,
        params=params,
        c=c,
        mixing=parse_mixing(mixing),
        alpha=data.get("alpha", "e"),
        spinor=spinor,
        momentum=momentum,
        engine=engine,
        times=time_grid(data["times"]),
        observable=data.get("observable", "auto"),
    )


def load_config(path):
    with open(path) as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    return data, parse_config(data)


def _complex_json(z):
    return [float(z.real), float(z.imag)]


def resolved_summary(config):
    """JSON-ready description of the derived quantities of a config."""
    params = config.resolved_params
    return {
        "scheme": config.scheme,
        "params": {type(params).__name__: asdict(params)},
        "masses": list(config.mass_spectrum.masses),
        "mixing": [[_complex_json(z) for z in row] for row in config.mixing.entries],
        "alpha": config.flavors[flavor_index(config.alpha, config.n_generations)],
        "observable": config.observable_mode,
        "n_times": int(config.times.size),
    }
