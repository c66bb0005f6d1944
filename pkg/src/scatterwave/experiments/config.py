"""Scenario configuration: JSON schema, validation and construction.

A scenario file looks like::

    {
      "name": "power-decay",
      "kind": "sufficiency",
      "spectrum": {"generator": "dirichlet_interval", "N": 5, "L": 3.141592653589793},
      "c": {"family": "power", "c_inf": 1.0, "amplitude": 1.0, "exponent": 2.0},
      "b": {"family": "constant", "value": 0.0},
      "initial": {"kind": "random", "seed": 7},
      "t_max": 1000.0,
      "samples": 201
    }

Unknown fields are rejected everywhere.  Errors carry the JSON path of the
offending field.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from ..coefficients import CoefficientProfile, check_speed, profile_from_dict
from ..dynamics import IntegratorConfig
from ..spectrum import SpectrumModel, StateVector, dirichlet_interval

__all__ = [
    "KINDS",
    "PRNG_NAME",
    "SCENARIO_SCHEMA",
    "ConfigError",
    "Scenario",
    "load_scenario",
    "random_initial",
    "scenario_from_dict",
]

KINDS = ("sufficiency", "necessity", "wave_speed", "verify", "profile")

PRNG_NAME = "numpy.random.Philox(4x64-10)/standard_normal"

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}
_TABLE = {"type": "array", "items": _NUM, "minItems": 1}


def _family(name, **props):
    return {
        "type": "object",
        "properties": {"family": {"const": name}, **props},
        "required": ["family", *props],
        "additionalProperties": False,
    }


PROFILE_SCHEMA = {
    "oneOf": [
        _family("constant", value=_NUM),
        _family("piecewise_linear", breakpoints=_TABLE, values=_TABLE),
        _family("step", breakpoints=_TABLE, values=_TABLE),
        _family("power", c_inf=_NUM, amplitude=_NUM, exponent=_POS),
        _family("exp", c_inf=_NUM, amplitude=_NUM, rate=_POS),
    ]
}

_PAIR = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}

SCENARIO_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "scatterwave scenario",
    "type": "object",
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "kind": {"enum": list(KINDS)},
        "spectrum": {
            "oneOf": [
                {
                    "type": "object",
                    "properties": {"eigenvalues": {"type": "array", "items": _POS,
                                                   "minItems": 1}},
                    "required": ["eigenvalues"],
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "properties": {
                        "generator": {"const": "dirichlet_interval"},
                        "N": {"type": "integer", "minimum": 1},
                        "L": _POS,
                    },
                    "required": ["generator", "N"],
                    "additionalProperties": False,
                },
            ]
        },
        "c": PROFILE_SCHEMA,
        "b": PROFILE_SCHEMA,
        "initial": {
            "oneOf": [
                {
                    "type": "object",
                    "properties": {
                        "kind": {"const": "explicit"},
                        "w": {"type": "array", "items": _PAIR, "minItems": 1},
                        "z": {"type": "array", "items": _PAIR, "minItems": 1},
                    },
                    "required": ["kind", "w", "z"],
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "properties": {
                        "kind": {"const": "random"},
                        "seed": {"type": "integer", "minimum": 0},
                    },
                    "required": ["kind", "seed"],
                    "additionalProperties": False,
                },
            ]
        },
        "t_max": _POS,
        "samples": {"type": "integer", "minimum": 2},
        "profile_tol": _POS,
        "fit_time": _NONNEG,
        "witness_max_time": _POS,
        "integrator": {
            "type": "object",
            "properties": {
                "rel_tol": _POS,
                "abs_tol": _POS,
                "max_step": _POS,
                "breakpoint_splitting": {"type": "boolean"},
            },
            "additionalProperties": False,
        },
        "grid": {
            "type": "object",
            "properties": {
                "amplitude": {"type": "array", "items": _NONNEG, "minItems": 1},
                "exponent": {"type": "array", "items": _POS, "minItems": 1},
            },
            "required": ["amplitude", "exponent"],
            "additionalProperties": False,
        },
    },
    "required": ["name", "kind", "spectrum", "c", "b", "initial", "t_max", "samples"],
    "additionalProperties": False,
}


class ConfigError(ValueError):
    """Invalid scenario; ``path`` is the JSON path of the offending field."""

    def __init__(self, message, path="$"):
        super().__init__(f"{path}: {message}")
        self.path = path


def _json_path(parts) -> str:
    out = "$"
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


_DISCRIMINATORS = ("family", "kind", "generator")


def _describe(err):
    """Message and JSON path for a validation error.

    A failed ``oneOf`` is resolved to the branch the input meant: the one
    whose discriminator (``family``, ``kind`` or ``generator``) matched.
    """
    while err.validator == "oneOf" and err.context and isinstance(err.instance, dict):
        keys = [k for k in _DISCRIMINATORS if k in err.instance]
        if not keys:
            break
        key = keys[0]
        branches = {}
        for sub in err.context:
            branches.setdefault(sub.relative_schema_path[0], []).append(sub)
        chosen = [subs for idx, subs in branches.items()
                  if key in err.schema["oneOf"][idx].get("properties", {})
                  and not any(s.validator == "const" and list(s.relative_path) == [key]
                              for s in subs)]
        if not chosen:
            path = _json_path([*err.absolute_path, key])
            return f"unknown {key} {err.instance[key]!r}", path
        err = jsonschema.exceptions.best_match(chosen[0])
    if err.validator == "oneOf":
        err = jsonschema.exceptions.best_match([err])
    return err.message, _json_path(err.absolute_path)


def random_initial(seed: int, n_modes: int) -> StateVector:
    """Complex standard Gaussian per mode from a Philox counter-based stream.

    Draws a ``(4, n_modes)`` block of standard normals ``g`` and sets
    ``w = (g0 + i g1) / sqrt(2)``, ``z = (g2 + i g3) / sqrt(2)``.
    """
    g = np.random.Generator(np.random.Philox(int(seed))).standard_normal((4, n_modes))
    s = math.sqrt(0.5)
    return StateVector(s * (g[0] + 1j * g[1]), s * (g[2] + 1j * g[3]))


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    kind: str
    spectrum: SpectrumModel
    c: CoefficientProfile
    b: CoefficientProfile
    initial: StateVector
    t_max: float
    samples: int
    seed: int | None = None
    profile_tol: float = 0.1
    fit_time: float = 10.0
    witness_max_time: float = 1e4
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    grid: dict | None = None
    raw: dict = field(default_factory=dict)

    def sample_times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.samples)


def _build(fn, path, *args):
    try:
        return fn(*args)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc), path) from exc


def scenario_from_dict(d: dict) -> Scenario:
    """Validate ``d`` against the schema and build a Scenario."""
    validator = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)
    errors = sorted(validator.iter_errors(d), key=lambda e: [str(p) for p in e.absolute_path])
    if errors:
        raise ConfigError(*_describe(errors[0]))

    spec = d["spectrum"]
    if "eigenvalues" in spec:
        spectrum = _build(SpectrumModel, "$.spectrum.eigenvalues", spec["eigenvalues"])
    else:
        spectrum = _build(dirichlet_interval, "$.spectrum", spec["N"],
                          spec.get("L", math.pi))

    c = _build(profile_from_dict, "$.c", d["c"])
    _build(check_speed, "$.c", c)
    b = _build(profile_from_dict, "$.b", d["b"])

    init = d["initial"]
    seed = None
    if init["kind"] == "random":
        seed = init["seed"]
        initial = random_initial(seed, spectrum.n_modes)
    else:
        for key in ("w", "z"):
            if len(init[key]) != spectrum.n_modes:
                raise ConfigError(
                    f"expected {spectrum.n_modes} entries, got {len(init[key])}",
                    f"$.initial.{key}")
        w = [complex(re, im) for re, im in init["w"]]
        z = [complex(re, im) for re, im in init["z"]]
        initial = _build(StateVector, "$.initial", w, z)

    integrator = _build(lambda kw: IntegratorConfig(**kw), "$.integrator",
                        d.get("integrator", {}))
    if "grid" in d and d["c"]["family"] != "power":
        raise ConfigError("a sweep grid needs a power-family speed profile", "$.grid")
    return Scenario(
        name=d["name"], kind=d["kind"], spectrum=spectrum, c=c, b=b,
        initial=initial, t_max=float(d["t_max"]), samples=int(d["samples"]),
        seed=seed, profile_tol=float(d.get("profile_tol", 0.1)),
        fit_time=float(d.get("fit_time", 10.0)),
        witness_max_time=float(d.get("witness_max_time", 1e4)),
        integrator=integrator, grid=d.get("grid"), raw=d,
    )


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(d, dict):
        raise ConfigError("top level must be an object")
    return scenario_from_dict(d)
