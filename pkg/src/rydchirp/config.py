"""JSON run configurations: schema, validation, and object construction.

A run config fully determines one CLI invocation.  Units follow the package
convention (MHz, us, MHz/us).  Unknown keys are rejected so typos fail loudly
instead of silently running defaults.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import jsonschema

from .errors import ConfigError
from .model import CONVENTIONS, LatticeSpec, PulseSpec, SystemSpec, lattice_interactions
from .propagate import IntegratorConfig

_NUMBER = {"type": "number"}

_LATTICE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["c_coeff", "exponent"],
    "properties": {
        "c_coeff": _NUMBER,
        "exponent": {"enum": [3, 6]},
        "spacing": _NUMBER,
        "length": _NUMBER,
    },
}

_SYSTEM_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["n_atoms", "delta1", "delta2"],
    "properties": {
        "n_atoms": {"type": "integer", "minimum": 1},
        "v": {"type": "array", "items": {"type": "array", "items": _NUMBER}},
        "lattice": _LATTICE_SCHEMA,
        "delta1": _NUMBER,
        "delta2": _NUMBER,
    },
}

_PULSE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["omega01", "omega02", "tau0", "t_center", "alpha1", "alpha2"],
    "properties": {
        "omega01": _NUMBER,
        "omega02": _NUMBER,
        "tau0": {"type": "number", "exclusiveMinimum": 0},
        "t_center": _NUMBER,
        "alpha1": _NUMBER,
        "alpha2": _NUMBER,
        "chirp_off_time": {"type": ["number", "null"]},
        "chirp_ramp": {"type": "number", "minimum": 0},
    },
}

_INTEGRATOR_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "dt": {"type": "number", "exclusiveMinimum": 0},
        "window": {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2},
        "convergence_halvings": {"type": "integer", "minimum": 1},
        "samples": {"type": "integer", "minimum": 2},
    },
}

_SWEEP_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["alpha_range", "omega_range"],
    "properties": {
        "alpha_range": {"type": "array", "items": _NUMBER, "minItems": 3, "maxItems": 3},
        "omega_range": {"type": "array", "items": _NUMBER, "minItems": 3, "maxItems": 3},
        "contour_threshold": {"type": "number", "exclusiveMinimum": 0},
    },
}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["system", "pulse"],
    "properties": {
        "description": {"type": "string"},
        "system": _SYSTEM_SCHEMA,
        "pulse": _PULSE_SCHEMA,
        "integrator": _INTEGRATOR_SCHEMA,
        "protocol": {"enum": ["GHZ", "W", None]},
        "observables": {"type": "array", "items": {"type": "string"}},
        "angular_convention": {"enum": list(CONVENTIONS)},
        "sweep": _SWEEP_SCHEMA,
        "spectrum_samples": {"type": "integer", "minimum": 2},
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"dir": {"type": "string"}, "stem": {"type": "string"}},
        },
    },
}

KNOWN_OBSERVABLES = ("ghz_fidelity", "w_fidelity", "population_difference",
                     "w_population_sum")


@dataclass(frozen=True)
class RunConfig:
    """Validated, fully constructed run parameters."""

    system: SystemSpec
    pulse: PulseSpec
    integrator: IntegratorConfig
    protocol: str | None
    observables: tuple[str, ...]
    convention: str
    sweep: dict | None
    spectrum_samples: int
    output_dir: str
    output_stem: str
    config_hash: str
    raw: dict


def config_hash(payload: dict) -> str:
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


def _build_system(block: dict) -> SystemSpec:
    n = block["n_atoms"]
    if "v" in block:
        v = block["v"]
    elif "lattice" in block:
        lat = block["lattice"]
        spec = LatticeSpec(c_coeff=lat["c_coeff"], exponent=lat["exponent"],
                           n_atoms=n, spacing=lat.get("spacing"),
                           length=lat.get("length"))
        v = lattice_interactions(spec)
    else:
        raise ConfigError("system needs either an explicit 'v' matrix or a 'lattice'")
    return SystemSpec(n_atoms=n, v=v, delta1=block["delta1"], delta2=block["delta2"])


def load_config(path) -> RunConfig:
    """Load, schema-validate, and construct a run config from a JSON file."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(payload, default_stem=path.stem)


def parse_config(payload: dict, default_stem: str = "run") -> RunConfig:
    try:
        jsonschema.validate(payload, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from exc

    for name in payload.get("observables", []):
        if name not in KNOWN_OBSERVABLES:
            raise ConfigError(f"unknown observable {name!r}; known: {KNOWN_OBSERVABLES}")

    try:
        system = _build_system(payload["system"])
        pulse_block = dict(payload["pulse"])
        pulse = PulseSpec(**pulse_block)
        integ_block = dict(payload.get("integrator", {}))
        if "window" in integ_block:
            integ_block["window"] = tuple(integ_block["window"])
        integrator = IntegratorConfig(**integ_block)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc

    protocol = payload.get("protocol")
    observables = tuple(payload.get("observables", ()))
    convention = payload.get("angular_convention", "direct")
    output = payload.get("output", {})
    sweep = payload.get("sweep")
    if sweep is not None:
        for axis in ("alpha_range", "omega_range"):
            if int(sweep[axis][2]) < 2:
                raise ConfigError(f"sweep {axis} needs at least 2 steps")
    return RunConfig(
        system=system,
        pulse=pulse,
        integrator=integrator,
        protocol=protocol,
        observables=observables,
        convention=convention,
        sweep=sweep,
        spectrum_samples=payload.get("spectrum_samples", 601),
        output_dir=output.get("dir", "."),
        output_stem=output.get("stem", default_stem),
        config_hash=config_hash(payload),
        raw=payload,
    )
