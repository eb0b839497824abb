"""Experiment configuration: JSON files validated against a versioned schema."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from .errors import ConfigError
from .systems import System, system_from_json

SCHEMA_VERSION = 1
KINDS = ("complexity", "measures", "diagnostics", "profile", "verify")
# output subdirectories of the verify / profile commands
RESERVED_NAMES = ("verify", "profile")

_num01 = {"type": "number", "exclusiveMinimum": 0, "maximum": 1}
_matrix = {"type": "array", "minItems": 1,
           "items": {"type": "array", "minItems": 1, "items": {"enum": [0, 1]}}}

SYSTEM_SCHEMA = {
    "oneOf": [
        {"type": "object", "additionalProperties": False, "required": ["kind"],
         "properties": {"kind": {"const": "doubling"}}},
        {"type": "object", "additionalProperties": False, "required": ["kind"],
         "properties": {"kind": {"const": "two_circle"}}},
        {"type": "object", "additionalProperties": False, "required": ["kind", "alpha"],
         "properties": {"kind": {"const": "rotation"},
                        "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}}},
        {"type": "object", "additionalProperties": False, "required": ["kind", "a", "c"],
         "properties": {"kind": {"const": "iet"},
                        "a": {"type": "array", "minItems": 3, "items": {"type": "number"}},
                        "c": {"type": "array", "minItems": 2, "items": {"type": "number"}}}},
        {"type": "object", "additionalProperties": False, "required": ["kind", "M"],
         "properties": {"kind": {"const": "sft"}, "M": _matrix}},
    ]
}

TOLERANCE_SCHEMA = {
    "type": "object", "additionalProperties": False, "required": ["tol"],
    "properties": {"target": {"type": "number"}, "tol": {"type": "number", "minimum": 0},
                   "relative": {"type": "boolean"}},
}

EXPERIMENT_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["name", "kind", "system", "eps", "n"],
    "properties": {
        "name": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"},
        "kind": {"enum": list(KINDS)},
        "system": SYSTEM_SCHEMA,
        "eps": {"type": "array", "minItems": 1, "items": _num01},
        "n": {"oneOf": [
            {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 1}},
            {"type": "object", "additionalProperties": False, "required": ["start", "stop"],
             "properties": {"start": {"type": "integer", "minimum": 1},
                            "stop": {"type": "integer", "minimum": 1},
                            "step": {"type": "integer", "minimum": 1}}},
        ]},
        "resolution": {"type": "integer", "minimum": 1, "maximum": 2_000_000},
        "seed": {"type": "integer", "minimum": 0},
        "budget": {"type": "integer", "minimum": 1},
        "approximate": {"type": "boolean"},
        "closed_form": {"type": "boolean"},
        "k_max": {"type": "integer", "minimum": 0},
        "guard": {"type": "integer", "minimum": 0},
        "exclusion_radius": {"type": "number", "minimum": 0},
        "parts": {"type": "integer", "minimum": 1, "maximum": 10_000},
        "omega": {"type": "number"},
        "trig_max": {"type": "integer", "minimum": 1, "maximum": 100},
        "instances": {"type": "integer", "minimum": 1, "maximum": 100_000},
        "synthetic": {"enum": ["sqrt", "full_shift"]},
        "tolerances": {"type": "object", "additionalProperties": TOLERANCE_SCHEMA},
    },
}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["schema", "seed", "experiments"],
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "seed": {"type": "integer", "minimum": 0},
        "description": {"type": "string"},
        "output_dir": {"type": "string"},
        "experiments": {"type": "array", "items": EXPERIMENT_SCHEMA},
    },
}


@dataclass(frozen=True)
class Tolerance:
    """Passes when |value - target| <= tol (value <= tol without a target)."""

    tol: float
    target: float | None = None
    relative: bool = False

    def error(self, value: float) -> float:
        if self.target is None:
            return value
        err = abs(value - self.target)
        return err / abs(self.target) if self.relative and self.target else err

    def passes(self, value: float) -> bool:
        return self.error(value) <= self.tol


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    kind: str
    system: dict
    eps: tuple[float, ...]
    n: tuple[int, ...]
    seed: int
    resolution: int = 2000
    budget: int = 1_000_000
    approximate: bool = False
    closed_form: bool = True
    k_max: int = 0
    guard: int = 1
    exclusion_radius: float = 1e-9
    parts: int = 10
    omega: float = 0.37
    trig_max: int = 5
    instances: int = 100
    synthetic: str | None = None
    tolerances: dict[str, Tolerance] = field(default_factory=dict)

    def build_system(self) -> System:
        return system_from_json(self.system)


@dataclass(frozen=True)
class RunConfig:
    seed: int
    experiments: tuple[ExperimentConfig, ...]
    output_dir: str | None = None
    description: str = ""
    source: str = ""


def _path(err: jsonschema.ValidationError) -> str:
    parts = ["$"] + [f"[{p}]" if isinstance(p, int) else f".{p}" for p in err.absolute_path]
    return "".join(parts)


def _n_values(spec) -> tuple[int, ...]:
    if isinstance(spec, list):
        return tuple(sorted(set(spec)))
    return tuple(range(spec["start"], spec["stop"] + 1, spec.get("step", 1)))


def parse_config(data: dict, source: str = "") -> RunConfig:
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        # the deepest error names the offending field most precisely
        err = max(errors, key=lambda e: len(e.absolute_path))
        raise ConfigError(err.message, _path(err))
    seen = set()
    exps = []
    for i, e in enumerate(data["experiments"]):
        where = f"$.experiments[{i}]"
        if e["name"] in RESERVED_NAMES or e["name"].startswith("."):
            raise ConfigError(f"experiment name {e['name']!r} is reserved", f"{where}.name")
        if e["name"] in seen:
            raise ConfigError(f"duplicate experiment name {e['name']!r}", f"{where}.name")
        seen.add(e["name"])
        n = _n_values(e["n"])
        if not n:
            raise ConfigError("empty n range", f"{where}.n")
        try:
            system_from_json(e["system"])
        except Exception as exc:  # invalid system data is a config error
            raise ConfigError(str(exc), f"{where}.system") from exc
        kwargs = {k: v for k, v in e.items() if k not in ("n", "eps", "tolerances", "seed")}
        tol = {k: Tolerance(v["tol"], v.get("target"), v.get("relative", False))
               for k, v in e.get("tolerances", {}).items()}
        exps.append(ExperimentConfig(
            eps=tuple(float(x) for x in e["eps"]), n=n, seed=e.get("seed", data["seed"]),
            tolerances=tol, **kwargs))
    return RunConfig(data["seed"], tuple(exps), data.get("output_dir"),
                     data.get("description", ""), source)


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}", "$") from exc
    return parse_config(data, str(path))
