"""Run configuration: JSON schema validation with filled defaults.

Unknown keys are rejected; violations are reported with a JSON-pointer
path to the offending field.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import jsonschema

SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "required": ["strategy", "data"],
    "properties": {
        "strategy": {"enum": ["ibg", "lp", "lr"]},
        "data": {
            "type": "object",
            "additionalProperties": False,
            "required": ["real", "seeds"],
            "properties": {
                "real": {"type": "string"},
                "seeds": {"type": "string"},
                "normalize": {"type": "boolean"},
            },
        },
        "graph": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "tau": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "d_max": {"type": "integer", "minimum": 1},
                "knn_cap": {"type": ["integer", "null"], "minimum": 1},
                "lsh": {"enum": ["auto", "on", "off"]},
                "lsh_tables": {"type": "integer", "minimum": 1},
                "lsh_bits": {"type": "integer", "minimum": 1, "maximum": 64},
            },
        },
        "seeding": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "method": {"enum": ["random", "acs", "file"]},
                "k": {"type": "integer", "minimum": 1},
                "c": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "file": {"type": ["string", "null"]},
            },
        },
        "loop": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "rounds": {"type": "integer", "minimum": 1},
                "k0": {"type": "integer", "minimum": 1},
                "k_max": {"type": ["integer", "null"], "minimum": 1},
                "t_prop": {"type": "integer", "minimum": 1},
                "eps": {"type": "number", "exclusiveMinimum": 0},
                "stop_on_empty_batch": {"type": "boolean"},
            },
        },
        "lr": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "budget": {"type": ["integer", "null"], "minimum": 1},
                "n_init_negatives": {"type": "integer", "minimum": 1},
                "learning_rate": {"type": "number", "exclusiveMinimum": 0},
                "epochs": {"type": "integer", "minimum": 1},
                "l2": {"type": "number", "minimum": 0},
            },
        },
        "oracle": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mode": {"enum": ["truth", "noisy", "human"]},
                "flip_prob": {"type": "number", "minimum": 0, "exclusiveMaximum": 0.5},
            },
        },
        "rng_seed": {"type": "integer"},
        "output_dir": {"type": "string"},
    },
}

# tau = 0.8 is the operating point the strategies are tuned around.
DEFAULTS: dict[str, Any] = {
    "data": {"normalize": True},
    "graph": {"tau": 0.8, "d_max": 32, "knn_cap": None, "lsh": "auto",
              "lsh_tables": 16, "lsh_bits": 12},
    "seeding": {"method": "acs", "k": 100, "c": 0.5, "file": None},
    "loop": {"rounds": 10, "k0": 100, "k_max": None, "t_prop": 50,
             "eps": 1e-6, "stop_on_empty_batch": True},
    "lr": {"budget": None, "n_init_negatives": 19, "learning_rate": 0.1,
           "epochs": 500, "l2": 1e-4},
    "oracle": {"mode": "truth", "flip_prob": 0.0},
    "rng_seed": 7,
    "output_dir": "out",
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    strategy: str
    real_path: str
    seeds_path: str
    normalize: bool
    graph: dict = field(default_factory=dict)
    seeding: dict = field(default_factory=dict)
    loop: dict = field(default_factory=dict)
    lr: dict = field(default_factory=dict)
    oracle: dict = field(default_factory=dict)
    rng_seed: int = 7
    output_dir: str = "out"

    def to_json(self) -> dict:
        return {
            "strategy": self.strategy,
            "data": {"real": self.real_path, "seeds": self.seeds_path,
                     "normalize": self.normalize},
            "graph": dict(self.graph),
            "seeding": dict(self.seeding),
            "loop": dict(self.loop),
            "lr": dict(self.lr),
            "oracle": dict(self.oracle),
            "rng_seed": self.rng_seed,
            "output_dir": self.output_dir,
        }


def _pointer(path_parts) -> str:
    return "/" + "/".join(str(p) for p in path_parts) if path_parts else "/"


def _merge(defaults: dict, overrides: dict) -> dict:
    out = dict(defaults)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def validate_config_obj(obj: dict, check_files: bool = True) -> RunConfig:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(obj), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise ConfigError(f"{_pointer(err.absolute_path)}: {err.message}")
    merged = _merge(DEFAULTS, obj)
    data = merged["data"]
    if check_files:
        for key in ("real", "seeds"):
            if not Path(data[key]).exists():
                raise ConfigError(f"/data/{key}: file not found: {data[key]}")
    loop = merged["loop"]
    if loop["k_max"] is not None and loop["k_max"] < loop["k0"]:
        raise ConfigError("/loop/k_max: must be >= k0")
    lr = merged["lr"]
    if lr["budget"] is not None and lr["budget"] < loop["k0"]:
        raise ConfigError("/lr/budget: must be >= loop k0 when set")
    return RunConfig(
        strategy=merged["strategy"],
        real_path=data["real"],
        seeds_path=data["seeds"],
        normalize=data["normalize"],
        graph=merged["graph"],
        seeding=merged["seeding"],
        loop=merged["loop"],
        lr=merged["lr"],
        oracle=merged["oracle"],
        rng_seed=merged["rng_seed"],
        output_dir=merged["output_dir"],
    )


def validate_config(path: str | Path, check_files: bool = True) -> RunConfig:
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc.msg})") from None
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return validate_config_obj(obj, check_files=check_files)
