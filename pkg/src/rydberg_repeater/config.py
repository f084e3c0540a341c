"""Run configuration: one JSON document with chain, errors, physics and sweep sections."""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, fields, replace
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .ensemble_physics import PhysicsParams
from .error_model import ANGULAR_FACTORS
from .repeater_sim import VARIANTS, ChainConfig

SECTIONS = ("chain", "errors", "physics", "sweep")


class ConfigError(ValueError):
    """Invalid or incomplete run configuration."""


def load_defaults() -> dict:
    text = resources.files("rydberg_repeater").joinpath("data/defaults.json").read_text()
    return json.loads(text)


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def expand_grid(spec: Any, name: str) -> list[float]:
    """A grid is a list of numbers or ``{"start", "stop", "num"}`` (inclusive linspace)."""
    if isinstance(spec, dict):
        try:
            grid = np.linspace(float(spec["start"]), float(spec["stop"]), int(spec["num"])).tolist()
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{name}: bad range spec {spec!r}") from exc
    elif isinstance(spec, (list, tuple)):
        grid = [float(x) for x in spec]
    elif isinstance(spec, (int, float)):
        grid = [float(spec)]
    else:
        raise ConfigError(f"{name}: expected a list or range, got {spec!r}")
    if not grid:
        raise ConfigError(f"{name}: grid is empty")
    return grid


def _build(cls, section: dict, name: str):
    known = {f.name for f in fields(cls)}
    unknown = set(section) - known
    if unknown:
        raise ConfigError(f"{name}: unknown keys {sorted(unknown)}")
    try:
        return cls(**section)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: {exc}") from exc


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    seed: int | None
    chain: ChainConfig
    physics: PhysicsParams
    tau_us: tuple[float, ...]
    delta_dd_MHz: tuple[float, ...]
    angular_convention: str
    L_km: tuple[float, ...]
    variants: tuple[str, ...]
    trials: int

    def with_chain(self, **kw) -> RunConfig:
        return replace(self, chain=replace(self.chain, **kw))

    def require_seed(self) -> int:
        if self.seed is None:
            raise ConfigError("a seed is required for stochastic subcommands")
        return self.seed


def from_dict(doc: dict) -> RunConfig:
    unknown = set(doc) - set(SECTIONS) - {"scenario", "seed"}
    if unknown:
        raise ConfigError(f"unknown top-level keys {sorted(unknown)}")
    doc = _merge(load_defaults(), doc)
    errors = doc["errors"]
    convention = str(errors.get("angular_convention", "2pi"))
    if convention not in ANGULAR_FACTORS:
        raise ConfigError(f"angular_convention must be one of {sorted(ANGULAR_FACTORS)}")
    seed = doc.get("seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool) or seed < 0):
        raise ConfigError("seed must be a non-negative integer")
    chain_doc = dict(doc["chain"])
    if seed is not None:
        chain_doc.setdefault("rng_seed", seed)
    if isinstance(chain_doc.get("schedule"), list):
        chain_doc["schedule"] = tuple(int(x) for x in chain_doc["schedule"])
    physics_doc = dict(doc["physics"])
    physics_doc.setdefault("angular_convention", convention)

    sweep = doc["sweep"]
    variants = tuple(sweep.get("variants", ()))
    if not variants:
        raise ConfigError("sweep.variants is empty")
    bad = [v for v in variants if v not in VARIANTS]
    if bad:
        raise ConfigError(f"unknown variants {bad}; choose from {sorted(VARIANTS)}")
    trials = sweep.get("trials", 10_000)
    if not isinstance(trials, int) or trials < 0:
        raise ConfigError("sweep.trials must be a non-negative integer")

    return RunConfig(
        scenario=str(doc.get("scenario", "custom")),
        seed=seed,
        chain=_build(ChainConfig, chain_doc, "chain"),
        physics=_build(PhysicsParams, physics_doc, "physics"),
        tau_us=tuple(expand_grid(errors.get("tau_us"), "errors.tau_us")),
        delta_dd_MHz=tuple(expand_grid(errors.get("delta_dd_MHz"), "errors.delta_dd_MHz")),
        angular_convention=convention,
        L_km=tuple(expand_grid(sweep.get("L_km"), "sweep.L_km")),
        variants=variants,
        trials=trials,
    )


def load_config(path: str | Path | None = None) -> RunConfig:
    if path is None:
        return from_dict({})
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    return from_dict(doc)
