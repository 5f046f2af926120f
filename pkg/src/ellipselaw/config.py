"""Run configuration files (JSON)."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .anisotropy import AnisotropySeries, KernelSpec, make_preset, series_from_samples
from .ellipse_solver import DEFAULT_QUAD_NODES, EllipseShape
from .particles import ConfinementSpec, EllipticalWell, Power, Quadratic

TOP_LEVEL_KEYS = {"anisotropy", "confinement", "log_strength", "tolerances", "quad_nodes"}
DEFAULT_TOLERANCES = {"solver": 1e-8, "el_scan": 1e-6, "parseval": 1e-3}
PRESET_PARAMS = {"coulomb": set(), "dislocation": {"alpha"}, "elastic": {"a", "b"}}


class ConfigError(ValueError):
    """Malformed configuration; the message names the offending key."""


@dataclass
class RunConfig:
    kernel: KernelSpec
    confinement: ConfinementSpec = field(default_factory=Quadratic)
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    quad_nodes: int = DEFAULT_QUAD_NODES


def _number(value, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{key}: expected a finite number, got {value!r}")
    return float(value)


def _numbers(value, key: str) -> list[float]:
    if not isinstance(value, list):
        raise ConfigError(f"{key}: expected a list of numbers")
    return [_number(v, f"{key}[{i}]") for i, v in enumerate(value)]


def _reject_unknown(block: dict, allowed: set, where: str):
    extra = sorted(set(block) - allowed)
    if extra:
        raise ConfigError(f"{where}: unknown key {extra[0]!r}")


def parse_anisotropy(block, log_strength: float = 1.0) -> KernelSpec:
    if not isinstance(block, dict):
        raise ConfigError("anisotropy: expected an object")
    sources = [k for k in ("cos", "preset", "samples") if k in block]
    if "sin" in block and "cos" not in block:
        sources.append("sin")
    if len(sources) != 1:
        raise ConfigError(f"anisotropy: expected exactly one of 'cos'/'sin', 'preset', 'samples', got {sources or 'none'}")
    src = sources[0]
    try:
        if src in ("cos", "sin"):
            _reject_unknown(block, {"cos", "sin"}, "anisotropy")
            a = _numbers(block.get("cos", []), "anisotropy.cos")
            b = _numbers(block.get("sin", [0.0] * len(a)), "anisotropy.sin")
            if "cos" not in block:
                a = [0.0] * len(b)
            return KernelSpec(log_strength, AnisotropySeries(tuple(a), tuple(b)))
        if src == "samples":
            _reject_unknown(block, {"samples"}, "anisotropy")
            return KernelSpec(log_strength, series_from_samples(_numbers(block["samples"], "anisotropy.samples")))
        name = block["preset"]
        if name not in PRESET_PARAMS:
            raise ConfigError(f"anisotropy.preset: unknown preset {name!r}")
        _reject_unknown(block, {"preset"} | PRESET_PARAMS[name], "anisotropy")
        missing = sorted(PRESET_PARAMS[name] - set(block))
        if missing:
            raise ConfigError(f"anisotropy.{missing[0]}: required for preset {name!r}")
        params = {k: _number(block[k], f"anisotropy.{k}") for k in PRESET_PARAMS[name]}
        return make_preset(name, log_strength=log_strength, **params)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"anisotropy: {exc}") from exc


def parse_confinement(block) -> ConfinementSpec:
    if not isinstance(block, dict) or "kind" not in block:
        raise ConfigError("confinement.kind: required")
    kind = block["kind"]
    try:
        if kind == "quadratic":
            _reject_unknown(block, {"kind"}, "confinement")
            return Quadratic()
        if kind == "power":
            _reject_unknown(block, {"kind", "p"}, "confinement")
            if "p" not in block:
                raise ConfigError("confinement.p: required for kind 'power'")
            return Power(_number(block["p"], "confinement.p"))
        if kind == "elliptical_well":
            _reject_unknown(block, {"kind", "phi", "a1", "a2"}, "confinement")
            for k in ("a1", "a2"):
                if k not in block:
                    raise ConfigError(f"confinement.{k}: required for kind 'elliptical_well'")
            shape = EllipseShape(
                _number(block.get("phi", 0.0), "confinement.phi"),
                _number(block["a1"], "confinement.a1"),
                _number(block["a2"], "confinement.a2"),
            )
            return EllipticalWell(shape)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"confinement: {exc}") from exc
    raise ConfigError(f"confinement.kind: unknown kind {kind!r}")


def parse_config(data) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config: expected a JSON object at top level")
    _reject_unknown(data, TOP_LEVEL_KEYS, "config")
    if "anisotropy" not in data:
        raise ConfigError("anisotropy: required")
    log_strength = _number(data.get("log_strength", 1.0), "log_strength")
    if log_strength < 1.0:
        raise ConfigError(f"log_strength: must be >= 1, got {log_strength}")
    kernel = parse_anisotropy(data["anisotropy"], log_strength)
    conf = parse_confinement(data.get("confinement", {"kind": "quadratic"}))
    tol = dict(DEFAULT_TOLERANCES)
    user_tol = data.get("tolerances", {})
    if not isinstance(user_tol, dict):
        raise ConfigError("tolerances: expected an object")
    _reject_unknown(user_tol, set(DEFAULT_TOLERANCES), "tolerances")
    for k, v in user_tol.items():
        tol[k] = _number(v, f"tolerances.{k}")
        if tol[k] <= 0:
            raise ConfigError(f"tolerances.{k}: must be positive")
    nodes = data.get("quad_nodes", DEFAULT_QUAD_NODES)
    if isinstance(nodes, bool) or not isinstance(nodes, int) or nodes < 256 or nodes % 2:
        raise ConfigError(f"quad_nodes: expected an even integer >= 256, got {nodes!r}")
    return RunConfig(kernel, conf, tol, nodes)


def load_config(path) -> RunConfig:
    """Read and validate a config file. OSError propagates for IO failures."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON ({exc})") from exc
    return parse_config(data)
