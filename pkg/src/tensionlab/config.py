"""Run configuration: JSON files and command-line flags, validated at load."""
from __future__ import annotations

import difflib
import json
import math
import os
from dataclasses import asdict, dataclass, field, fields

from .errors import ConfigError

COMMANDS = ("tension", "sweep-eps", "sweep-s", "profile", "check", "export")
TENSION_KINDS = ("m_ks", "m_k_integer", "m_bbm", "m_ms", "m_half", "fd_m_k", "fd_m_1s")
SWEEP_S_KINDS = ("to_half", "bbm_left", "ms_right")
FAMILIES = ("phase-fractional", "phase-integer", "phase-half", "fd-integer", "fd-fractional")
POTENTIALS = ("quartic", "truncated-quadratic", "expression")
SCALINGS = ("none", "bbm", "ms", "alpha", "log")


@dataclass
class RunConfig:
    command: str
    kind: str | None = None
    family: str | None = None
    k: int = 1
    s: float = 0.0
    delta: float = 1.0
    eps: float = 1.0
    eps_list: list | None = None
    s_list: list | None = None
    potential: str = "quartic"
    potential_scale: float = 1.0
    expression: str | None = None
    scaling: str | None = None
    N: int = 1024
    T: float = 10.0
    T0: float = 5.0
    T_growth: float = 2.0
    T_max: float = 160.0
    N0: int = 256
    N_growth: int = 2
    N_max: int = 4096
    T_tol: float = 1e-3
    N_tol: float = 1e-3
    pin_layers: int | None = None
    restarts: int = 0
    pin_fraction: float = 0.1
    output_dir: str = "tensionlab-out"
    cache_dir: str | None = None
    use_cache: bool = True
    threads: int = 1
    seed: int = 0
    input: str | None = None
    output: str | None = None
    max_iterations: int = 5000
    extra: dict = field(default_factory=dict, repr=False)

    def canonical(self) -> dict:
        """Fields that determine the computed artifacts (no I/O locations)."""
        d = asdict(self)
        for key in ("output_dir", "cache_dir", "use_cache", "threads", "extra"):
            d.pop(key)
        return d


FIELD_NAMES = tuple(f.name for f in fields(RunConfig) if f.name != "extra")
# spelled-out names users reach for, mapped to the field they mean
ALIASES = {"epsilon": "eps", "epsilons": "eps_list", "epsilon_list": "eps_list",
           "jump": "delta", "order": "k", "cells": "N", "seminorm_order": "s"}


def suggest(key: str) -> str | None:
    pool = list(FIELD_NAMES) + list(ALIASES)
    hit = difflib.get_close_matches(key, pool, n=1, cutoff=0.5)
    if not hit:
        return None
    return ALIASES.get(hit[0], hit[0])


def _err(name, msg):
    return ConfigError(f"{name}: {msg}")


def _check_range(cfg: RunConfig):
    def need(cond, name, msg):
        if not cond:
            raise _err(name, msg)

    need(cfg.command in COMMANDS, "command", f"must be one of {COMMANDS}")
    need(0.0 <= cfg.s < 1.0, "s", f"must lie in [0, 1), got {cfg.s}")
    need(isinstance(cfg.k, int) and 0 <= cfg.k <= 8, "k", f"must be an integer in [0, 8], got {cfg.k}")
    need(cfg.delta > 0 and math.isfinite(cfg.delta), "delta", "must be positive")
    need(cfg.eps > 0 and math.isfinite(cfg.eps), "eps", "must be positive")
    need(cfg.potential in POTENTIALS, "potential", f"must be one of {POTENTIALS}")
    need(cfg.potential_scale > 0, "potential_scale", "must be positive")
    need((cfg.potential == "expression") == (cfg.expression is not None), "expression",
         "is required exactly when potential is 'expression'")
    need(cfg.scaling is None or cfg.scaling in SCALINGS, "scaling", f"must be one of {SCALINGS}")
    need(8 <= cfg.N <= 8192, "N", f"must lie in [8, 8192], got {cfg.N}")
    need(cfg.T > 0, "T", "must be positive")
    need(0 < cfg.T0 <= cfg.T_max, "T0", "must satisfy 0 < T0 <= T_max")
    need(cfg.T_growth > 1, "T_growth", "must exceed 1")
    need(8 <= cfg.N0 <= cfg.N_max <= 8192, "N0", "must satisfy 8 <= N0 <= N_max <= 8192")
    need(cfg.N_growth >= 2, "N_growth", "must be at least 2")
    need(0 < cfg.T_tol < 1, "T_tol", "must lie in (0, 1)")
    need(0 < cfg.N_tol < 1, "N_tol", "must lie in (0, 1)")
    need(cfg.pin_layers is None or cfg.pin_layers >= 0, "pin_layers", "must be nonnegative")
    need(cfg.restarts >= 0, "restarts", "must be nonnegative")
    need(0 < cfg.pin_fraction < 0.5, "pin_fraction", "must lie in (0, 1/2)")
    need(cfg.threads >= 1, "threads", "must be at least 1")
    need(cfg.seed >= 0, "seed", "must be nonnegative")
    need(cfg.max_iterations >= 1, "max_iterations", "must be positive")
    if cfg.eps_list is not None:
        need(len(cfg.eps_list) >= 1 and all(0 < e < 1 for e in cfg.eps_list), "eps_list",
             "entries must lie in (0, 1)")
    if cfg.s_list is not None:
        need(len(cfg.s_list) >= 1 and all(0 < x < 1 for x in cfg.s_list), "s_list",
             "entries must lie in (0, 1)")
    if cfg.command == "tension":
        need(cfg.kind in TENSION_KINDS, "kind", f"must be one of {TENSION_KINDS}")
    if cfg.command == "sweep-s":
        need(cfg.kind in SWEEP_S_KINDS, "kind", f"must be one of {SWEEP_S_KINDS}")
    if cfg.command in ("sweep-eps", "profile"):
        need(cfg.family in FAMILIES, "family", f"must be one of {FAMILIES}")
    if cfg.command == "export":
        need(cfg.input is not None, "input", "is required for export")


_INT_FIELDS = {"k", "N", "N0", "N_growth", "N_max", "restarts", "threads", "seed",
               "max_iterations", "pin_layers"}
_FLOAT_FIELDS = {"s", "delta", "eps", "potential_scale", "T", "T0", "T_growth", "T_max",
                 "T_tol", "N_tol", "pin_fraction"}


def _coerce(name, value):
    if value is None:
        return None
    try:
        if name in _INT_FIELDS:
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise ValueError
            return int(value)
        if name in _FLOAT_FIELDS:
            if isinstance(value, bool):
                raise ValueError
            return float(value)
        if name in ("eps_list", "s_list"):
            return [float(x) for x in value]
        if name == "use_cache":
            if not isinstance(value, bool):
                raise ValueError
            return value
    except (TypeError, ValueError):
        raise _err(name, f"invalid value {value!r}") from None
    if not isinstance(value, str):
        raise _err(name, f"expected a string, got {value!r}")
    return value


def config_from_dict(d: dict) -> RunConfig:
    if not isinstance(d, dict):
        raise ConfigError("configuration must be a JSON object")
    unknown = [key for key in d if key not in FIELD_NAMES]
    if unknown:
        key = unknown[0]
        hint = suggest(key)
        msg = f"unknown key {key!r}"
        if hint:
            msg += f"; did you mean {hint!r}?"
        raise ConfigError(msg)
    if "command" not in d:
        raise _err("command", "is required")
    values = {name: _coerce(name, v) for name, v in d.items()}
    cfg = RunConfig(**values)
    _check_range(cfg)
    return cfg


def load_config(path) -> RunConfig:
    path = os.fspath(path)
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: JSON parse error at line {exc.lineno}, "
                          f"column {exc.colno}: {exc.msg}") from None
    return config_from_dict(data)
