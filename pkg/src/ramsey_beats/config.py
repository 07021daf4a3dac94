"""Run configuration: defaults, merging, validation and hashing.

A run config is one JSON document with blocks ``schedule``,
``levels`` (per-transition physics), ``noise``, ``lindblad`` and
``fit``.  User files override the built-in measured-device defaults
field by field.  Validation errors name the offending field path,
e.g. ``noise.alpha``.
"""

from __future__ import annotations

import copy
import hashlib
import json

from .errors import ConfigError
from .lindblad import (
    DEVICE_DISPERSIONS,
    DEVICE_FREQUENCIES,
    DEVICE_T1,
    DEVICE_T2,
    QuditParams,
)
from .model import LevelParams
from .schedule import MeasurementSchedule


def default_config() -> dict:
    return {
        "schedule": {
            "shot_rate": 1000.0,
            "n_tr": 101,
            "shots_per_point": 256,
            "n_curves": 50,
            "tr_max": 15e-6,
            "levels": ["01", "12", "23"],
        },
        "levels": {
            "01": {
                "f_bar": DEVICE_FREQUENCIES[0],
                "eps_max": DEVICE_DISPERSIONS[0],
                "t2_star": DEVICE_T2[0],
                "omega_r": 500e3,
            },
            "12": {
                "f_bar": DEVICE_FREQUENCIES[1],
                "eps_max": DEVICE_DISPERSIONS[1],
                "t2_star": DEVICE_T2[1],
                "omega_r": 500e3,
            },
            "23": {
                "f_bar": DEVICE_FREQUENCIES[2],
                "eps_max": DEVICE_DISPERSIONS[2],
                "t2_star": DEVICE_T2[2],
                "omega_r": 750e3,
            },
        },
        "noise": {
            "alpha": 2.0,
            "a": None,  # direct scaling amplitude; wins over "amplitude"
            "amplitude": 2.7e-5,  # physical 1 Hz density, e^2/Hz
            "seed": 1,
            "n_samples": 65536,  # standalone noise generation only
            "sample_rate": 1000.0,
        },
        "lindblad": {
            "t1": list(DEVICE_T1),
            "t2": list(DEVICE_T2),
            "dt": None,
        },
        "fit": {
            "alpha_min": 0.0,
            "alpha_max": 3.0,
            "alpha_step": 0.1,
            "a_min": 1e-3,
            "a_max": 1e2,
            "n_a": 26,
            "seeds": [0],
            "n_seeds_c_alpha": 20,
            "uncertainty_level": 0.05,
            "smooth_window": None,
            "noise_floor": 0.02,
        },
    }


def _merge(base: dict, override: dict, path="") -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        where = f"{path}.{key}" if path else key
        if key not in out:
            raise ConfigError(where, "unknown field")
        if isinstance(out[key], dict) and isinstance(value, dict):
            out[key] = _merge(out[key], value, where)
        else:
            out[key] = value
    return out


def load_config(path: str | None = None, overrides: dict | None = None) -> dict:
    """Defaults, optionally overlaid with a JSON file and a dict."""
    cfg = default_config()
    if path is not None:
        try:
            with open(path) as f:
                user = json.load(f)
        except json.JSONDecodeError as exc:
            raise ConfigError("<file>", f"invalid JSON: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("<file>", "top level must be an object")
        cfg = _merge(cfg, user)
    if overrides:
        cfg = _merge(cfg, overrides)
    validate_config(cfg)
    return cfg


def _require(cond: bool, field: str, message: str):
    if not cond:
        raise ConfigError(field, message)


def validate_config(cfg: dict):
    sch = cfg["schedule"]
    _require(sch["shot_rate"] > 0, "schedule.shot_rate", "must be > 0")
    _require(sch["tr_max"] > 0, "schedule.tr_max", "must be > 0")
    for name in ("n_tr", "shots_per_point", "n_curves"):
        _require(int(sch[name]) >= 1, f"schedule.{name}", "must be >= 1")
    _require(len(sch["levels"]) >= 1, "schedule.levels", "must not be empty")
    for lvl in sch["levels"]:
        _require(lvl in cfg["levels"], f"levels.{lvl}", "missing level block")

    for lvl, block in cfg["levels"].items():
        _require(block["eps_max"] >= 0, f"levels.{lvl}.eps_max", "must be >= 0")
        _require(block["t2_star"] > 0, f"levels.{lvl}.t2_star", "must be > 0")

    noi = cfg["noise"]
    _require(noi["alpha"] >= 0, "noise.alpha", "must be >= 0")
    _require(int(noi["n_samples"]) >= 2, "noise.n_samples", "must be >= 2")
    _require(noi["sample_rate"] > 0, "noise.sample_rate", "must be > 0")
    if noi["a"] is not None:
        _require(noi["a"] > 0, "noise.a", "must be > 0")
    if noi["amplitude"] is not None:
        _require(noi["amplitude"] > 0, "noise.amplitude", "must be > 0")
    _require(
        noi["a"] is not None or noi["amplitude"] is not None,
        "noise.a",
        "either a or amplitude must be set",
    )

    lb = cfg["lindblad"]
    for name in ("t1", "t2"):
        _require(len(lb[name]) == 3, f"lindblad.{name}", "needs 3 entries")
        _require(all(t > 0 for t in lb[name]), f"lindblad.{name}", "must be > 0")
    if lb["dt"] is not None:
        _require(lb["dt"] > 0, "lindblad.dt", "must be > 0")

    fit = cfg["fit"]
    _require(fit["alpha_step"] > 0, "fit.alpha_step", "must be > 0")
    _require(
        fit["alpha_max"] >= fit["alpha_min"] >= 0,
        "fit.alpha_min",
        "need 0 <= alpha_min <= alpha_max",
    )
    _require(0 < fit["a_min"] <= fit["a_max"], "fit.a_min", "need 0 < a_min <= a_max")
    _require(int(fit["n_a"]) >= 1, "fit.n_a", "must be >= 1")
    _require(len(fit["seeds"]) >= 1, "fit.seeds", "must not be empty")


def config_hash(cfg: dict) -> str:
    canonical = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def build_schedule(cfg: dict) -> MeasurementSchedule:
    sch = cfg["schedule"]
    return MeasurementSchedule(
        shot_rate=float(sch["shot_rate"]),
        n_tr=int(sch["n_tr"]),
        shots_per_point=int(sch["shots_per_point"]),
        n_curves=int(sch["n_curves"]),
        tr_max=float(sch["tr_max"]),
        levels=tuple(sch["levels"]),
    )


def build_level_params(cfg: dict, level: str) -> LevelParams:
    if level not in cfg["levels"]:
        raise ConfigError(f"levels.{level}", "missing level block")
    block = cfg["levels"][level]
    return LevelParams(
        f_bar=float(block["f_bar"]),
        eps_max=float(block["eps_max"]),
        t2_star=float(block["t2_star"]),
        omega_r=float(block["omega_r"]),
    )


def build_qudit_params(cfg: dict) -> QuditParams:
    frequencies = tuple(cfg["levels"][lvl]["f_bar"] for lvl in ("01", "12", "23"))
    dispersions = tuple(cfg["levels"][lvl]["eps_max"] for lvl in ("01", "12", "23"))
    return QuditParams.from_coherence_times(
        frequencies, dispersions, cfg["lindblad"]["t1"], cfg["lindblad"]["t2"]
    )
