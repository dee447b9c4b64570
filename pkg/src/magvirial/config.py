"""Run-configuration files: strict JSON schema, hashing, and SimConfig assembly."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .dynamics import FileInitial, GaussianInitial, SimConfig
from .potentials import ELECTRIC_FAMILIES, MAGNETIC_FAMILIES, PotentialSpec, block_antisym_matrix


class ConfigError(ValueError):
    """Invalid run configuration; maps to exit code 2 at the CLI."""


# nested schema: every allowed key, mapped to a sub-schema for dict values
_SCHEMA = {
    "equation": None,
    "dim": None,
    "p": None,
    "grid": {"extent": None, "points": None},
    "time": {"dt": None, "t_end": None, "cadence": None},
    "potential": {
        "magnetic": {"family": None, "strength": None, "matrix": None, "epsilon": None, "file": None},
        "electric": {"family": None, "amplitude": None, "file": None},
        "taper": None,
    },
    "initial": {
        "kind": None,
        "amplitude": None,
        "width": None,
        "center": None,
        "velocity": None,
        "chirp": None,
        "velocity_factor": None,
        "path": None,
    },
    "dealias": None,
    "nonlinear": None,
    "thresholds": {"sup_factor": None, "h1a_factor": None, "boundary_warn": None},
    "seed": None,
    "scan": None,  # dict of dotted-path -> list of values, cmd_scan only
}

_REQUIRED = ("equation", "dim", "p", "grid", "time", "initial")


def _check_keys(node, schema, path=""):
    if not isinstance(node, dict):
        raise ConfigError(f"config key '{path or '<root>'}' must be an object")
    for key, value in node.items():
        if key not in schema:
            raise ConfigError(f"unknown config key '{path + key}'")
        sub = schema[key]
        if isinstance(sub, dict) and value is not None:
            _check_keys(value, sub, path + key + ".")


def load_config_file(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config parse error in {path} at line {exc.lineno}: {exc.msg}") from exc
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict) -> None:
    _check_keys(cfg, _SCHEMA)
    missing = [k for k in _REQUIRED if k not in cfg]
    if missing:
        raise ConfigError(f"missing required config keys: {', '.join(missing)}")


def config_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _build_potential(cfg: dict, dim: int, base_dir: Path) -> PotentialSpec:
    pot = cfg.get("potential") or {}
    mag = pot.get("magnetic") or {}
    ele = pot.get("electric") or {}
    mag_family = mag.get("family", "zero")
    ele_family = ele.get("family", "zero")
    if mag_family not in MAGNETIC_FAMILIES:
        raise ConfigError(f"unknown magnetic family '{mag_family}'")
    if ele_family not in ELECTRIC_FAMILIES:
        raise ConfigError(f"unknown electric family '{ele_family}'")

    matrix = None
    if mag_family == "linear_M":
        base = np.asarray(mag["matrix"], dtype=float) if "matrix" in mag else block_antisym_matrix(dim)
        matrix = float(mag.get("strength", 1.0)) * base

    mag_values = ele_values = None
    if mag_family == "custom_sampled":
        if "file" not in mag:
            raise ConfigError("custom_sampled magnetic family requires 'file'")
        mag_values = np.load(base_dir / mag["file"])["A"]
    if ele_family == "custom_sampled":
        if "file" not in ele:
            raise ConfigError("custom_sampled electric family requires 'file'")
        ele_values = np.load(base_dir / ele["file"])["V"]

    taper = pot.get("taper", "auto")
    if isinstance(taper, (list, tuple)):
        taper = (float(taper[0]), float(taper[1]))
    elif taper not in ("auto", None):
        raise ConfigError("potential.taper must be 'auto', null, or [start, end]")

    try:
        spec = PotentialSpec(
            dim=dim,
            magnetic=mag_family,
            electric=ele_family,
            matrix=matrix,
            electric_amplitude=float(ele.get("amplitude", 1.0)),
            epsilon=mag.get("epsilon"),
            taper=taper if isinstance(taper, tuple) else None,
            magnetic_values=mag_values,
            electric_values=ele_values,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    spec._taper_mode = taper  # "auto" | None | explicit pair
    return spec


def build_sim_config(cfg: dict, base_dir=".") -> SimConfig:
    """Turn a validated config tree into a SimConfig (raises ConfigError)."""
    base_dir = Path(base_dir)
    validate_config(cfg)
    try:
        dim = int(cfg["dim"])
        ini = cfg["initial"]
        kind = ini.get("kind", "gaussian")
        if kind == "gaussian":
            initial = GaussianInitial(
                amplitude=float(ini.get("amplitude", 1.0)),
                width=float(ini.get("width", 1.0)),
                center=tuple(ini["center"]) if ini.get("center") else None,
                velocity=tuple(ini["velocity"]) if ini.get("velocity") else None,
                chirp=float(ini.get("chirp", 0.0)),
            )
        elif kind == "file":
            if "path" not in ini:
                raise ConfigError("file initial data requires 'path'")
            initial = FileInitial(path=str(base_dir / ini["path"]))
        else:
            raise ConfigError(f"unknown initial kind '{kind}'")

        spec = _build_potential(cfg, dim, base_dir)
        taper_mode = getattr(spec, "_taper_mode", "auto")
        thresholds = cfg.get("thresholds") or {}
        sim = SimConfig(
            equation=str(cfg["equation"]),
            dim=dim,
            p=float(cfg["p"]),
            extent=float(cfg["grid"]["extent"]),
            points=int(cfg["grid"]["points"]),
            dt=float(cfg["time"]["dt"]),
            t_end=float(cfg["time"]["t_end"]),
            cadence=int(cfg["time"].get("cadence", 10)),
            potential=spec,
            initial=initial,
            dealias=bool(cfg.get("dealias", True)),
            nonlinear=bool(cfg.get("nonlinear", True)),
            sup_factor=float(thresholds.get("sup_factor", 1e3)),
            h1a_factor=float(thresholds.get("h1a_factor", 1e4)),
            boundary_warn=float(thresholds.get("boundary_warn", 1e-6)),
            velocity_factor=float(ini.get("velocity_factor", 0.2)),
            taper=taper_mode,
            seed=int(cfg.get("seed", 0)),
        )
        sim.validate()
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config: {exc}") from exc
    return sim


def set_by_path(cfg: dict, dotted: str, value) -> None:
    keys = dotted.split(".")
    node = cfg
    for k in keys[:-1]:
        node = node.setdefault(k, {})
    node[keys[-1]] = value
