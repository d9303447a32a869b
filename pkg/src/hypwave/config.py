"""Flat YAML configuration with dotted keys.

A file is a mapping such as::

    dt: 0.001
    t_final: 5
    data.kind: bump
    data.amplitude: 2.0

Nested mappings are accepted and flattened (``data: {kind: bump}`` is the
same as ``data.kind: bump``).  Unknown keys are errors.
"""
from __future__ import annotations

import dataclasses
from typing import Any, Callable

import yaml

from .data import DataSpec
from .inequalities import EnsembleSpec, StrichartzTriple, SuiteConfig, parse_exponent
from .solver import ConfigError, IntegratorConfig
from .truncation import TruncationConfig


def _int(x):
    if isinstance(x, bool) or int(x) != float(x):
        raise ValueError(f"expected an integer, got {x!r}")
    return int(x)


def _float(x):
    if isinstance(x, bool):
        raise ValueError(f"expected a number, got {x!r}")
    return float(x)


def _str(x):
    if not isinstance(x, str):
        raise ValueError(f"expected a string, got {x!r}")
    return x


def _floats(x):
    if isinstance(x, (list, tuple)):
        return [float(v) for v in x]
    return float(x)


def _float_list(x):
    if not isinstance(x, (list, tuple)) or not x:
        raise ValueError(f"expected a nonempty list, got {x!r}")
    return [float(v) for v in x]


DATA_KEYS: dict[str, Callable] = {
    "data.kind": _str, "data.amplitude": _float, "data.velocity": _float,
    "data.radius": _float, "data.k": _int, "data.kmax": _int, "data.norm": _float,
    "data.velocity_norm": _float,
}

ENSEMBLE_KEYS: dict[str, Callable] = {
    "ensemble.count": _int, "ensemble.seed": _int, "ensemble.kind": _str,
    "ensemble.decay": _float, "ensemble.radius": _float, "ensemble.kmax": _int,
    "ensemble.normalize_sigma": _float,
}

SCHEMAS: dict[str, dict[str, Callable]] = {
    "solve": {
        "rmax": _float, "n": _int, "dt": _float, "t_final": _float, "observer_stride": _int,
        "seed": _int, "delta": _float, "alpha": _float, "alpha_tilde": _float,
        "c1": _float, "c2": _float, "c3": _float, "c4": _float, **DATA_KEYS,
    },
    "truncation": {
        "delta": _float, "delta1": _float, "s": _floats, "c1": _float, "c2": _float,
        "c3": _float, "c4": _float, "alpha": _float, "alpha_tilde": _float, "rmax": _float,
        "n": _int, "dt": _float, "t_final": _float, "seed": _int, "observer_stride": _int,
        "gronwall_constant": _float, **DATA_KEYS,
    },
    "weights": {"family": _str, "param": _float, "rmax": _float, "n": _int},
    "inequalities": {
        "alpha_sobolev": _float, "delta": _float, "alpha": _float, "rmax": _float, "n": _int,
        "horizons": _float_list, "dt_snap": _float, "tolerance_scale": _float, **ENSEMBLE_KEYS,
    },
    "strichartz": {
        "p": parse_exponent, "q": parse_exponent, "gamma": parse_exponent,
        "horizons": _float_list, "dt_snap": _float, **ENSEMBLE_KEYS,
    },
}


def flatten(d: dict, prefix: str = "") -> dict[str, Any]:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(flatten(v, key + "."))
        else:
            out[key] = v
    return out


def load_config(path, command: str) -> dict[str, Any]:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from None
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping of keys to values")
    return validate_keys(flatten(raw), command)


def validate_keys(flat: dict[str, Any], command: str) -> dict[str, Any]:
    schema = SCHEMAS[command]
    unknown = sorted(set(flat) - set(schema))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    out = {}
    for k, v in flat.items():
        try:
            out[k] = schema[k](v)
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"invalid value for {k}: {exc}") from None
    return out


def _data_spec(flat: dict, delta: float, seed: int, default: DataSpec) -> DataSpec:
    kw = {k.split(".", 1)[1]: v for k, v in flat.items() if k.startswith("data.")}
    try:
        return dataclasses.replace(default, delta=delta, seed=seed, **kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _ensemble(flat: dict) -> EnsembleSpec:
    kw = {k.split(".", 1)[1]: v for k, v in flat.items() if k.startswith("ensemble.")}
    try:
        return EnsembleSpec(**kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


@dataclasses.dataclass(frozen=True)
class SolveConfig:
    rmax: float = 8.0
    n: int = 2048
    integrator: IntegratorConfig = IntegratorConfig(dt=1e-3, t_final=1.0, observer_stride=10)
    data: DataSpec = DataSpec(kind="bump", amplitude=2.0, radius=1.5)
    alpha: float = 0.9
    alpha_tilde: float = 0.5
    c: tuple = (1e-2, 1e-3, 1e-3, 1e-4)


def solve_config(flat: dict) -> SolveConfig:
    d = SolveConfig()
    ic = d.integrator
    integ = IntegratorConfig(
        dt=flat.get("dt", ic.dt), t_final=flat.get("t_final", ic.t_final),
        observer_stride=flat.get("observer_stride", ic.observer_stride))
    rmax, n = flat.get("rmax", d.rmax), flat.get("n", d.n)
    _check_grid(rmax, n)
    alpha, at = flat.get("alpha", d.alpha), flat.get("alpha_tilde", d.alpha_tilde)
    if not 0 < at < alpha < 1:
        raise ConfigError(f"need 0 < alpha_tilde < alpha < 1, got alpha={alpha}, alpha_tilde={at}")
    c = tuple(flat.get(f"c{j + 1}", d.c[j]) for j in range(4))
    data = _data_spec(flat, flat.get("delta", d.data.delta), flat.get("seed", d.data.seed), d.data)
    return SolveConfig(rmax, n, integ, data, alpha, at, c)


def _check_grid(rmax, n):
    from .grid import RadialGrid
    try:
        RadialGrid(rmax, n)
    except ValueError as exc:
        raise ConfigError(f"rmax/n: {exc}") from None


def truncation_configs(flat: dict) -> list[TruncationConfig]:
    """One config per value of ``s`` (a scalar or a sweep list)."""
    d = TruncationConfig()
    kw = {k: flat[k] for k in ("delta", "delta1", "alpha", "alpha_tilde", "rmax", "n", "dt",
                               "t_final", "seed", "observer_stride", "gronwall_constant") if k in flat}
    kw["c"] = tuple(flat.get(f"c{j + 1}", d.c[j]) for j in range(4))
    delta, seed = kw.get("delta", d.delta), kw.get("seed", d.seed)
    kw["data"] = _data_spec(flat, delta, seed, d.data)
    s_vals = flat.get("s", d.s)
    s_vals = s_vals if isinstance(s_vals, list) else [s_vals]
    if not s_vals:
        raise ConfigError("s must be a number or a nonempty list")
    return [TruncationConfig(s=float(s), **kw) for s in s_vals]


def suite_config(flat: dict) -> SuiteConfig:
    d = SuiteConfig()
    kw = {k: flat[k] for k in ("alpha_sobolev", "delta", "alpha", "rmax", "n", "dt_snap",
                               "tolerance_scale") if k in flat}
    if "horizons" in flat:
        kw["horizons"] = tuple(flat["horizons"])
    cfg = d.replace(ensemble=_ensemble(flat), **kw)
    if not 0.5 < cfg.alpha_sobolev < 2:
        raise ConfigError(f"alpha_sobolev must lie in (1/2, 2), got {cfg.alpha_sobolev}")
    if cfg.tolerance_scale < 0:
        raise ConfigError("tolerance_scale must be nonnegative")
    if any(h <= 0 for h in cfg.horizons):
        raise ConfigError("horizons must be positive")
    if not cfg.dt_snap > 0:
        raise ConfigError("dt_snap must be positive")
    _check_grid(cfg.rmax, cfg.n)
    return cfg


def strichartz_config(flat: dict) -> tuple[StrichartzTriple, EnsembleSpec, list[float], float]:
    for k in ("p", "q", "gamma"):
        if k not in flat:
            raise ConfigError(f"missing config key: {k}")
    t = StrichartzTriple(flat["p"], flat["q"], flat["gamma"])
    horizons = flat.get("horizons", [10.0, 20.0, 40.0])
    if any(h <= 0 for h in horizons):
        raise ConfigError("horizons must be positive")
    dt_snap = flat.get("dt_snap", 0.02)
    if not dt_snap > 0:
        raise ConfigError("dt_snap must be positive")
    return t, _ensemble(flat), horizons, dt_snap
