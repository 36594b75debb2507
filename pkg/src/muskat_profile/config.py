"""Run configuration: a flat-sectioned key/value document.

Four sections -- grid, quadrature, solver, output -- with every key
spelled out below.  Unknown sections or keys are hard errors: silent
typo-tolerance is how numerics experiments rot.  A missing file path is
an error; an absent section or key falls back to the default.  The
parsed result carries both the live SolverConfig and a plain dict
snapshot for run manifests.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .errors import ParameterError
from .grids import make_log_grid
from .nonlinear import QuadratureSpec
from .solver import SolverConfig

__all__ = [
    "RunSettings",
    "DEFAULTS",
    "OUTPUT_ROOT_ENV",
    "default_settings",
    "load_settings",
    "settings_with_overrides",
    "resolve_output_root",
]

OUTPUT_ROOT_ENV = "MUSKAT_PROFILE_OUT"

# section -> key -> (type, default); the single source of truth for what
# a config file may contain
DEFAULTS: dict[str, dict[str, tuple[type, object]]] = {
    "grid": {
        "r_min": (float, 1e-3),
        "r_max": (float, 1e3),
        "r_nodes": (int, 241),
        "rho_min": (float, 1e-3),
        "rho_max": (float, 1e3),
        "rho_nodes": (int, 241),
    },
    "quadrature": {
        "a_min": (float, 1e-4),
        "a_max": (float, 1e4),
        "n_theta": (int, 64),
        "n_radial": (int, 256),
        "symmetrize": (bool, True),
    },
    "solver": {
        "s": (float, 0.05),
        "t1": (float, 1.75),
        "max_iterations": (int, 25),
        "tolerance": (float, 1e-12),
    },
    "output": {
        "root": (str, "runs"),
    },
}


@dataclass(frozen=True)
class RunSettings:
    """Parsed configuration: live objects plus the manifest snapshot."""

    solver: SolverConfig
    output_root: str
    snapshot: dict


def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ParameterError(f"not a boolean: {raw!r}")


def _coerce(section: str, key: str, raw: str):
    typ, _ = DEFAULTS[section][key]
    try:
        if typ is bool:
            return _parse_bool(raw)
        return typ(raw)
    except (ValueError, ParameterError) as exc:
        raise ParameterError(
            f"config [{section}] {key}: cannot parse {raw!r} as {typ.__name__}"
        ) from exc


def _settings_from_values(values: dict[str, dict[str, object]]) -> RunSettings:
    g = values["grid"]
    q = values["quadrature"]
    s = values["solver"]
    solver = SolverConfig(
        physical_grid=make_log_grid(g["r_min"], g["r_max"], g["r_nodes"]),
        frequency_grid=make_log_grid(g["rho_min"], g["rho_max"], g["rho_nodes"]),
        quadrature=QuadratureSpec(
            a_min=q["a_min"],
            a_max=q["a_max"],
            n_theta=q["n_theta"],
            n_radial=q["n_radial"],
            symmetrize=q["symmetrize"],
        ),
        max_iterations=s["max_iterations"],
        tolerance=s["tolerance"],
        s=s["s"],
        t1=s["t1"],
    )
    return RunSettings(
        solver=solver,
        output_root=str(values["output"]["root"]),
        snapshot={sec: dict(keys) for sec, keys in values.items()},
    )


def _default_values() -> dict[str, dict[str, object]]:
    return {
        sec: {key: default for key, (_t, default) in keys.items()}
        for sec, keys in DEFAULTS.items()
    }


def default_settings() -> RunSettings:
    return _settings_from_values(_default_values())


def load_settings(path: str | Path) -> RunSettings:
    """Parse a config file; unknown sections or keys raise ParameterError."""
    path = Path(path)
    if not path.is_file():
        raise ParameterError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ParameterError(f"config file {path}: {exc}") from exc
    values = _default_values()
    for section in parser.sections():
        if section not in DEFAULTS:
            raise ParameterError(
                f"config file {path}: unknown section [{section}] "
                f"(known: {', '.join(DEFAULTS)})"
            )
        for key, raw in parser.items(section):
            if key not in DEFAULTS[section]:
                raise ParameterError(
                    f"config file {path}: unknown key {key!r} in [{section}] "
                    f"(known: {', '.join(DEFAULTS[section])})"
                )
            values[section][key] = _coerce(section, key, raw)
    return _settings_from_values(values)


def settings_with_overrides(
    base: RunSettings,
    s: Optional[float] = None,
    t1: Optional[float] = None,
    tolerance: Optional[float] = None,
    output_root: Optional[str] = None,
) -> RunSettings:
    """Apply command-line overrides on top of parsed settings."""
    values = {sec: dict(keys) for sec, keys in base.snapshot.items()}
    if s is not None:
        values["solver"]["s"] = float(s)
    if t1 is not None:
        values["solver"]["t1"] = float(t1)
    if tolerance is not None:
        values["solver"]["tolerance"] = float(tolerance)
    if output_root is not None:
        values["output"]["root"] = str(output_root)
    return _settings_from_values(values)


def resolve_output_root(settings: RunSettings, cli_out: Optional[str]) -> str:
    """Precedence: --out flag, then environment variable, then config."""
    if cli_out:
        return cli_out
    env = os.environ.get(OUTPUT_ROOT_ENV)
    if env:
        return env
    return settings.output_root
