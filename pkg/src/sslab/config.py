"""INI-style run configuration.

Each file holds up to four sections; every key is optional and falls back to
the default shown below.

``[simulation]``
    Any :class:`sslab.core.SimConfig` field: beta, gamma, amplitude_A,
    length_L, n_points, dt, ratio_C, method, boundary, splitting, noise_std,
    noise_complex, rng_seed, t_final, snapshot_interval, blowup_factor.
``[growth]``
    C_values (comma list), n_points_values (comma list), k_band, count, dX.
``[eigen]``
    D or C, epsilon (default dx/2 of the [simulation] grid), dX, count,
    Lambda0_re, Lambda0_im, auto_shift, n_modes (profiles written).
``[wkb]``
    D_min, D_max, D_count, n_min, n_max, method (integral | closed_form).

Unknown sections or keys are errors.
"""

from __future__ import annotations

import configparser
import dataclasses
from importlib import resources
from pathlib import Path

from .core import ConfigurationError, SimConfig


def _bool(s):
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _floats(s):
    return [float(x) for x in s.replace(",", " ").split()]


def _ints(s):
    return [int(x) for x in s.replace(",", " ").split()]


def _opt_float(s):
    return None if s.strip().lower() in ("", "none") else float(s)


SIM_TYPES = {
    "beta": float,
    "gamma": float,
    "amplitude_A": float,
    "length_L": float,
    "n_points": int,
    "dt": _opt_float,
    "ratio_C": _opt_float,
    "method": str,
    "boundary": str,
    "splitting": str,
    "noise_std": float,
    "noise_complex": _bool,
    "rng_seed": int,
    "t_final": float,
    "snapshot_interval": float,
    "blowup_factor": float,
}

SCHEMA = {
    "simulation": SIM_TYPES,
    "growth": {
        "C_values": _floats,
        "n_points_values": _ints,
        "k_band": float,
        "count": int,
        "dX": float,
    },
    "eigen": {
        "D": float,
        "C": float,
        "epsilon": float,
        "dX": float,
        "count": int,
        "Lambda0_re": float,
        "Lambda0_im": float,
        "auto_shift": _bool,
        "n_modes": int,
    },
    "wkb": {
        "D_min": float,
        "D_max": float,
        "D_count": int,
        "n_min": int,
        "n_max": int,
        "method": str,
    },
}

DEFAULTS = {
    "simulation": {},
    "growth": {"C_values": [1.05, 1.2, 1.4], "n_points_values": [512], "k_band": 0.9, "count": 24, "dX": 0.1},
    "eigen": {"dX": 0.1, "count": 24, "Lambda0_re": 0.0, "Lambda0_im": 0.0, "auto_shift": True, "n_modes": 4},
    "wkb": {"D_min": 0.005, "D_max": 0.02, "D_count": 151, "n_min": 0, "n_max": 40, "method": "integral"},
}


def _parse_text(text, source):
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigurationError(f"{source}: {exc}") from exc
    out = {name: dict(vals) for name, vals in DEFAULTS.items()}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigurationError(f"{source}: unknown section [{section}]")
        types = SCHEMA[section]
        for key, raw in parser.items(section):
            if key not in types:
                raise ConfigurationError(f"{source}: unknown key '{key}' in [{section}]")
            try:
                out[section][key] = types[key](raw)
            except ValueError as exc:
                raise ConfigurationError(f"{source}: bad value for '{key}': {exc}") from exc
    return out


def bundled_configs() -> list[str]:
    root = resources.files("sslab") / "configs"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".ini"))


def load_config(path) -> dict:
    """Parse a config file path, or the name of a bundled config (e.g. ``fig3``)."""
    p = Path(path)
    if p.is_file():
        return _parse_text(p.read_text(), str(p))
    if p.suffix == "" and p.name in bundled_configs():
        res = resources.files("sslab") / "configs" / f"{p.name}.ini"
        return _parse_text(res.read_text(), f"bundled:{p.name}")
    raise ConfigurationError(f"config file not found: {path}")


def sim_config(sections: dict, **overrides) -> SimConfig:
    kw = dict(sections["simulation"])
    if "dt" in overrides or "ratio_C" in overrides:
        kw.pop("dt", None)
        kw.pop("ratio_C", None)
    kw.update(overrides)
    if kw.get("dt") is None and kw.get("ratio_C") is None:
        kw["ratio_C"] = 1.05
    try:
        return SimConfig(**kw)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from exc


def sim_config_dict(cfg: SimConfig) -> dict:
    return {f.name: getattr(cfg, f.name) for f in dataclasses.fields(cfg) if f.name != "grid"}
