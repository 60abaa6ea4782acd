"""Structured-text configuration: parsing, validation, fingerprints.

Format is INI-like (``key = value`` under ``[section]`` headers), UTF-8,
with a fixed schema; unknown sections or keys are errors.  Fingerprints are
the SHA-256 of the canonicalized text (sections and keys sorted, whitespace
collapsed), so identical configurations hash identically everywhere.
"""

from __future__ import annotations

import configparser
import hashlib
import math
from fractions import Fraction

import numpy as np

from .errors import ConfigError
from .exprs import parse_boundary_expr, parse_field_expr
from .geometry import DomainSpec
from .norms import NormSpec
from .particles import SimConfig
from .pde import PDEConfig

_REQUIRED = object()


def _parse_times(text: str):
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"time range must be start:step:stop, got {text!r}")
        start, step, stop = (float(p) for p in parts)
        if step <= 0:
            raise ConfigError("time range step must be positive")
        count = int(round((stop - start) / step))
        return tuple(round(start + i * step, 12) for i in range(count + 1))
    return tuple(round(float(p), 12) for p in text.split(","))


def _parse_m(text: str):
    text = text.strip().lower()
    if text == "auto":
        return "auto"
    if text in ("inf", "infinity"):
        return math.inf
    return float(text)


def _parse_fraction(text: str) -> Fraction:
    return Fraction(text.strip())


def _parse_norms(text: str):
    specs = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if token == "sup":
            specs.append(("sup", 0.0))
        elif token.startswith("lp(") and token.endswith(")"):
            specs.append(("lp", float(token[3:-1])))
        elif token.startswith("sobolev(") and token.endswith(")"):
            specs.append(("sobolev", float(token[8:-1])))
        else:
            raise ConfigError(f"unknown norm kind {token!r}")
    if not specs:
        raise ConfigError("at least one norm kind is required")
    return tuple(specs)


def _parse_grid(text: str):
    text = text.strip().lower()
    return None if text == "auto" else int(text)


def _parse_int_list(text: str):
    return tuple(int(p) for p in text.split(","))


SCHEMA = {
    "run": {
        "domain": (str.strip, "unit_square"),
        "out": (str.strip, "./out"),
    },
    "sim": {
        "n": (int, _REQUIRED),
        "nu": (float, _REQUIRED),
        "m": (_parse_m, _REQUIRED),
        "c_epsilon": (float, 0.5),
        "k_sub": (int, 4),
        "grid_g": (_parse_grid, None),
        "seed": (int, 0),
        "output_times": (_parse_times, tuple(np.round(np.arange(0.0, 1.01, 0.1), 10))),
        "deposition": (str.strip, "nearest"),
        "snapshot_mode": (str.strip, "split"),
    },
    "data": {
        "omega0": (str.strip, _REQUIRED),
        "g": (str.strip, _REQUIRED),
    },
    "pde": {
        "j": (int, 64),
        "dt": (_parse_fraction, Fraction(1, 1280)),
        "mode": (str.strip, "coupled"),
    },
    "sweep": {
        "n_list": (_parse_int_list, (8, 16, 32)),
        "seeds": (int, 10),
    },
    "norms": {
        "kinds": (_parse_norms, (("lp", 2.0),)),
    },
}


def load_config_text(text: str) -> dict:
    """Parse and validate config text into {section: {key: typed value}}."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None
    raw = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        raw[section] = {}
        for key, value in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown config key [{section}] {key}")
            raw[section][key] = value
    resolved = {}
    for section, keys in SCHEMA.items():
        resolved[section] = {}
        for key, (parse, default) in keys.items():
            if section in raw and key in raw[section]:
                try:
                    resolved[section][key] = parse(raw[section][key])
                except ConfigError:
                    raise
                except Exception as exc:
                    raise ConfigError(
                        f"bad value for [{section}] {key}: {raw[section][key]!r} ({exc})"
                    ) from None
            elif default is _REQUIRED:
                raise ConfigError(f"missing required config key [{section}] {key}")
            else:
                resolved[section][key] = default
    resolved["_raw"] = raw
    return resolved


def load_config(path: str) -> dict:
    with open(path, encoding="utf-8") as f:
        text = f.read()
    cfg = load_config_text(text)
    cfg["_text"] = text
    return cfg


def canonical_text(cfg: dict) -> str:
    """Normalized rendering of the resolved configuration (defaults included)."""
    lines = []
    for section in sorted(SCHEMA):
        lines.append(f"[{section}]")
        for key in sorted(SCHEMA[section]):
            value = cfg[section][key]
            if isinstance(value, tuple):
                rendered = ",".join(str(v) for v in value)
            else:
                rendered = str(value)
            lines.append(f"{key} = {rendered}")
    return "\n".join(lines) + "\n"


def fingerprint(cfg: dict) -> str:
    return hashlib.sha256(canonical_text(cfg).encode("utf-8")).hexdigest()[:16]


def pde_fingerprint(cfg: dict, output_times) -> str:
    payload = "|".join(
        [
            cfg["run"]["domain"],
            repr(cfg["sim"]["nu"]),
            cfg["data"]["omega0"],
            cfg["data"]["g"],
            str(cfg["pde"]["j"]),
            str(cfg["pde"]["dt"]),
            cfg["pde"]["mode"],
            ",".join(repr(float(t)) for t in output_times),
        ]
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def norm_specs(cfg: dict) -> list[NormSpec]:
    nu = cfg["sim"]["nu"]
    out = []
    for kind, param in cfg["norms"]["kinds"]:
        if kind == "sup":
            out.append(NormSpec("sup"))
        elif kind == "lp":
            out.append(NormSpec("lp", p=param))
        else:
            out.append(NormSpec("sobolev", alpha=param, nu=nu))
    return out


def build_sim_config(cfg: dict, n=None, seed=None, m=None) -> SimConfig:
    sim = cfg["sim"]
    m_value = m if m is not None else sim["m"]
    if m_value == "auto":
        raise ConfigError("cutoff bound is 'auto' but no resolved value was supplied")
    return SimConfig(
        n=n if n is not None else sim["n"],
        nu=sim["nu"],
        m=m_value,
        omega0=parse_field_expr(cfg["data"]["omega0"]),
        g=parse_boundary_expr(cfg["data"]["g"]),
        c_epsilon=sim["c_epsilon"],
        k_sub=sim["k_sub"],
        grid_g=sim["grid_g"],
        seed=seed if seed is not None else sim["seed"],
        output_times=sim["output_times"],
        deposition=sim["deposition"],
        snapshot_mode=sim["snapshot_mode"],
        domain=DomainSpec(cfg["run"]["domain"]),
    )


def build_pde_config(cfg: dict, output_times=None, grid_g=None, m=math.inf) -> PDEConfig:
    if cfg["run"]["domain"] != "unit_square":
        raise ConfigError("the spectral reference solver supports only the unit square")
    return PDEConfig(
        j=cfg["pde"]["j"],
        dt=cfg["pde"]["dt"],
        nu=cfg["sim"]["nu"],
        m=m,
        omega0=parse_field_expr(cfg["data"]["omega0"]),
        g=parse_boundary_expr(cfg["data"]["g"]),
        output_times=output_times if output_times is not None else cfg["sim"]["output_times"],
        grid_g=grid_g if grid_g is not None else 256,
        mode=cfg["pde"]["mode"],
    )
