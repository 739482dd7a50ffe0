"""Run configuration: key-value config files, surface specs, validation.

Config files are plain ``key = value`` lines ('#' starts a comment).
Values are numbers, tags, or comma-separated number lists (vertices are a
flat list).  Every command validates against its schema and rejects
unknown keys before any computation runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import SurfaceChart, make_builtin_surface

__all__ = ["ConfigError", "RunConfig", "parse_config_file",
           "parse_surface_spec", "build_surface", "COMMAND_SCHEMAS"]


class ConfigError(ValueError):
    """Invalid or unknown configuration; maps to exit code 2."""


def _as_bool(v):
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {v!r}")


def _as_float(v):
    s = str(v).strip().lower()
    if s in ("inf", "infinity"):
        return math.inf
    return float(v)


def _as_float_list(v):
    if isinstance(v, (list, tuple, np.ndarray)):
        return [float(x) for x in v]
    return [float(x) for x in str(v).replace(";", ",").split(",") if x.strip()]


_PARSERS = {
    "str": str,
    "int": lambda v: int(str(v)),
    "float": _as_float,
    "bool": _as_bool,
    "floats": _as_float_list,
}

# key -> (type tag, default); None defaults mean "unset"
_COMMON = {
    "out": ("str", None),
    "figures": ("bool", True),
    "threads": ("int", None),
    "seed": ("int", 0),
}

COMMAND_SCHEMAS = {
    "decay": {
        **_COMMON,
        "surface": ("str", "circle"),
        "vertices": ("floats", None),
        "p": ("float", 2.0),
        "rho_min": ("float", 32.0),
        "levels": ("int", 7),
        "direction_count": ("int", None),
        "tol": ("float", 1e-4),
        "slope_band": ("float", 0.1),
        "ray_direction": ("floats", None),
        "family": ("str", None),
        "s_counts": ("int", 8),
        "s_box_half": ("float", 0.06),
        "frequency_direction": ("floats", None),
    },
    "probe": {
        **_COMMON,
        "surface": ("str", "polygon"),
        "vertices": ("floats", None),
        "averaging": ("str", "rotations"),
        "family_shape": ("str", "ball"),
        "p": ("float", 1.5),
        "q": ("float", 3.0),
        "deltas": ("floats", [2.0**-3, 2.0**-4, 2.0**-5, 2.0**-6, 2.0**-7]),
        "grid_div": ("int", 4),
        "theta_count": ("int", 16),
        "center": ("floats", [0.0, 0.0]),
        "plate_axis": ("floats", [1.0, 0.0]),
        "plate_length": ("float", 1.0),
        "expect": ("str", None),
        "expected_rate": ("float", None),
        "rate_band": ("float", 0.1),
        "theorem": ("str", None),
        "beta": ("float", None),
    },
    "check": {
        **_COMMON,
        "condition": ("str", None),
        "case": ("str", None),
        "tol": ("float", 1e-8),
        "invert": ("bool", False),
        "expect": ("str", "pass"),
    },
    "apply": {
        **_COMMON,
        "surface": ("str", "circle"),
        "vertices": ("floats", None),
        "field": ("str", "gaussian"),
        "sigma": ("float", 0.25),
        "field_radius": ("float", 0.2),
        "center": ("floats", None),
        "box_half": ("float", 1.5),
        "grid": ("int", 128),
        "method": ("str", "fft"),
        "measure": ("str", "chart"),
        "rotation_count": ("int", 0),
    },
    "mu-hat": {
        **_COMMON,
        "surface": ("str", "circle"),
        "vertices": ("floats", None),
        "rho_min": ("float", 1.0),
        "levels": ("int", 7),
        "direction_count": ("int", 64),
        "tol": ("float", 1e-6),
    },
}


@dataclass
class RunConfig:
    command: str
    values: dict

    def __getitem__(self, key):
        return self.values[key]

    def resolved(self) -> dict:
        out = {}
        for k, v in sorted(self.values.items()):
            if isinstance(v, float) and math.isinf(v):
                out[k] = "inf"
            else:
                out[k] = v
        return out

    @staticmethod
    def build(command: str, file_values: dict | None = None,
              cli_values: dict | None = None) -> "RunConfig":
        """Merge defaults < config file < command line, validating keys."""
        if command not in COMMAND_SCHEMAS:
            raise ConfigError(f"unknown command {command!r}")
        schema = COMMAND_SCHEMAS[command]
        merged = {k: default for k, (_, default) in schema.items()}
        for source in (file_values or {}, cli_values or {}):
            for key, raw in source.items():
                if raw is None:
                    continue
                if key == "command":
                    if str(raw) != command:
                        raise ConfigError(
                            f"config file is for command {raw!r}, not {command!r}")
                    continue
                if key not in schema:
                    raise ConfigError(f"unknown config key {key!r} for "
                                      f"command {command!r}")
                kind = schema[key][0]
                try:
                    merged[key] = _PARSERS[kind](raw)
                except ConfigError:
                    raise
                except Exception as exc:
                    raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc
        return RunConfig(command=command, values=merged)


def parse_config_file(path) -> dict:
    """Read ``key = value`` lines; raises ConfigError on malformed input."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, val = body.split("=", 1)
            out[key.strip()] = val.strip()
    return out


def parse_surface_spec(spec: str) -> tuple[str, dict]:
    """Split 'name' or 'name:key=val,key=val' into the name and parameters."""
    if ":" not in spec:
        return spec.strip(), {}
    name, rest = spec.split(":", 1)
    params = {}
    for item in rest.split(","):
        if not item.strip():
            continue
        if "=" not in item:
            raise ConfigError(f"bad surface parameter {item!r} in {spec!r}")
        k, v = item.split("=", 1)
        try:
            params[k.strip()] = float(v)
        except ValueError:
            raise ConfigError(f"bad surface parameter value {v!r} in {spec!r}")
    return name.strip(), params


_UNIT_SQUARE = [[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]]


def build_surface(spec: str, vertices=None) -> SurfaceChart:
    """Construct the chart named by a surface spec string.

    Names: circle, polygon (uses ``vertices``, default the unit square),
    segment, parabola (alias parabola_graph), beta (alias beta_surface,
    needs n and beta), sphere, moment (alias moment_curve_segment).
    """
    name, params = parse_surface_spec(spec)
    aliases = {"beta": "beta_surface", "parabola": "parabola_graph",
               "moment": "moment_curve_segment"}
    name = aliases.get(name, name)
    intkeys = {"n"}
    kwargs = {k: (int(v) if k in intkeys else v) for k, v in params.items()}
    try:
        if name == "polygon":
            verts = (np.asarray(vertices, float).reshape(-1, 2)
                     if vertices is not None else np.asarray(_UNIT_SQUARE))
            return make_builtin_surface("polygon", vertices=verts)
        return make_builtin_surface(name, **kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"cannot build surface {spec!r}: {exc}") from exc
