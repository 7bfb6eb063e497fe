"""
Run configuration read from a TOML file.

Every key is checked against a fixed schema before anything runs: unknown
keys and missing required keys raise :class:`ConfigError` naming the dotted
key path.  Relative file paths are resolved against the config file's
directory.
"""

from __future__ import annotations

import datetime as dt
import math
import os
from dataclasses import dataclass, field
from importlib import resources

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from .control import CostWeights, SweepConfig
from .errors import ConfigError, FracovidError, InvalidPopulation
from .fitting import FitConfig
from .model import COMPARTMENTS, ContactReductionSchedule, ModelParams, portugal_initial_conditions
from .sensitivity import R0_PARAMETERS
from .solver import TimeGrid, check_order

__all__ = ["RunConfig", "load_config", "parse_config", "default_config_path"]

REQUIRED = object()


def _real(x):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise TypeError("expected a number")
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("expected a finite number")
    return x


def _int(x):
    if isinstance(x, bool) or not isinstance(x, int):
        raise TypeError("expected an integer")
    return x


def _bool(x):
    if not isinstance(x, bool):
        raise TypeError("expected true or false")
    return x


def _str(x):
    if not isinstance(x, str):
        raise TypeError("expected a string")
    return x


def _date(x):
    if isinstance(x, dt.date) and not isinstance(x, dt.datetime):
        return x
    if isinstance(x, str):
        return dt.date.fromisoformat(x)
    raise TypeError("expected a date")


def _reals(x):
    if not isinstance(x, list) or not x:
        raise TypeError("expected a non-empty list of numbers")
    return [_real(v) for v in x]


def _strs(x):
    if not isinstance(x, list):
        raise TypeError("expected a list of strings")
    return [_str(v) for v in x]


def _pairs(x):
    if not isinstance(x, list) or not x:
        raise TypeError("expected a non-empty list of [day, level] pairs")
    out = []
    for p in x:
        if not isinstance(p, list) or len(p) != 2:
            raise TypeError("each breakpoint must be [day, level]")
        out.append((_real(p[0]), _real(p[1])))
    return out


_PARAM_KEYS = {k: (_real, getattr(ModelParams(), k)) for k in ModelParams.__dataclass_fields__}

SCHEMA = {
    "alpha": (_real, REQUIRED),
    "output_dir": (_str, "output"),
    "model": {**_PARAM_KEYS, "variant": (_str, "corrected")},
    "grid": {"t0": (_real, 0.0), "tf": (_real, 52.0), "h": (_real, 0.1)},
    "initial": {
        "preset": (_str, "portugal"),
        "fatalities_in_balance": (_bool, True),
        **{c: (_real, None) for c in COMPARTMENTS},
    },
    "schedule": {
        "interpolation": (_str, "piecewise-linear"),
        "breakpoints": (_pairs, [[0.0, 0.0]]),
    },
    "control": {
        "alphas": (_reals, [1.0, 0.99]),
        "v_max": (_real, 0.003),
        "m_max": (_real, REQUIRED),
        "relaxation": (_real, 0.5),
        "tolerance": (_real, 1e-3),
        "max_iterations": (_int, 200),
        "k1": (_real, 1.0),
        "k2": (_real, 5.0),
        "k3": (_real, 1.0),
        "k4": (_real, 10.0),
        "C1": (_real, 1.0),
        "C2": (_real, 1.0),
        "report_scale": (_real, 1.0),
    },
    "data": {
        "path": (_str, REQUIRED),
        "start": (_date, dt.date(2020, 12, 27)),
        "end": (_date, dt.date(2021, 2, 16)),
        "alpha0": (_real, 1.0),
        "s0": (_real, 20.0),
        "restart_alphas": (_reals, [1.0, 0.99, 0.95, 0.9]),
        "max_iter": (_int, 400),
    },
    "sensitivity": {
        "alphas": (_reals, [round(0.5 + 0.05 * k, 2) for k in range(11)]),
        "parameters": (_strs, list(R0_PARAMETERS)),
    },
}

# sections that are only needed by some commands
OPTIONAL_SECTIONS = ("control", "data", "sensitivity")


def _check(table, schema, prefix, require):
    out = {}
    for key in table:
        if key not in schema:
            raise ConfigError("unknown key", key=prefix + key)
    for key, spec in schema.items():
        path = prefix + key
        if isinstance(spec, dict):
            sub = table.get(key, {})
            if not isinstance(sub, dict):
                raise ConfigError("expected a table", key=path)
            present = key in table
            out[key] = _check(sub, spec, path + ".", require and (present or key not in OPTIONAL_SECTIONS))
            out[key]["__present__"] = present
            continue
        conv, default = spec
        if key in table:
            try:
                out[key] = conv(table[key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(str(exc), key=path) from None
        elif default is REQUIRED:
            if require:
                raise ConfigError("missing required key", key=path)
            out[key] = None
        else:
            out[key] = default
    return out


@dataclass
class RunConfig:
    alpha: float
    params: ModelParams
    variant: str
    grid: TimeGrid
    initial_state: np.ndarray
    schedule: ContactReductionSchedule
    output_dir: str
    raw: dict = field(repr=False, default_factory=dict)
    base_dir: str = "."

    # control block
    @property
    def has_control(self):
        return self.raw["control"]["__present__"]

    @property
    def control_alphas(self):
        return [check_order(a) for a in self.raw["control"]["alphas"]]

    def sweep_config(self, use_v=True, use_m=True) -> SweepConfig:
        c = self.raw["control"]
        if c["m_max"] is None:
            raise ConfigError("missing required key", key="control.m_max")
        try:
            return SweepConfig(v_max=c["v_max"], m_max=c["m_max"], relaxation=c["relaxation"],
                               tolerance=c["tolerance"], max_iterations=c["max_iterations"],
                               use_v=use_v, use_m=use_m)
        except FracovidError as exc:
            raise ConfigError(str(exc), key="control") from None

    def weights(self) -> CostWeights:
        c = self.raw["control"]
        try:
            return CostWeights(c["k1"], c["k2"], c["k3"], c["k4"])
        except FracovidError as exc:
            raise ConfigError(str(exc), key="control") from None

    @property
    def cost_coefficients(self):
        return self.raw["control"]["C1"], self.raw["control"]["C2"]

    @property
    def report_scale(self):
        return self.raw["control"]["report_scale"]

    # data block
    @property
    def data_path(self):
        p = self.raw["data"]["path"]
        if p is None:
            raise ConfigError("missing required key", key="data.path")
        return p if os.path.isabs(p) else os.path.join(self.base_dir, p)

    def fit_config(self) -> FitConfig:
        d = self.raw["data"]
        if d["start"] > d["end"]:
            raise ConfigError("window start after end", key="data.start")
        return FitConfig(params=self.params, schedule=self.schedule, start=d["start"], end=d["end"],
                         h=self.grid.h, initial_state=tuple(self.initial_state), alpha0=d["alpha0"],
                         s0=d["s0"], restart_alphas=tuple(d["restart_alphas"]),
                         max_iter=d["max_iter"], variant=self.variant)

    # sensitivity block
    @property
    def sensitivity_alphas(self):
        return [check_order(a) for a in self.raw["sensitivity"]["alphas"]]

    @property
    def sensitivity_parameters(self):
        names = self.raw["sensitivity"]["parameters"]
        for n in names:
            if n not in R0_PARAMETERS and n not in ("kappa", "N"):
                raise ConfigError(f"unknown parameter {n!r}", key="sensitivity.parameters")
        return names


def _wrap(key, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except InvalidPopulation:
        raise
    except FracovidError as exc:
        raise ConfigError(str(exc), key=key) from None


def parse_config(table: dict, base_dir=".") -> RunConfig:
    raw = _check(table, SCHEMA, "", True)
    alpha = _wrap("alpha", check_order, raw["alpha"])
    m = {k: v for k, v in raw["model"].items() if k not in ("variant", "__present__")}
    params = _wrap("model", ModelParams, **m)
    variant = raw["model"]["variant"]
    if variant not in ("corrected", "original"):
        raise ConfigError(f"unknown variant {variant!r}", key="model.variant")
    g = raw["grid"]
    grid = _wrap("grid", TimeGrid, g["t0"], g["tf"], g["h"])

    ini = raw["initial"]
    given = [c for c in COMPARTMENTS if ini[c] is not None]
    if ini["preset"] == "portugal":
        if given:
            raise ConfigError("explicit compartments conflict with preset", key="initial." + given[0])
        y0 = portugal_initial_conditions(params.N, ini["fatalities_in_balance"]).as_array()
    elif ini["preset"] == "explicit":
        missing = [c for c in COMPARTMENTS if ini[c] is None]
        if missing:
            raise ConfigError("missing required key", key="initial." + missing[0])
        y0 = np.array([ini[c] for c in COMPARTMENTS])
        if np.any(y0 < 0):
            raise ConfigError("compartments must be non-negative", key="initial")
    else:
        raise ConfigError(f"unknown preset {ini['preset']!r}", key="initial.preset")

    s = raw["schedule"]
    schedule = _wrap("schedule", ContactReductionSchedule, s["breakpoints"], s["interpolation"])
    return RunConfig(alpha, params, variant, grid, y0, schedule, raw["output_dir"], raw, base_dir)


def load_config(path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            table = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config file: {exc}") from None
    return parse_config(table, os.path.dirname(os.path.abspath(path)))


def default_config_path() -> str:
    return str(resources.files("fracovid") / "data" / "third_wave.toml")
