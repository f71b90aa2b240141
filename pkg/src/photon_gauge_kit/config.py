"""Run configuration: TOML files with a versioned, closed schema.

Every key has a default (see ``DEFAULTS``); a config file only lists what
it changes.  Unknown sections or keys, wrong types and out-of-range values
are reported with the offending dotted key.  ``--set section.key=value``
overrides are parsed as TOML literals, falling back to bare strings.
"""

from __future__ import annotations

import copy
import sys
from dataclasses import dataclass

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = ["ConfigError", "RunConfig", "DEFAULTS", "SCHEMA_VERSION", "load_config", "parse_gauge"]

SCHEMA_VERSION = 1

DEFAULTS = {
    "schema_version": SCHEMA_VERSION,
    "basis": {
        "m_values": [-2, -1, 0, 1, 2],
        "lam": [1, -1],
        "n_theta": 65,
    },
    "gauge": {
        "gauges": ["zero", "linear:1", "linear:-1", "linear:2"],
        "p": 1.0,
        "n_theta": 19,
        "n_phi": 16,
        "eps_string": 1e-6,
        "flux_eps": [0.04, 0.02, 0.01],
        "curl_steps": [0.02, 0.01, 0.005, 0.0025],
        "curl_points": 10,
        "seed": 20240611,
    },
    "operators": {
        "gauges": ["zero", "linear:1", "linear:-1"],
        "lam": 1,
        "alpha": 0.5,
        "coarse": [32, 24, 32],
        "fine": [64, 48, 32],
        "p_min": 0.25,
        "p_max": 8.75,
        "p_center": 4.5,
        "width": 0.6,
        "tolerance": 1e-5,
        "order_target": 2.0,
        "order_window": 0.3,
        "covariance_table": "",
    },
    "field": {
        "m": 1,
        "lam": 1,
        "spectrum": "exponential",
        "p0": 1.0,
        "spectrum_alpha": 0.5,
        "angular": "sin_power",
        "power": -1,
        "l_max": 0,
        "r": [0.0, 4.0, 17],
        "n_theta": 13,
        "n_phi": 16,
        "t": 0.0,
        "ring_p0": [0.5, 1.0, 2.0, 4.0],
        "ring_r": [0.0, 8.0, 81],
        "compare_gauge": "zero",
    },
    "verify": {
        "quick": False,
    },
}

_INT_KEYS = {"n_theta", "n_phi", "curl_points", "seed", "m", "lam", "l_max", "power"}
_BOUNDS = {
    ("basis", "n_theta"): (2, 4097),
    ("gauge", "n_theta"): (3, 1025),
    ("gauge", "n_phi"): (4, 1024),
    ("gauge", "curl_points"): (1, 1000),
    ("field", "n_theta"): (2, 1025),
    ("field", "n_phi"): (4, 1024),
    ("field", "l_max"): (0, 256),
    ("field", "lam"): (-1, 1),
}
_POSITIVE = {
    ("gauge", "p"), ("gauge", "eps_string"), ("operators", "tolerance"),
    ("operators", "order_window"), ("operators", "p_min"), ("operators", "p_max"),
    ("operators", "width"), ("field", "p0"), ("operators", "p_center"),
}


class ConfigError(ValueError):
    """Invalid configuration, with the dotted key that caused it."""


@dataclass(frozen=True)
class RunConfig:
    data: dict
    source: str = "<defaults>"

    def section(self, name):
        return self.data[name]

    def __getitem__(self, name):
        return self.data[name]

    def echo(self):
        return copy.deepcopy(self.data)


def _type_ok(default, value):
    if isinstance(default, bool):
        return isinstance(value, bool)
    if isinstance(default, int):
        return isinstance(value, int) and not isinstance(value, bool)
    if isinstance(default, float):
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if isinstance(default, str):
        return isinstance(value, str)
    if isinstance(default, list):
        return isinstance(value, list)
    return True


def _merge(base, update, where):
    for key, value in update.items():
        dotted = f"{where}.{key}" if where else key
        if key not in base:
            raise ConfigError(f"unknown key '{dotted}'")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"'{dotted}' must be a table")
            _merge(base[key], value, dotted)
            continue
        if not _type_ok(base[key], value):
            raise ConfigError(f"'{dotted}' expects {type(base[key]).__name__}, got {value!r}")
        base[key] = float(value) if isinstance(base[key], float) else value


def _parse_value(text):
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def _apply_override(data, item):
    if "=" not in item:
        raise ConfigError(f"override '{item}' is not of the form key=value")
    key, text = item.split("=", 1)
    parts = key.strip().split(".")
    nested = _parse_value(text.strip())
    for part in reversed(parts):
        nested = {part: nested}
    _merge(data, nested, "")


def parse_gauge(text):
    """'zero', 'linear:M' or 'table:PATH' into a GaugeSpec."""
    from .gauge import GaugeSpec

    if text == "zero":
        return GaugeSpec.zero()
    kind, _, arg = text.partition(":")
    if kind == "linear":
        try:
            return GaugeSpec.linear(int(arg))
        except ValueError:
            raise ConfigError(f"bad gauge '{text}': linear needs an integer m") from None
    if kind == "table":
        try:
            return GaugeSpec.from_csv(arg)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"bad gauge table '{arg}': {exc}") from None
    raise ConfigError(f"bad gauge '{text}' (use zero, linear:M or table:PATH)")


def _validate(data):
    if data["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(
            f"schema_version {data['schema_version']} is not supported (expected {SCHEMA_VERSION})")
    for section, keys in data.items():
        if not isinstance(keys, dict):
            continue
        for key, value in keys.items():
            where = f"{section}.{key}"
            if key in _INT_KEYS and isinstance(value, float):
                raise ConfigError(f"'{where}' must be an integer")
            if (section, key) in _BOUNDS:
                lo, hi = _BOUNDS[(section, key)]
                if not lo <= value <= hi:
                    raise ConfigError(f"'{where}' = {value} outside [{lo}, {hi}]")
            if (section, key) in _POSITIVE and not value > 0:
                raise ConfigError(f"'{where}' must be positive")
    if data["field"]["lam"] not in (-1, 0, 1):
        raise ConfigError("'field.lam' must be -1, 0 or 1")
    if data["operators"]["lam"] not in (-1, 1):
        raise ConfigError("'operators.lam' must be -1 or 1")
    for name in ("coarse", "fine"):
        res = data["operators"][name]
        if len(res) != 3 or not all(isinstance(v, int) for v in res):
            raise ConfigError(f"'operators.{name}' must be [n_p, n_theta, n_phi]")
        n_p, n_t, n_f = res
        if not (5 <= n_p <= 512 and 8 <= n_t <= 512 and 8 <= n_f <= 512 and n_f % 2 == 0):
            raise ConfigError(f"'operators.{name}' = {res} outside the supported grid sizes")
    if data["operators"]["p_min"] >= data["operators"]["p_max"]:
        raise ConfigError("'operators.p_min' must be below 'operators.p_max'")
    for key in ("r", "ring_r"):
        spec = data["field"][key]
        if len(spec) != 3 or spec[0] < 0 or spec[1] <= spec[0] or int(spec[2]) != spec[2] \
                or spec[2] < 2:
            raise ConfigError(f"'field.{key}' must be [start >= 0, stop > start, count >= 2]")
    if data["field"]["spectrum"] not in ("exponential", "power_law_cutoff"):
        raise ConfigError("'field.spectrum' must be exponential or power_law_cutoff")
    if data["field"]["angular"] not in ("one", "sin_theta", "sin_power"):
        raise ConfigError("'field.angular' must be one, sin_theta or sin_power")
    for g in data["gauge"]["gauges"] + data["operators"]["gauges"] + [data["field"]["compare_gauge"]]:
        if not (g == "zero" or g.startswith("linear:") or g.startswith("table:")):
            raise ConfigError(f"bad gauge '{g}' (use zero, linear:M or table:PATH)")
    if any(not e > 0 for e in data["gauge"]["flux_eps"]) or len(data["gauge"]["flux_eps"]) < 2:
        raise ConfigError("'gauge.flux_eps' needs at least two positive values")
    if any(not h > 0 for h in data["gauge"]["curl_steps"]) or len(data["gauge"]["curl_steps"]) < 2:
        raise ConfigError("'gauge.curl_steps' needs at least two positive values")


def load_config(path=None, overrides=()):
    """Defaults, then the TOML file at ``path`` (if any), then overrides."""
    data = copy.deepcopy(DEFAULTS)
    source = "<defaults>"
    if path is not None:
        source = str(path)
        try:
            with open(path, "rb") as fh:
                loaded = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        if "schema_version" not in loaded:
            raise ConfigError(f"{path}: missing 'schema_version'")
        _merge(data, loaded, "")
    for item in overrides:
        _apply_override(data, item)
    _validate(data)
    return RunConfig(data, source)
