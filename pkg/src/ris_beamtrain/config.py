"""
INI-style experiment configuration.

The accepted keys, their types and defaults live in :data:`SCHEMA`; the
defaults reproduce the published simulation setup. ``configs/SCHEMA.md``
documents the same table for humans.
"""

import configparser
import math
import os
from dataclasses import dataclass

from .channel import ScenarioConfig
from .codebook import is_power_of_two
from .experiment import ExperimentPlan, parse_scheme
from .search import SearchConfig


class ConfigError(ValueError):
    """Invalid or unreadable configuration."""


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _schemes(text):
    names = tuple(s.strip() for s in text.split(",") if s.strip())
    for n in names:
        parse_scheme(n)
    return names


def _snr_points(text):
    """Comma list of dB values, or ``start:stop:step`` with ``stop`` inclusive."""
    text = text.strip()
    if ":" in text:
        start, stop, step = (float(x) for x in text.split(":"))
        if step <= 0:
            raise ValueError("step must be positive")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + i * step, 10) for i in range(n))
    return tuple(float(x) for x in text.split(",") if x.strip())


# section -> key -> (parser, default); scenario keys map onto ScenarioConfig fields
SCHEMA = {
    "scenario": {
        "carrier_freq": (float, 30e9),
        "d_ui": (float, 2.0),
        "d_ia": (float, 10.0),
        "zeta0_db": (float, -62.0),
        "delta_ui": (float, 2.3),
        "delta_ia": (float, 2.0),
        "kappa_ui_db": (float, 10.0),
        "kappa_ia_db": (float, 5.0),
        "noise_power_dbm": (float, -109.0),
        "n_t": (int, 1),
        "n_r": (int, 64),
        "n_h": (int, 160),
        "n_v": (int, 160),
        "theta_u": (float, math.pi / 4),
        "theta_i": (float, math.pi / 3),
        "vartheta_i": (float, math.pi / 3),
        "theta_r": (float, math.pi / 6),
        "vartheta_r": (float, 2 * math.pi / 5),
        "theta_a": (float, math.pi / 4),
        "p_per": (float, 1e-3),
        "n_tact": (int, 1),
    },
    "ris": {
        "m": (int, 8),
        "t": (int, 0),
    },
    "user": {
        "m": (int, 4),
        "t": (int, 0),
    },
    "experiment": {
        "schemes": (_schemes, ("ps", "cs")),
        "snr_db": (_snr_points, _snr_points("-10:40:2.5")),
        "trials": (int, 7500),
        "seed": (int, 0),
        "truth": (str, "continuous"),
        "noise": (_bool, True),
        "workers": (int, 1),
        "format": (str, "csv"),
        "trace_snr_db": (float, 30.0),
    },
}

_SCENARIO_FIELDS = {
    "zeta0_db": "zeta0", "kappa_ui_db": "kappa_ui", "kappa_ia_db": "kappa_ia",
    "noise_power_dbm": "noise_power", "n_t": "N_t", "n_r": "N_r", "n_h": "N_h",
    "n_v": "N_v", "p_per": "P_per", "n_tact": "N_tact",
}


@dataclass(frozen=True)
class CliConfig:
    plan: ExperimentPlan
    workers: int = 1
    format: str = "csv"
    trace_snr_db: float = 30.0
    source: str = None


def _check_search(section, m, t, n, n_name):
    if m < 2 or not is_power_of_two(m):
        raise ConfigError(f"[{section}] m = {m}: M must be a power of 2 and at least 2")
    if n % m:
        raise ConfigError(f"[{section}] m = {m} does not divide {n_name} = {n}")
    if t < 0 or t > n // m:
        raise ConfigError(f"[{section}] t = {t}: T must lie in 1..L = {n // m} (0 means L)")


def load_values(text, source="<string>"):
    """Parse INI text into ``{section: {key: value}}`` with defaults applied."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {source}: {exc}") from None
    values = {sec: {k: d for k, (_, d) in keys.items()} for sec, keys in SCHEMA.items()}
    for sec in parser.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"unknown section [{sec}] in {source}")
        for key, raw in parser.items(sec):
            if key not in SCHEMA[sec]:
                raise ConfigError(f"unknown key '{key}' in section [{sec}] of {source}")
            conv = SCHEMA[sec][key][0]
            try:
                values[sec][key] = conv(raw)
            except ValueError as exc:
                raise ConfigError(f"[{sec}] {key} = {raw!r}: {exc}") from None
    return values


def build_config(values, source=None):
    """Validate parsed values and assemble a :class:`CliConfig`."""
    sc = values["scenario"]
    kw = {_SCENARIO_FIELDS.get(k, k): v for k, v in sc.items()}
    try:
        scenario = ScenarioConfig(**kw)
    except ValueError as exc:
        raise ConfigError(f"[scenario] {exc}") from None
    ris, user, exp = values["ris"], values["user"], values["experiment"]
    _check_search("ris", ris["m"], ris["t"], scenario.N_h, "n_h")
    if scenario.N_t > 1:
        _check_search("user", user["m"], user["t"], scenario.N_t, "n_t")
    noise = exp["noise"]
    try:
        plan = ExperimentPlan(
            scenario=scenario,
            ris_search=SearchConfig(M=ris["m"], T=ris["t"] or None, noise_enabled=noise),
            user_search=SearchConfig(M=user["m"], T=user["t"] or None, noise_enabled=noise),
            schemes=tuple(exp["schemes"]),
            snr_points=tuple(exp["snr_db"]),
            trials=exp["trials"],
            master_seed=exp["seed"],
            truth=exp["truth"],
        )
    except ValueError as exc:
        raise ConfigError(f"[experiment] {exc}") from None
    if "bs" in {parse_scheme(s)[1] for s in plan.schemes} and not is_power_of_two(scenario.N_t):
        raise ConfigError(f"[experiment] binary search needs n_t to be a power of 2, got {scenario.N_t}")
    if exp["format"] not in ("csv", "json"):
        raise ConfigError(f"[experiment] format = {exp['format']!r}: expected csv or json")
    if exp["workers"] < 1:
        raise ConfigError("[experiment] workers must be >= 1")
    return CliConfig(plan, exp["workers"], exp["format"], exp["trace_snr_db"], source)


def parse_config(path):
    """Read, validate and default-fill the config file at ``path``."""
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path) as fh:
        text = fh.read()
    return build_config(load_values(text, str(path)), str(path))
