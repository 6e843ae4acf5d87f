"""Flat ``section.key = value`` experiment configuration.

Files hold one assignment per line; ``#`` starts a comment. Every key has a
fixed type and unknown keys are rejected. Values resolve in the order
profile defaults < config file < command-line overrides.
"""
from __future__ import annotations

import hashlib
import math

from .graph import SbmParams
from .mpa import MpaConfig
from .scoring import ScoringParams
from .simulator import SimConfig


class ConfigError(ValueError):
    pass


def _log_base(text):
    text = str(text).strip()
    return math.e if text in ("e", "ln", "natural") else float(text)


def _int_tuple(text):
    text = str(text).strip()
    if not text:
        return ()
    return tuple(int(x) for x in text.split(","))


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_float(text):
    text = str(text).strip()
    return None if text in ("", "none", "n") else float(text)


# key -> (parser, default)
KEYS = {
    "sim.n": (int, 1000),
    "sim.t_max": (int, 2500),
    "sim.m": (int, 20),
    "sim.minority_rate": (float, 0.35),
    "sim.covariate_dim": (int, 30),
    "sim.covariate_var": (float, 0.5),
    "sim.connection_rule": (str, "threshold"),
    "sim.threshold": (float, 0.5),
    "sim.snapshot_steps": (_int_tuple, ()),
    "sbm.p_within_majority": (float, 0.04),
    "sbm.p_within_minority": (float, 0.032),
    "sbm.p_cross": (float, 0.023),
    "scoring.beta0": (float, 0.0),
    "scoring.beta1": (float, 50.0),
    "scoring.beta2": (float, 50.0),
    "scoring.beta3": (float, -5.0),
    "scoring.noise_var": (float, 0.1),
    "scoring.similarity_orientation": (str, "magnitude"),
    "scoring.similarity_pairs": (int, 100_000),
    "scoring.network_size_divisor": (_opt_float, None),
    "scoring.common_conn_divisor": (_opt_float, None),
    "ranking.log_base": (_log_base, math.e),
    "experiment.runs": (int, 10),
    "experiment.base_seed": (int, 0),
    "experiment.intervention": (str, "all"),
    "report.window": (int, 500),
    "report.plots": (_bool, False),
    "mpa.r": (float, 0.35),
    "mpa.p0": (float, 0.7),
    "mpa.p1": (float, 0.7),
    "mpa.d0": (int, 20),
    "mpa.variant": (str, "all"),
    "mpa.t_max": (int, 200_000),
    "mpa.stride": (int, 1000),
    "mpa.seed": (int, 0),
    "mpa.runs": (int, 20),
    "mpa.q00_form": (str, "printed"),
}

PROFILES = {
    "paper": {},
    "desk": {"sim.n": 200, "sim.t_max": 500, "sim.m": 10, "experiment.runs": 3},
}


def parse_text(text: str, source: str = "<config>") -> dict:
    """Raw ``key -> string`` assignments from config text."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{source}:{lineno}: expected 'section.key = value'")
        out[key.strip()] = value.strip()
    return out


def load_file(path) -> dict:
    try:
        with open(path) as fh:
            return parse_text(fh.read(), str(path))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def resolve(profile: str = "paper", file_values: dict | None = None,
            overrides: dict | None = None) -> dict:
    """Typed settings for every key."""
    if profile not in PROFILES:
        raise ConfigError(f"unknown profile {profile!r}; choose from {sorted(PROFILES)}")
    raw = {**(file_values or {}), **(overrides or {})}
    unknown = sorted(set(raw) - set(KEYS))
    if unknown:
        raise ConfigError("unknown config keys: " + ", ".join(unknown))
    settings = {k: default for k, (_, default) in KEYS.items()}
    settings.update(PROFILES[profile])
    for key, value in raw.items():
        parser = KEYS[key][0]
        try:
            settings[key] = parser(value) if isinstance(value, str) else value
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from exc
    return settings


def dump(settings: dict) -> str:
    """Canonical text form; ``parse_text(dump(s))`` resolves back to ``s``."""
    lines = []
    for key in sorted(settings):
        val = settings[key]
        if isinstance(val, tuple):
            val = ",".join(map(str, val))
        elif val is None:
            val = "none"
        elif isinstance(val, float):
            val = "e" if (key == "ranking.log_base" and val == math.e) else repr(val)
        lines.append(f"{key} = {val}")
    return "\n".join(lines) + "\n"


def config_hash(settings: dict) -> str:
    return hashlib.sha256(dump(settings).encode()).hexdigest()[:16]


def arms(settings: dict) -> list:
    arm = settings["experiment.intervention"]
    if arm == "all":
        return ["none", "dp", "dyn"]
    if arm not in ("none", "dp", "dyn"):
        raise ConfigError(f"experiment.intervention must be none, dp, dyn or all, not {arm!r}")
    return [arm]


def sim_config(settings: dict, intervention: str = "none") -> SimConfig:
    s = settings
    try:
        return SimConfig(
            n=s["sim.n"], t_max=s["sim.t_max"], m=s["sim.m"],
            minority_rate=s["sim.minority_rate"], covariate_dim=s["sim.covariate_dim"],
            covariate_var=s["sim.covariate_var"],
            sbm=SbmParams(s["sbm.p_within_majority"], s["sbm.p_within_minority"],
                          s["sbm.p_cross"]),
            scoring=ScoringParams(s["scoring.beta0"], s["scoring.beta1"], s["scoring.beta2"],
                                  s["scoring.beta3"], s["scoring.noise_var"]),
            intervention=intervention, runs=s["experiment.runs"],
            base_seed=s["experiment.base_seed"],
            connection_rule=s["sim.connection_rule"], threshold=s["sim.threshold"],
            log_base=s["ranking.log_base"],
            similarity_orientation=s["scoring.similarity_orientation"],
            similarity_pairs=s["scoring.similarity_pairs"],
            network_size_divisor=s["scoring.network_size_divisor"],
            common_conn_divisor=s["scoring.common_conn_divisor"],
            snapshot_steps=s["sim.snapshot_steps"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def mpa_variants(settings: dict) -> list:
    v = settings["mpa.variant"]
    if v == "all":
        return ["baseline", "dp", "dynamic"]
    return [v]


def mpa_config(settings: dict, variant: str, seed: int) -> MpaConfig:
    s = settings
    try:
        return MpaConfig(r=s["mpa.r"], p0=s["mpa.p0"], p1=s["mpa.p1"], d0=s["mpa.d0"],
                         variant=variant, t_max=s["mpa.t_max"], seed=seed,
                         stride=s["mpa.stride"], q00_form=s["mpa.q00_form"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
