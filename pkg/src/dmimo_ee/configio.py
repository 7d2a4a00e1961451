"""INI configuration parsing for experiment runs.

A config file carries up to five sections; every key is optional and
falls back to the library default.  Unknown sections or keys are
rejected by name so typos cannot silently revert to defaults.

Sections and keys (units in parentheses):

  [geometry]   side_m (m), num_aps, num_ues, antennas_per_ap,
               coherence_len (symbols), pilot_len (symbols),
               pathloss_d0_m (m), pathloss_d1_m (m),
               pathloss_fixed_db (dB), shadow_std_db (dB)
  [radio]      p_u_mw (mW), p_p_mw (mW), bandwidth_mhz (MHz),
               noise_figure_db (dB), strong_fraction, lsfd_mode
  [energy]     p_ue_circuit_w (W), p_ap_circuit_w (W), p_proc_w (W),
               p_fronthaul_fixed_w (W), p_signaling_w (W),
               p_cpu_fixed_w (W), p_cpu_lsfd_w (W),
               p_cpu_deco_mw_per_gbps (mW per Gbit/s),
               amplifier_eff, lsfd_per_link
  [solver]     eps, max_iters, inner_max, grad_tol, armijo,
               penalty_scale, penalty_max_doublings, round_threshold
  [experiment] master_seed, realizations, se_qos (bit/s/Hz),
               qos_grid (comma list, bit/s/Hz), num_aps_grid (comma list),
               num_ues_grid (comma list), p_u_grid_mw (comma list, mW),
               association_scheme, pilot_scheme, eta_init, output_dir
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field

from .energy import EnergyConstants
from .geometry import ASSOCIATION_SCHEMES, GeometryConfig
from .optimizer import SolverParams

__all__ = [
    "ConfigError",
    "RadioConfig",
    "ExperimentConfig",
    "ConfigBundle",
    "load_config",
    "bundle_with",
]


class ConfigError(Exception):
    """Raised when a configuration file is missing, malformed, or has unknown keys."""


@dataclass(frozen=True)
class RadioConfig:
    p_u_w: float = 0.1
    p_p_w: float = 0.1
    noise_figure_db: float = 9.0
    strong_fraction: float = 0.95
    lsfd_mode: str = "uniform"

    def __post_init__(self):
        if self.p_u_w <= 0 or self.p_p_w <= 0:
            raise ConfigError("transmit and pilot powers must be positive")
        if self.strong_fraction <= 0:
            raise ConfigError("strong_fraction must be positive")
        if self.lsfd_mode not in ("uniform", "matched"):
            raise ConfigError(f"unknown lsfd_mode {self.lsfd_mode!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    master_seed: int = 0
    realizations: int = 50
    se_qos: float = 0.0
    qos_grid: tuple = ()
    num_aps_grid: tuple = ()
    num_ues_grid: tuple = ()
    p_u_grid_w: tuple = ()
    association_scheme: str = "lsfc95"
    pilot_scheme: str = "round_robin"
    eta_init: float = 1.0
    output_dir: str = "results"

    def __post_init__(self):
        if self.master_seed < 0:
            raise ConfigError("master_seed must be nonnegative")
        if self.realizations < 1:
            raise ConfigError("realizations must be at least 1")
        if self.se_qos < 0:
            raise ConfigError("se_qos must be nonnegative")
        if self.association_scheme not in ASSOCIATION_SCHEMES:
            raise ConfigError(f"unknown association_scheme {self.association_scheme!r}")
        if self.pilot_scheme not in ("round_robin", "random"):
            raise ConfigError(f"unknown pilot_scheme {self.pilot_scheme!r}")
        if not 0.0 <= self.eta_init <= 1.0:
            raise ConfigError("eta_init must lie in [0, 1]")
        if not self.output_dir:
            raise ConfigError("output_dir must be nonempty")


@dataclass(frozen=True)
class ConfigBundle:
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    radio: RadioConfig = field(default_factory=RadioConfig)
    energy: EnergyConstants = field(default_factory=EnergyConstants)
    solver: SolverParams = field(default_factory=SolverParams)
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)


_GEOMETRY_KEYS = {
    "side_m": float,
    "num_aps": int,
    "num_ues": int,
    "antennas_per_ap": int,
    "coherence_len": int,
    "pilot_len": int,
    "pathloss_d0_m": float,
    "pathloss_d1_m": float,
    "pathloss_fixed_db": float,
    "shadow_std_db": float,
}
_RADIO_KEYS = {
    "p_u_mw": float,
    "p_p_mw": float,
    "bandwidth_mhz": float,
    "noise_figure_db": float,
    "strong_fraction": float,
    "lsfd_mode": str,
}
_ENERGY_KEYS = {
    "p_ue_circuit_w": float,
    "p_ap_circuit_w": float,
    "p_proc_w": float,
    "p_fronthaul_fixed_w": float,
    "p_signaling_w": float,
    "p_cpu_fixed_w": float,
    "p_cpu_lsfd_w": float,
    "p_cpu_deco_mw_per_gbps": float,
    "amplifier_eff": float,
    "lsfd_per_link": bool,
}
_SOLVER_KEYS = {
    "eps": float,
    "max_iters": int,
    "inner_max": int,
    "grad_tol": float,
    "armijo": float,
    "penalty_scale": float,
    "penalty_max_doublings": int,
    "round_threshold": float,
    "polish_passes": int,
    "polish_add_candidates": int,
}
_EXPERIMENT_KEYS = {
    "master_seed": int,
    "realizations": int,
    "se_qos": float,
    "qos_grid": "float_list",
    "num_aps_grid": "int_list",
    "num_ues_grid": "int_list",
    "p_u_grid_mw": "float_list",
    "association_scheme": str,
    "pilot_scheme": str,
    "eta_init": float,
    "output_dir": str,
}
_SECTIONS = {
    "geometry": _GEOMETRY_KEYS,
    "radio": _RADIO_KEYS,
    "energy": _ENERGY_KEYS,
    "solver": _SOLVER_KEYS,
    "experiment": _EXPERIMENT_KEYS,
}


def _parse_value(section, key, raw, kind):
    try:
        if kind is float:
            return float(raw)
        if kind is int:
            value = int(raw)
            return value
        if kind is bool:
            low = raw.strip().lower()
            if low in ("true", "yes", "on", "1"):
                return True
            if low in ("false", "no", "off", "0"):
                return False
            raise ValueError(raw)
        if kind == "float_list":
            return tuple(float(tok) for tok in raw.split(",") if tok.strip())
        if kind == "int_list":
            return tuple(int(tok) for tok in raw.split(",") if tok.strip())
        return raw.strip()
    except ValueError as exc:
        raise ConfigError(f"bad value for [{section}] {key}: {raw!r}") from exc


def _read_section(parser, name, known):
    out = {}
    if not parser.has_section(name):
        return out
    for key in parser.options(name):
        if key not in known:
            raise ConfigError(f"unknown key {key!r} in section [{name}]")
        out[key] = _parse_value(name, key, parser.get(name, key), known[key])
    return out


def load_config(path: str) -> ConfigBundle:
    """Parse an INI file into a validated ConfigBundle.

    Missing file, unknown sections, unknown keys, and malformed values
    all raise ConfigError with the offending name in the message.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path!r}: {exc}") from exc
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}] in {path!r}")

    geo_kw = _read_section(parser, "geometry", _GEOMETRY_KEYS)
    radio_raw = _read_section(parser, "radio", _RADIO_KEYS)
    energy_raw = _read_section(parser, "energy", _ENERGY_KEYS)
    solver_kw = _read_section(parser, "solver", _SOLVER_KEYS)
    exp_raw = _read_section(parser, "experiment", _EXPERIMENT_KEYS)
    exp_kw = {}
    for key, value in exp_raw.items():
        if key == "p_u_grid_mw":
            exp_kw["p_u_grid_w"] = tuple(v * 1e-3 for v in value)
        else:
            exp_kw[key] = value

    radio_kw = {}
    bandwidth_hz = None
    for key, value in radio_raw.items():
        if key == "p_u_mw":
            radio_kw["p_u_w"] = value * 1e-3
        elif key == "p_p_mw":
            radio_kw["p_p_w"] = value * 1e-3
        elif key == "bandwidth_mhz":
            bandwidth_hz = value * 1e6
        else:
            radio_kw[key] = value

    energy_kw = {}
    for key, value in energy_raw.items():
        if key == "p_cpu_deco_mw_per_gbps":
            # mW per Gbit/s -> W per bit/s
            energy_kw["p_cpu_decode_w_per_bps"] = value * 1e-12
        else:
            energy_kw[key] = value
    if bandwidth_hz is not None:
        energy_kw["bandwidth_hz"] = bandwidth_hz

    try:
        geometry = GeometryConfig(**geo_kw)
        radio = RadioConfig(**radio_kw)
        energy = EnergyConstants(**energy_kw)
        solver = SolverParams(**solver_kw)
        experiment = ExperimentConfig(**exp_kw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid configuration in {path!r}: {exc}") from exc
    return ConfigBundle(geometry=geometry, radio=radio, energy=energy, solver=solver, experiment=experiment)


def bundle_with(bundle: ConfigBundle, **overrides) -> ConfigBundle:
    """Copy a bundle with some top-level parts replaced."""
    return dataclasses.replace(bundle, **overrides)
