"""Flat ``key = value unit`` configuration files.

Every key is declared in ``PARAMETERS`` with its default (in SI or angular
units) and a physical dimension.  A value may carry a unit suffix from
``UNITS``; a bare number is read in the base unit of its dimension.  Unknown
keys, unknown units and units of the wrong dimension are errors.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence

import numpy as np

from .constants import AMU, TWO_PI

__all__ = [
    "ConfigError",
    "PARAMETERS",
    "SCENARIOS",
    "ScenarioConfig",
    "UNITS",
    "load_config",
    "parse_seeds",
    "parse_value",
]

SCENARIOS = ("gate_fidelity", "gate_time", "noise_echo", "dissipation", "switch", "balance", "report_all")
OUTPUT_ENV = "HYBRIDSIM_OUT"


class ConfigError(ValueError):
    """Malformed configuration; ``line`` is the 1-based line number when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


# unit -> (dimension, factor to base unit)
UNITS: dict[str, tuple[str, float]] = {
    "F": ("capacitance", 1.0),
    "fF": ("capacitance", 1e-15),
    "aF": ("capacitance", 1e-18),
    "H": ("inductance", 1.0),
    "pH": ("inductance", 1e-12),
    "m": ("length", 1.0),
    "um": ("length", 1e-6),
    "nm": ("length", 1e-9),
    "K": ("temperature", 1.0),
    "mK": ("temperature", 1e-3),
    "Ohm": ("resistance", 1.0),
    "kOhm": ("resistance", 1e3),
    "rad/s": ("angular", 1.0),
    "Hz": ("angular", TWO_PI),
    "kHz": ("angular", TWO_PI * 1e3),
    "MHz": ("angular", TWO_PI * 1e6),
    "GHz": ("angular", TWO_PI * 1e9),
    "s": ("time", 1.0),
    "us": ("time", 1e-6),
    "ns": ("time", 1e-9),
    "ps": ("time", 1e-12),
    "V": ("voltage", 1.0),
    "mV": ("voltage", 1e-3),
    "kg": ("mass", 1.0),
    "u": ("mass", AMU),
    "1/m": ("wavenumber", 1.0),
    "V^2": ("psd_1f", 1.0),
    "V^2s": ("psd_white", 1.0),
    "rad": ("angle", 1.0),
}


@dataclass(frozen=True)
class Parameter:
    default: Any
    dimension: str
    positive: bool = True
    doc: str = ""


def _p(default, dimension, positive=True, doc=""):
    return Parameter(default, dimension, positive, doc)


PARAMETERS: dict[str, Parameter] = {
    # circuit
    "C_r": _p(3e-15, "capacitance", doc="cavity capacitance"),
    "L_r": _p(3e-13, "inductance", doc="cavity inductance"),
    "C_m": _p(1e-16, "capacitance", doc="cavity-qubit coupling capacitance"),
    "C_J": _p(1e-16, "capacitance", doc="charge-qubit junction capacitance"),
    "C_g": _p(1e-16, "capacitance", doc="charge-qubit gate capacitance"),
    "E_J": _p(TWO_PI * 10e9, "angular", doc="qubit Josephson energy"),
    "E_c": _p(TWO_PI * 100e9, "angular", doc="qubit charging energy"),
    "d_i": _p(20e-6, "length", doc="ion-electrode distance"),
    "cavity_length": _p(40e-6, "length"),
    "C_i": _p(2e-17, "capacitance", doc="ion-electrode capacitance"),
    "C_i2": _p(2e-17, "capacitance"),
    "C_ib": _p(2e-17, "capacitance", doc="balancing electrode capacitance"),
    "displacement": _p(200e-9, "length", doc="ion separation for the coupling energy"),
    # switch
    "E_Ja": _p(TWO_PI * 1e12, "angular", doc="switch SQUID Josephson energy"),
    "flux_ratio": _p(0.0, "dimensionless", positive=False),
    # balance
    "V_i": _p(1.0, "voltage", positive=False, doc="ion electrode voltage"),
    "delta_V": _p(1e-4, "voltage", positive=False, doc="imbalance of the compensating voltage"),
    # ion and gate
    "ion": _p("Be9", "string", doc="Be9 or Ca43"),
    "ion_mass": _p(0.0, "mass", positive=False, doc="overrides the species mass when > 0"),
    "trap_frequency": _p(TWO_PI * 1e6, "angular"),
    "photon_momentum": _p(1e8, "wavenumber", doc="delta k of a kick"),
    "alpha": _p(np.pi / 4, "angle"),
    "n_kicks": _p(10, "integer", doc="kicks per half of the gate-time schedule"),
    "t1": _p(5e-9, "time"),
    "t2": _p(5e-9, "time"),
    "dead_time": _p(0.0, "time", positive=False),
    "coupling_convention": _p("bare", "string", doc="bare or coupled"),
    "sweep_min": _p(1e-3, "dimensionless"),
    "sweep_max": _p(1e-1, "dimensionless"),
    "sweep_points": _p(10, "integer"),
    "sweep_kicks": _p(1, "integer", doc="kicks per half in the fidelity sweep"),
    "fock_dim": _p(64, "integer"),
    # charge noise
    "spectrum": _p("one_over_f", "string", doc="one_over_f, white or tabulated"),
    "spectrum_table": _p("", "string", positive=False, doc="two-column CSV for tabulated spectra"),
    "noise_amplitude": _p(1e-14, "psd", doc="A (V^2) for 1/f, S0 (V^2 s) for white"),
    "omega_min": _p(TWO_PI * 1e3, "angular"),
    "omega_max": _p(TWO_PI * 10e9, "angular"),
    "flip_interval": _p(1e-9, "time"),
    "gate_duration": _p(20e-9, "time"),
    "flip_infidelity": _p(0.0, "dimensionless", positive=False),
    "dt": _p(5e-12, "time", doc="trajectory time step"),
    # dissipation
    "R_r": _p(0.031, "resistance", positive=False),
    "temperature": _p(0.1, "temperature"),
    "C_t_bath": _p(2e-16, "capacitance", doc="qubit capacitance seen by the bath"),
    "spectrum_points": _p(41, "integer"),
}

_BASE_UNIT = {
    "capacitance": "F",
    "inductance": "H",
    "length": "m",
    "temperature": "K",
    "resistance": "Ohm",
    "angular": "rad/s",
    "time": "s",
    "voltage": "V",
    "mass": "kg",
    "wavenumber": "1/m",
    "angle": "rad",
}


def parse_value(key: str, text: str, line: Optional[int] = None) -> Any:
    """Convert ``"value [unit]"`` for ``key`` to its internal representation."""
    if key not in PARAMETERS:
        raise ConfigError(f"unknown key {key!r}", line)
    par = PARAMETERS[key]
    parts = text.split()
    if not parts:
        raise ConfigError(f"missing value for {key!r}", line)
    if par.dimension == "string":
        if len(parts) != 1:
            raise ConfigError(f"{key} takes a single word", line)
        return parts[0]
    if len(parts) > 2:
        raise ConfigError(f"cannot parse {text!r}", line)
    try:
        number = float(parts[0])
    except ValueError as exc:
        raise ConfigError(f"{key}: {parts[0]!r} is not a number", line) from exc
    if not np.isfinite(number):
        raise ConfigError(f"{key}: value must be finite", line)
    factor = 1.0
    if len(parts) == 2:
        unit = parts[1]
        if unit not in UNITS:
            raise ConfigError(f"{key}: unknown unit {unit!r}", line)
        dim, factor = UNITS[unit]
        allowed = {"psd": ("psd_1f", "psd_white")}.get(par.dimension, (par.dimension,))
        if dim not in allowed:
            raise ConfigError(f"{key}: unit {unit!r} is a {dim}, expected {par.dimension}", line)
    value = number * factor
    if par.dimension == "integer":
        if value != int(value):
            raise ConfigError(f"{key} must be an integer", line)
        value = int(value)
    if par.positive and value <= 0:
        raise ConfigError(f"{key} = {value:g} violates {key} > 0", line)
    if key == "flux_ratio" and not 0.0 <= value <= 1.0:
        raise ConfigError("flux_ratio must lie in [0, 1]", line)
    if key == "flip_infidelity" and not 0.0 <= value < 1.0:
        raise ConfigError("flip_infidelity must lie in [0, 1)", line)
    return value


def parse_seeds(text: str) -> tuple[int, ...]:
    """``"1,2,5-8"`` -> (1, 2, 5, 6, 7, 8)."""
    seeds: list[int] = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            if "-" in item:
                lo, hi = item.split("-", 1)
                a, b = int(lo), int(hi)
                if b < a:
                    raise ConfigError(f"empty seed range {item!r}")
                seeds.extend(range(a, b + 1))
            else:
                seeds.append(int(item))
        except ValueError as exc:
            raise ConfigError(f"bad seed specification {item!r}") from exc
    if any(s < 0 for s in seeds):
        raise ConfigError("seeds must be non-negative")
    if len(set(seeds)) != len(seeds):
        raise ConfigError("duplicate seeds")
    return tuple(seeds)


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    params: Mapping[str, Any] = field(default_factory=dict)
    seeds: tuple[int, ...] = (0, 1)
    output_dir: Path = Path("hybridsim_out")
    output_format: str = "both"
    workers: int = 1

    def __post_init__(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; choose from {', '.join(SCENARIOS)}")
        if self.output_format not in ("csv", "json", "both"):
            raise ConfigError(f"unknown output format {self.output_format!r}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        unknown = set(self.params) - set(PARAMETERS)
        if unknown:
            raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")
        full = {k: p.default for k, p in PARAMETERS.items()}
        full.update(self.params)
        object.__setattr__(self, "params", full)

    def __getitem__(self, key: str) -> Any:
        return self.params[key]

    def digest(self) -> str:
        """SHA-256 of the resolved parameters and seeds (not of paths or workers)."""
        payload = json.dumps({"scenario": self.scenario, "params": self.params, "seeds": list(self.seeds)},
                             sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()

    def with_scenario(self, scenario: str) -> "ScenarioConfig":
        return ScenarioConfig(scenario, dict(self.params), self.seeds, self.output_dir, self.output_format,
                              self.workers)


def read_overrides(path: str | os.PathLike) -> dict[str, Any]:
    """Parse a config file into a ``{key: value}`` map of overrides."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file {str(p)!r} not found")
    out: dict[str, Any] = {}
    for lineno, raw in enumerate(p.read_text().splitlines(), start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError(f"expected 'key = value [unit]', got {raw.strip()!r}", lineno)
        key, value = (s.strip() for s in text.split("=", 1))
        if key in out:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        out[key] = parse_value(key, value, lineno)
    return out


def parse_set(items: Sequence[str]) -> dict[str, Any]:
    """``--set key=value [unit]`` overrides."""
    out: dict[str, Any] = {}
    for item in items:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = (s.strip() for s in item.split("=", 1))
        out[key] = parse_value(key, value)
    return out


def load_config(
    path: Optional[str | os.PathLike],
    scenario: str = "report_all",
    overrides: Sequence[str] = (),
    seeds: Optional[str] = None,
    output_dir: Optional[str | os.PathLike] = None,
    output_format: str = "both",
    workers: Optional[int] = None,
) -> ScenarioConfig:
    """Resolve a scenario configuration from a file plus command-line overrides.

    ``output_dir`` falls back to ``$HYBRIDSIM_OUT`` and then to
    ``./hybridsim_out``; ``workers`` falls back to ``os.cpu_count()``.
    """
    params = read_overrides(path) if path is not None else {}
    params.update(parse_set(overrides))
    seed_list = parse_seeds(seeds) if seeds is not None else (0, 1)
    out = Path(output_dir or os.environ.get(OUTPUT_ENV) or "hybridsim_out")
    return ScenarioConfig(scenario, params, seed_list, out, output_format, workers or os.cpu_count() or 1)


def describe_units(key: str) -> str:
    """Base unit of ``key`` for documentation and error messages."""
    return _BASE_UNIT.get(PARAMETERS[key].dimension, "")
