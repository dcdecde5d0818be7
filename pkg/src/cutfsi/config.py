"""Simulation configuration: defaults, validation and the flat file format.

Config files are plain text, one ``key = value`` per line, ``#`` comments.
Unknown keys are rejected with the offending line number.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass


@dataclass
class SimulationConfig:
    """All physical, stabilization, discretization and run parameters."""

    rho_f: float = 1.0       # fluid density [kg/m^3]
    rho_s: float = 1.0       # solid density [kg/m^3]
    nu_f: float = 1e-3       # kinematic viscosity [m^2/s]
    mu_s: float = 5e-3       # first Lame parameter [Pa]
    lambda_s: float = 1e-2   # second Lame parameter [Pa]
    gamma_vf: float = 1e-3   # ghost penalty, fluid velocity
    gamma_p: float = 1e-3    # ghost penalty, pressure
    gamma_vs: float = 1e-3   # ghost penalty, solid velocity
    gamma_u: float = 1e-3    # ghost penalty, displacement
    gamma_N: float = 1e2     # Nitsche penalty
    w_max: float = 1.0       # cut-fraction weight bound (1 = unweighted)
    m_f: int = 2             # fluid order (Taylor-Hood Q_mf / Q_{mf-1})
    m_s: int = 1             # solid order (equal-order Q_ms)
    n: int = 8               # cells per side, h = 2/n
    k: float = 1.0           # time step [s]
    T: float = 8.0           # final time [s]; not fixed by the benchmark
    radius_squared: float = 0.75  # interface circle, |x|^2 = radius_squared
    peak_inflow: float = 0.2      # lid speed [m/s]
    ramp_time: float = 2.0        # inflow ramp duration [s]

    @property
    def h(self) -> float:
        return 2.0 / self.n

    def validate(self) -> None:
        positive = ["rho_f", "rho_s", "nu_f", "mu_s", "lambda_s", "gamma_vf",
                    "gamma_p", "gamma_vs", "gamma_u", "gamma_N",
                    "radius_squared", "k", "T", "ramp_time"]
        for name in positive:
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.w_max < 1.0:
            raise ValueError(f"w_max must be >= 1, got {self.w_max}")
        if self.m_f != 2:
            raise ValueError("only m_f = 2 (Q2/Q1 Taylor-Hood) is supported")
        if self.m_s not in (1, 2):
            raise ValueError("m_s must be 1 or 2")
        if self.n < 2:
            raise ValueError("n must be >= 2")
        n_steps = self.T / self.k
        if abs(n_steps - round(n_steps)) > 1e-9:
            raise ValueError(f"T = {self.T} is not an integer multiple of k = {self.k}")

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.k))

    def replace(self, **kw) -> "SimulationConfig":
        cfg = dataclasses.replace(self, **kw)
        cfg.validate()
        return cfg

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(SimulationConfig)}


class ConfigError(ValueError):
    pass


def parse_config(path: str | None = None, overrides: dict | None = None) -> SimulationConfig:
    """Read a flat key = value file (may be None) plus inline overrides."""
    values: dict = {}
    if path is not None:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
                key, _, val = line.partition("=")
                key, val = key.strip(), val.strip()
                if key not in _FIELD_TYPES:
                    raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
                try:
                    values[key] = _convert(key, val)
                except ValueError as exc:
                    raise ConfigError(f"{path}:{lineno}: {exc}") from exc
    for key, val in (overrides or {}).items():
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        values[key] = _convert(key, val) if isinstance(val, str) else val
    cfg = SimulationConfig(**values)
    try:
        cfg.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def _convert(key: str, val: str):
    kind = _FIELD_TYPES[key]
    if kind in (int, "int"):
        return int(val)
    return float(val)


def format_config(cfg: SimulationConfig) -> str:
    """Render the fully resolved configuration as flat key = value lines."""
    return "\n".join(f"{k} = {v}" for k, v in cfg.as_dict().items())
