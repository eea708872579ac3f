"""Network parameters, derived constants, and the plain-text config format.

All internal quantities are SI: intensities in points per square meter,
powers in watts, distances in meters. The config file format uses the
more convenient dBm / per-km2 units and is converted on load.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, fields


class ConfigError(ValueError):
    """Raised for invalid parameter values or malformed config files."""


class Mode(enum.Enum):
    """Transmission mode of a probed link."""

    CELLULAR = "c"
    F_D2D = "d"
    R_D2D = "e"


class Scenario(enum.Enum):
    """Network operation scenario."""

    FD = "FD"
    HD = "HD"
    TRADITIONAL = "Traditional"


#: modes that can carry traffic in each scenario
SCENARIO_MODES = {
    Scenario.FD: (Mode.CELLULAR, Mode.F_D2D, Mode.R_D2D),
    Scenario.HD: (Mode.CELLULAR, Mode.F_D2D),
    Scenario.TRADITIONAL: (Mode.CELLULAR,),
}


def dbm_to_watts(dbm):
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts):
    if watts <= 0:
        raise ConfigError(f"cannot express non-positive power {watts} W in dBm")
    return 10.0 * math.log10(watts) + 30.0


@dataclass(frozen=True)
class NetworkConfig:
    """Deployment and protocol parameters.

    lambda_bs, lambda_c, lambda_d are PPP intensities per m^2 for base
    stations, cellular UEs, and D2D pairs. rho_c is the cellular receiver
    sensitivity; the f-D2D and r-D2D sensitivities are derived from it via
    the ratios r1 = rho_c / rho_d and r2 = rho_d / rho_e. t_d is the
    interference-protection threshold, omega the link-distance shaping
    exponent, zeta the residual self-interference factor.
    """

    lambda_bs: float = 1e-5
    lambda_c: float = 1e-4
    lambda_d: float = 1e-4
    p_u: float = 0.2
    rho_min: float = 1e-12
    rho_c: float = 1e-11
    r1: float = 0.2
    r2: float = 0.2
    t_d: float = 0.2
    eta_c: float = 4.0
    eta_d: float = 4.0
    omega: float = 1.0
    zeta: float = 0.0
    sigma2: float = 1e-12

    def __post_init__(self):
        positive = (
            "lambda_bs",
            "lambda_c",
            "lambda_d",
            "p_u",
            "rho_min",
            "rho_c",
            "r1",
            "r2",
            "sigma2",
        )
        for name in positive:
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.t_d < 0:
            raise ConfigError(f"t_d must be >= 0, got {self.t_d}")
        if self.eta_c <= 2 or self.eta_d <= 2:
            raise ConfigError(
                f"path-loss exponents must exceed 2 (eta_c={self.eta_c}, "
                f"eta_d={self.eta_d}); interference diverges otherwise"
            )
        if not 0 <= self.omega < 2:
            raise ConfigError(f"omega must lie in [0, 2), got {self.omega}")
        if not 0 <= self.zeta <= 1:
            raise ConfigError(f"zeta must lie in [0, 1], got {self.zeta}")
        if not self.rho_min <= self.rho_c <= self.p_u:
            raise ConfigError(
                f"need rho_min <= rho_c <= p_u, got rho_min={self.rho_min}, "
                f"rho_c={self.rho_c}, p_u={self.p_u}"
            )
        if self.lambda_c < self.lambda_bs:
            raise ConfigError(
                f"lambda_c={self.lambda_c} below lambda_bs={self.lambda_bs}; "
                "every cell is assumed to hold at least one cellular UE"
            )
        if self.lambda_c < 5 * self.lambda_bs:
            warnings.warn(
                "lambda_c below 5x lambda_bs: the always-busy-cell assumption "
                "behind the cellular interference field weakens",
                stacklevel=2,
            )

    def derived(self) -> "DerivedConstants":
        return DerivedConstants(self)


class DerivedConstants:
    """Quantities fixed by a NetworkConfig.

    rho_d / rho_e are the D2D receiver sensitivities, r_bar the maximum
    D2D link distance a UE can close at full power, o_p the probability
    that a cellular UE cannot meet its inversion target. b is the rate
    parameter of the r-D2D distance model and triggers the link-geometry
    moment chain on first access.
    """

    def __init__(self, cfg: NetworkConfig):
        self.cfg = cfg
        self.rho_d = cfg.rho_c / cfg.r1
        self.rho_e = self.rho_d / cfg.r2
        self.r_bar = (cfg.p_u / cfg.rho_min) ** (1.0 / cfg.eta_d)
        self.o_p = math.exp(
            -math.pi * cfg.lambda_bs * (cfg.p_u / cfg.rho_c) ** (2.0 / cfg.eta_c)
        )

    @property
    def b(self):
        from . import link_geometry

        mu = link_geometry.mu_re(self.cfg)
        return math.pi / (4.0 * mu * mu)


#: config file key -> (NetworkConfig field, file-unit -> SI converter)
_FILE_KEYS = {
    "lambda_bs_per_km2": ("lambda_bs", lambda v: v * 1e-6),
    "lambda_c_per_km2": ("lambda_c", lambda v: v * 1e-6),
    "lambda_d_per_km2": ("lambda_d", lambda v: v * 1e-6),
    "p_u_dbm": ("p_u", dbm_to_watts),
    "rho_min_dbm": ("rho_min", dbm_to_watts),
    "rho_c_dbm": ("rho_c", dbm_to_watts),
    "r1": ("r1", float),
    "r2": ("r2", float),
    "t_d": ("t_d", float),
    "eta_c": ("eta_c", float),
    "eta_d": ("eta_d", float),
    "omega": ("omega", float),
    "zeta": ("zeta", float),
    "sigma2_dbm": ("sigma2", dbm_to_watts),
}


def parse_config_text(text: str) -> NetworkConfig:
    """Parse key=value lines ('#' starts a comment) into a NetworkConfig.

    Keys not present keep their defaults; unknown keys are rejected.
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in _FILE_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        field, convert = _FILE_KEYS[key]
        try:
            values[field] = convert(float(val.strip()))
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}")
    return NetworkConfig(**values)


def load_config(path) -> NetworkConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def config_field_names():
    return tuple(f.name for f in fields(NetworkConfig))
