"""Laplace transforms of the aggregate interference fields.

Receivers see three interferer classes: scheduled cellular UEs (intensity
lambda_bs, one per cell), active f-D2D transmitters (u_d), and active
r-D2D transmitters (u_e). At a base station the protection rule carves an
exclusion region around the receiver, giving a hypergeometric kernel; at
a D2D receiver interferers can be arbitrarily close and the field is a
stable-law kernel using fractional power moments. Fading is unit-mean
exponential throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from scipy.special import gamma as gamma_fn

from .config import Mode, NetworkConfig, Scenario, SCENARIO_MODES
from .mode_selection import mode_stats
from .numerics import gauss_2f1
from .power_stats import power_law


@dataclass(frozen=True)
class _Interferer:
    intensity: float
    moment_to_c: float  # E[P^(2/eta_c)]
    moment_to_d: float  # E[P^(2/eta_d)]
    exclusion_scale: float  # received-power bound at the protected BS


class LtTable:
    """Per-scenario table of interference Laplace transforms.

    lt(kappa, chi, s) evaluates the transform of the field that
    interferer class kappa creates at a mode-chi receiver; product(chi, s)
    multiplies over every class active in the scenario.
    """

    def __init__(self, scenario: Scenario, cfg: NetworkConfig):
        if cfg.eta_d <= 2 or cfg.eta_c <= 2:
            raise ValueError("interference diverges for path-loss exponents <= 2")
        self.scenario = scenario
        self.cfg = cfg
        stats = mode_stats(cfg)
        self.active: dict[Mode, _Interferer] = {}
        for kappa in SCENARIO_MODES[scenario]:
            if kappa is Mode.CELLULAR:
                intensity = cfg.lambda_bs
                excl = cfg.rho_c
            else:
                intensity = stats.u_d if kappa is Mode.F_D2D else stats.u_e
                excl = cfg.rho_c * cfg.t_d
            if intensity > 0 and cfg.t_d == 0 and kappa is not Mode.CELLULAR:
                intensity = 0.0
            if intensity == 0:
                self.active[kappa] = _Interferer(0.0, 0.0, 0.0, excl)
                continue
            pl = power_law(kappa, cfg)
            self.active[kappa] = _Interferer(
                intensity=intensity,
                moment_to_c=pl.moment(2.0 / cfg.eta_c),
                moment_to_d=pl.moment(2.0 / cfg.eta_d),
                exclusion_scale=excl,
            )

    def lt(self, kappa: Mode, chi: Mode, s) -> float:
        if kappa not in self.active:
            raise ValueError(
                f"interferer class {kappa.value} is not active in scenario "
                f"{self.scenario.value}"
            )
        if s < 0:
            raise ValueError(f"laplace transform needs s >= 0, got {s}")
        if s == 0:
            return 1.0
        itf = self.active[kappa]
        if itf.intensity == 0:
            return 1.0
        cfg = self.cfg
        if chi is Mode.CELLULAR:
            eta = cfg.eta_c
            z = s * itf.exclusion_scale
            kernel = gauss_2f1(1.0, 1.0 - 2.0 / eta, 2.0 - 2.0 / eta, -z)
            exponent = (
                2.0 * math.pi * itf.intensity * s * itf.moment_to_c
                * itf.exclusion_scale ** (1.0 - 2.0 / eta) * kernel / (eta - 2.0)
            )
        else:
            eta = cfg.eta_d
            exponent = (
                math.pi * itf.intensity * s ** (2.0 / eta) * itf.moment_to_d
                * gamma_fn(1.0 + 2.0 / eta) * gamma_fn(1.0 - 2.0 / eta)
            )
        return math.exp(-exponent)

    def product(self, chi: Mode, s) -> float:
        out = 1.0
        for kappa in self.active:
            out *= self.lt(kappa, chi, s)
        return out


@lru_cache(maxsize=None)
def build_lt_table(scenario: Scenario, cfg: NetworkConfig) -> LtTable:
    return LtTable(scenario, cfg)


def lt_interference(kappa: Mode, chi: Mode, cfg: NetworkConfig, s) -> float:
    """Transform of class kappa's field at a mode-chi receiver (general form)."""
    return build_lt_table(Scenario.FD, cfg).lt(kappa, chi, s)


def lt_interference_eta4(kappa: Mode, cfg: NetworkConfig, s) -> float:
    """Closed arctan form of the at-BS transform, valid only for eta_c = 4."""
    if cfg.eta_c != 4:
        raise ValueError(f"arctan form requires eta_c = 4, got eta_c={cfg.eta_c}")
    table = build_lt_table(Scenario.FD, cfg)
    if kappa not in table.active:
        raise ValueError(f"unknown interferer class {kappa}")
    if s < 0:
        raise ValueError(f"laplace transform needs s >= 0, got {s}")
    if s == 0:
        return 1.0
    itf = table.active[kappa]
    if itf.intensity == 0:
        return 1.0
    # at eta_c = 4 the hypergeometric kernel collapses to arctan and the
    # required moment is exactly E[sqrt(P)] = moment_to_c
    exponent = (
        math.pi * itf.intensity * math.sqrt(s) * itf.moment_to_c
        * math.atan(math.sqrt(s * itf.exclusion_scale))
    )
    return math.exp(-exponent)
