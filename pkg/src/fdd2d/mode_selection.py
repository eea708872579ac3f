"""Activity probabilities of the two D2D transmission directions.

A pair's f-D2D link transmits only if closing the pair separation at
sensitivity rho_d needs no more than P_u and stays below the
interference-protection budget T_d * rc^eta_c * rho_c set by the f-UE's
nearest BS. The r-D2D direction follows the same rule with sensitivity
rho_e and the r-UE's own nearest-BS distance. Both reduce to a lower
incomplete gamma of the shape parameter a = (2 - omega) eta_c / (2 eta_d).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .config import Mode, NetworkConfig
from .numerics import integrate, lower_incomplete_gamma, DEFAULT_QUADRATURE


def activity_shape(cfg: NetworkConfig) -> float:
    return (2.0 - cfg.omega) * cfg.eta_c / (2.0 * cfg.eta_d)


def activity_params(mode: Mode, cfg: NetworkConfig):
    """(rate, sensitivity, power_cap, shape, gamma_arg) for a D2D direction.

    rate is the Rayleigh rate of the protecting-BS distance (pi*lambda_bs
    for the f side, b for the r side); power_cap is the largest transmit
    power the direction can ever request, min(P_u, r_bar^eta_d * rho).
    gamma_arg is the incomplete-gamma cutoff rate*(cap/(rho_c*T_d))^(2/eta_c),
    infinite when T_d = 0.
    """
    d = cfg.derived()
    if mode is Mode.F_D2D:
        rate, rho = math.pi * cfg.lambda_bs, d.rho_d
    elif mode is Mode.R_D2D:
        rate, rho = d.b, d.rho_e
    else:
        raise ValueError(f"activity_params is for D2D modes, got {mode}")
    cap = min(cfg.p_u, d.r_bar**cfg.eta_d * rho)
    if cfg.t_d == 0:
        gamma_arg = math.inf
    else:
        gamma_arg = rate * (cap / (cfg.rho_c * cfg.t_d)) ** (2.0 / cfg.eta_c)
    return rate, rho, cap, activity_shape(cfg), gamma_arg


def _activity_probability(mode: Mode, cfg: NetworkConfig) -> float:
    if cfg.t_d == 0:
        return 0.0
    rate, rho, cap, a, gamma_arg = activity_params(mode, cfg)
    r_bar = cfg.derived().r_bar
    om = cfg.omega
    pref = ((2.0 - om) * cfg.eta_c / (2.0 * cfg.eta_d * r_bar ** (2.0 - om))) * (
        cfg.t_d * cfg.rho_c / (rate ** (cfg.eta_c / 2.0) * rho)
    ) ** ((2.0 - om) / cfg.eta_d)
    return pref * lower_incomplete_gamma(a, gamma_arg)


def prob_f_d2d(cfg: NetworkConfig) -> float:
    """Probability that a pair's f-D2D direction is transmitting."""
    return _activity_probability(Mode.F_D2D, cfg)


def prob_r_d2d(cfg: NetworkConfig) -> float:
    """Probability that a pair's r-D2D direction is transmitting."""
    return _activity_probability(Mode.R_D2D, cfg)


@lru_cache(maxsize=None)
def prob_fd_pair(cfg: NetworkConfig) -> float:
    """Probability that both directions of a pair transmit at once.

    The two activity events share the pair separation r_d, so this is the
    f-side activity probability conditioned on the r-side budget,
    averaged over the r-UE's nearest-BS distance g. The conditional
    probability reuses the f-side closed form with the pair-separation
    power cap tightened to r2 * min(P_u, T_d g^eta_c rho_c): the r side
    admits separations up to that cap scaled into f-side units.
    """
    if cfg.t_d == 0:
        return 0.0
    d = cfg.derived()
    b = d.b
    pl = math.pi * cfg.lambda_bs
    om = cfg.omega
    a = activity_shape(cfg)
    r_bar = d.r_bar
    cap_d = min(cfg.p_u, r_bar**cfg.eta_d * d.rho_d)
    pref = ((2.0 - om) * cfg.eta_c / (2.0 * cfg.eta_d * r_bar ** (2.0 - om))) * (
        cfg.t_d * cfg.rho_c / (pl ** (cfg.eta_c / 2.0) * d.rho_d)
    ) ** ((2.0 - om) / cfg.eta_d)

    def joint_cap_factor(g):
        cap = min(cap_d, cfg.r2 * min(cfg.p_u, cfg.t_d * g**cfg.eta_c * cfg.rho_c))
        if cap <= 0.0:
            return 0.0
        return pref * lower_incomplete_gamma(
            a, pl * (cap / (cfg.rho_c * cfg.t_d)) ** (2.0 / cfg.eta_c)
        )

    def integrand(g):
        return 2.0 * b * g * math.exp(-b * g * g) * joint_cap_factor(g)

    # the r-side budget stops growing once T_d g^eta_c rho_c reaches P_u
    g_kink = (cfg.p_u / (cfg.t_d * cfg.rho_c)) ** (1.0 / cfg.eta_c)
    g_max = math.sqrt(-math.log(1e-12) / b)
    total = 0.0
    lo = 0.0
    for edge in sorted({min(g_kink, g_max), g_max}):
        if edge > lo:
            total += integrate(integrand, lo, edge, DEFAULT_QUADRATURE)
            lo = edge
    # beyond g_max the factor is constant (or bounded by it): add the
    # remaining Rayleigh mass analytically
    total += math.exp(-b * g_max * g_max) * joint_cap_factor(max(g_max, g_kink))
    return min(total, 1.0)


@dataclass(frozen=True)
class ModeStats:
    """Per-direction activity probabilities and transmitter intensities."""

    p_d: float
    p_e: float
    p_fd: float
    u_d: float
    u_e: float
    o_p: float


@lru_cache(maxsize=None)
def mode_stats(cfg: NetworkConfig) -> ModeStats:
    p_d = prob_f_d2d(cfg)
    p_e = prob_r_d2d(cfg)
    return ModeStats(
        p_d=p_d,
        p_e=p_e,
        p_fd=prob_fd_pair(cfg),
        u_d=cfg.lambda_d * p_d,
        u_e=cfg.lambda_d * p_e,
        o_p=cfg.derived().o_p,
    )
