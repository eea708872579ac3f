"""SINR statistics and network-level metrics per scenario.

Success probabilities condition on an active link of the given mode:
the signal arrives at the mode's sensitivity (channel inversion), noise
and the scenario's interference fields attenuate it, and an FD pair adds
a residual self-interference term zeta * P drawn from the link's own
power distribution. Rates are ergodic Shannon rates in nats/s/Hz. The
scenario metrics aggregate per-mode rates, activity fractions, and
powers into per-user rate, average transmit power, network throughput,
and a traffic-weighted outage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .config import Mode, NetworkConfig, Scenario, SCENARIO_MODES
from .interference import build_lt_table
from .mode_selection import mode_stats, prob_fd_pair
from .numerics import DEFAULT_QUADRATURE, integrate
from .power_stats import power_law


def _check_mode(mode: Mode, scenario: Scenario):
    if mode not in SCENARIO_MODES[scenario]:
        raise ValueError(f"mode {mode.value} does not exist in scenario {scenario.value}")


def _sensitivity(mode: Mode, cfg: NetworkConfig) -> float:
    d = cfg.derived()
    if mode is Mode.CELLULAR:
        return cfg.rho_c
    return d.rho_d if mode is Mode.F_D2D else d.rho_e


def _fd_weight(mode: Mode, scenario: Scenario, cfg: NetworkConfig) -> float:
    """Probability the probed link's pair is FD-active, given the link is on."""
    if scenario is not Scenario.FD or mode is Mode.CELLULAR:
        return 0.0
    stats = mode_stats(cfg)
    p_on = stats.p_d if mode is Mode.F_D2D else stats.p_e
    if p_on == 0:
        return 0.0
    return prob_fd_pair(cfg) / p_on


def _success_factors(mode, scenario, cfg, zeta):
    """Return (table, weight, si_fn) so sweeps reuse the heavy pieces."""
    table = build_lt_table(scenario, cfg)
    weight = _fd_weight(mode, scenario, cfg)
    if weight > 0 and zeta > 0:
        own = power_law(mode, cfg)

        def si_fn(s):
            return own.laplace(s * zeta)

    else:
        weight = weight if zeta > 0 else 0.0

        def si_fn(s):
            return 1.0

    return table, weight, si_fn


def _success_at(mode, cfg, table, weight, si_fn, s):
    base = math.exp(-s * cfg.sigma2) * table.product(mode, s)
    if weight > 0:
        return (weight * si_fn(s) + (1.0 - weight)) * base
    return base


def success_probability(
    mode: Mode, scenario: Scenario, cfg: NetworkConfig, theta, zeta=None
) -> float:
    """P(SINR >= theta) on an active link of the given mode and scenario."""
    _check_mode(mode, scenario)
    if theta < 0:
        raise ValueError(f"theta must be >= 0, got {theta}")
    if theta == 0:
        return 1.0
    z = cfg.zeta if zeta is None else zeta
    table, weight, si_fn = _success_factors(mode, scenario, cfg, z)
    return _success_at(mode, cfg, table, weight, si_fn, theta / _sensitivity(mode, cfg))


def ergodic_rate(mode: Mode, scenario: Scenario, cfg: NetworkConfig, zeta=None) -> float:
    """E[ln(1 + SINR)] in nats/s/Hz on an active link."""
    _check_mode(mode, scenario)
    z = cfg.zeta if zeta is None else zeta
    rho = _sensitivity(mode, cfg)
    table, weight, si_fn = _success_factors(mode, scenario, cfg, z)

    def integrand(t):
        s = math.expm1(t) / rho
        return _success_at(mode, cfg, table, weight, si_fn, s)

    # success decays in t through noise and interference; find a cutoff
    # where the integrand is negligible, then integrate the finite window
    t_hi = 1.0
    while integrand(t_hi) > 1e-12 and t_hi < 700.0:
        t_hi *= 1.5
    return integrate(integrand, 0.0, t_hi, DEFAULT_QUADRATURE)


@dataclass(frozen=True)
class SinrResult:
    mode: Mode
    scenario: Scenario
    theta: float
    outage: float
    success: float
    rate_nats: float


def sinr_result(
    mode: Mode, scenario: Scenario, cfg: NetworkConfig, theta, zeta=None
) -> SinrResult:
    s = success_probability(mode, scenario, cfg, theta, zeta)
    return SinrResult(
        mode=mode,
        scenario=scenario,
        theta=float(theta),
        outage=1.0 - s,
        success=s,
        rate_nats=ergodic_rate(mode, scenario, cfg, zeta),
    )


@dataclass(frozen=True)
class ScenarioMetrics:
    """Network-level aggregates for one scenario.

    Dicts are keyed by the modes the scenario carries. a_chi is the
    probability a random user runs mode chi outside truncation outage;
    pur/pcr are per-user and per-cell ergodic rates; lambda_chi the
    transmitter intensity; tx_chi the mean transmit power; outage_chi
    the SINR outage at the metric threshold theta.
    """

    scenario: Scenario
    theta: float
    a_chi: dict
    rate_chi: dict
    pur_chi: dict
    pcr_chi: dict
    lambda_chi: dict
    tx_chi: dict
    outage_chi: dict
    beta: float
    t_avg: float
    p_avg: float
    t_n: float
    o_net: float


def theta_sweep(scenario: Scenario, cfg: NetworkConfig, thetas, zeta=None):
    """Per-mode outage and traffic-weighted outage over a threshold grid.

    Returns (outage, o_net) where outage maps each mode to a list aligned
    with thetas. Reuses the interference table and SI factors across the
    grid, unlike repeated success_probability calls.
    """
    z = cfg.zeta if zeta is None else zeta
    modes = SCENARIO_MODES[scenario]
    stats = mode_stats(cfg)
    lam = {}
    factors = {}
    for mode in modes:
        factors[mode] = _success_factors(mode, scenario, cfg, z)
        if mode is Mode.CELLULAR:
            lam[mode] = cfg.lambda_bs
        else:
            lam[mode] = stats.u_d if mode is Mode.F_D2D else stats.u_e
    lam_total = sum(lam.values())

    outage = {mode: [] for mode in modes}
    o_net = []
    for theta in thetas:
        if theta < 0:
            raise ValueError(f"theta must be >= 0, got {theta}")
        acc = 0.0
        for mode in modes:
            table, weight, si_fn = factors[mode]
            if theta == 0:
                o = 0.0
            else:
                s = theta / _sensitivity(mode, cfg)
                o = 1.0 - _success_at(mode, cfg, table, weight, si_fn, s)
            outage[mode].append(o)
            acc += lam[mode] / lam_total * o
        o_net.append(acc)
    return outage, o_net


def scenario_metrics(
    scenario: Scenario, cfg: NetworkConfig, theta: float = 1.0, zeta=None
) -> ScenarioMetrics:
    stats = mode_stats(cfg)
    d = cfg.derived()
    modes = SCENARIO_MODES[scenario]
    beta = cfg.lambda_bs / ((1.0 - d.o_p) * cfg.lambda_c)

    if scenario is Scenario.FD:
        denom = 2.0 * cfg.lambda_d + cfg.lambda_c
    elif scenario is Scenario.HD:
        denom = cfg.lambda_d + cfg.lambda_c
    else:
        denom = cfg.lambda_c

    a_chi, rates, pur, pcr, lam, tx, outage = {}, {}, {}, {}, {}, {}, {}
    for mode in modes:
        rate = ergodic_rate(mode, scenario, cfg, zeta)
        rates[mode] = rate
        outage[mode] = 1.0 - success_probability(mode, scenario, cfg, theta, zeta)
        if mode is Mode.CELLULAR:
            a_chi[mode] = cfg.lambda_c / denom * (1.0 - d.o_p)
            pur[mode] = 0.5 * beta * rate
            pcr[mode] = rate
            lam[mode] = cfg.lambda_bs
            tx[mode] = beta * power_law(mode, cfg).moment(1.0)
        else:
            p_on = stats.p_d if mode is Mode.F_D2D else stats.p_e
            u_on = stats.u_d if mode is Mode.F_D2D else stats.u_e
            a_chi[mode] = cfg.lambda_d / denom * p_on
            pur[mode] = rate
            pcr[mode] = u_on / cfg.lambda_bs * rate
            lam[mode] = u_on
            tx[mode] = power_law(mode, cfg).moment(1.0) if p_on > 0 else 0.0

    lam_total = sum(lam.values())
    return ScenarioMetrics(
        scenario=scenario,
        theta=float(theta),
        a_chi=a_chi,
        rate_chi=rates,
        pur_chi=pur,
        pcr_chi=pcr,
        lambda_chi=lam,
        tx_chi=tx,
        outage_chi=outage,
        beta=beta,
        t_avg=sum(a_chi[m] * pur[m] for m in modes),
        p_avg=sum(a_chi[m] * tx[m] for m in modes),
        t_n=cfg.lambda_bs * sum(pcr.values()),
        o_net=sum(lam[m] / lam_total * outage[m] for m in modes),
    )
