"""Dual-engine toolkit for full-duplex D2D underlay cellular networks.

An analytical engine built on stochastic-geometry closed forms (link
distances, mode selection, transmit-power statistics, interference
Laplace transforms, SINR outage, ergodic rate, network metrics) and an
independent Monte Carlo system-level simulator that validates it.
"""

from .config import (
    ConfigError,
    Mode,
    NetworkConfig,
    Scenario,
    SCENARIO_MODES,
    dbm_to_watts,
    load_config,
    parse_config_text,
    watts_to_dbm,
)
from .numerics import NumericsError, QuadratureSpec
from .link_geometry import mu_re, re_distance_intermediates
from .mode_selection import ModeStats, mode_stats, prob_f_d2d, prob_fd_pair, prob_r_d2d
from .power_stats import PowerLaw, power_law, si_laplace
from .interference import LtTable, build_lt_table, lt_interference, lt_interference_eta4
from .performance import (
    ScenarioMetrics,
    SinrResult,
    ergodic_rate,
    scenario_metrics,
    sinr_result,
    success_probability,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "Mode",
    "NetworkConfig",
    "Scenario",
    "SCENARIO_MODES",
    "dbm_to_watts",
    "load_config",
    "parse_config_text",
    "watts_to_dbm",
    "NumericsError",
    "QuadratureSpec",
    "mu_re",
    "re_distance_intermediates",
    "ModeStats",
    "mode_stats",
    "prob_f_d2d",
    "prob_fd_pair",
    "prob_r_d2d",
    "PowerLaw",
    "power_law",
    "si_laplace",
    "LtTable",
    "build_lt_table",
    "lt_interference",
    "lt_interference_eta4",
    "ScenarioMetrics",
    "SinrResult",
    "ergodic_rate",
    "scenario_metrics",
    "sinr_result",
    "success_probability",
    "__version__",
]
