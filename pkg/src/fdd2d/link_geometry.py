"""Distance models for the three link types.

Cellular uplink distance r_c is nearest-neighbor in a PPP of intensity
lambda_bs (Rayleigh). The D2D pair separation r_d follows a shaped
power-law density on [0, r_bar], where r_bar is the largest distance a
UE can close at full transmit power. The r-D2D UE's own nearest-BS
distance r_e is modeled as Rayleigh with rate b = pi / (4 mu_re^2),
where mu_re is a moment-matched mean assembled from the geometry of the
f-D2D UE's serving cell: with probability p_neq the r-UE finds a closer
BS inside a crescent-shaped search region, otherwise it inherits the
distance to the f-UE's serving BS.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.laguerre import laggauss
from numpy.polynomial.legendre import leggauss
from scipy.special import erf, erfc

from .config import NetworkConfig
from .numerics import NumericsError, lower_incomplete_gamma


def pdf_rc(x, cfg: NetworkConfig):
    """Density of the cellular link distance (nearest BS): Rayleigh."""
    if np.any(np.asarray(x) < 0):
        raise ValueError("pdf_rc domain is x >= 0")
    pl = math.pi * cfg.lambda_bs
    return 2.0 * pl * x * np.exp(-pl * np.square(x))


def pdf_rd(x, cfg: NetworkConfig):
    """Density of the D2D pair separation on [0, r_bar]."""
    r_bar = cfg.derived().r_bar
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(arr > r_bar):
        raise ValueError(f"pdf_rd domain is [0, {r_bar:.6g}]")
    om = cfg.omega
    return (2.0 - om) * arr ** (1.0 - om) / r_bar ** (2.0 - om)


def cdf_rd(x, cfg: NetworkConfig):
    r_bar = cfg.derived().r_bar
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(arr > r_bar):
        raise ValueError(f"cdf_rd domain is [0, {r_bar:.6g}]")
    return (arr / r_bar) ** (2.0 - cfg.omega)


def mean_rd(cfg: NetworkConfig):
    om = cfg.omega
    return (2.0 - om) / (3.0 - om) * cfg.derived().r_bar


def sample_rd(u, cfg: NetworkConfig):
    """Inverse-CDF map from uniform(0,1] draws to pair separations."""
    return cfg.derived().r_bar * np.asarray(u) ** (1.0 / (2.0 - cfg.omega))


def _crescent_integrand(rc, rd, theta):
    """Area of the lens a closer BS to the r-UE must avoid, minus the
    part already known empty, for one (r_c, r_d, theta) geometry."""
    rc2_sq = rc * rc + rd * rd - 2.0 * rc * rd * np.cos(theta)
    rc2_sq = np.maximum(rc2_sq, 0.0)
    rc2 = np.sqrt(rc2_sq)
    denom = 2.0 * rc2 * rd
    safe = denom > 0
    arg = np.where(safe, (rc2_sq + rd * rd - rc * rc) / np.where(safe, denom, 1.0), 1.0)
    phi = math.pi - np.arccos(np.clip(arg, -1.0, 1.0))
    lens = np.where(safe, rc2_sq * (phi - 0.5 * np.sin(2.0 * phi)), 0.0)
    return lens - rc * rc * (theta - 0.5 * np.sin(2.0 * theta))


def crescent_area(cfg: NetworkConfig, n_nodes: int = 64):
    """Expected area of the search region where the r-UE may find a
    closer BS, averaged over (r_c, r_d, theta).

    Tensor-product quadrature: Gauss-Laguerre in y = pi lambda r_c^2,
    Gauss-Legendre in the inverse-CDF variable of r_d and in theta/pi.
    """
    pl = math.pi * cfg.lambda_bs
    r_bar = cfg.derived().r_bar
    inv_shape = 1.0 / (2.0 - cfg.omega)

    def estimate(n):
        y, wy = laggauss(n)
        t, wt = leggauss(n)
        u = 0.5 * (t + 1.0)
        wu = 0.5 * wt
        rc = np.sqrt(y / pl)[:, None, None]
        rd = (r_bar * u**inv_shape)[None, :, None]
        theta = (math.pi * u)[None, None, :]
        g = _crescent_integrand(rc, rd, theta)
        return float(np.einsum("i,j,k,ijk->", wy, wu, wu, g))

    a_coarse = estimate(max(24, n_nodes - 24))
    a_fine = estimate(n_nodes)
    if abs(a_fine - a_coarse) > 2e-3 * abs(a_fine) + 1e-9:
        raise NumericsError(
            f"crescent_area quadrature not converged: {a_coarse} vs {a_fine}"
        )
    return a_fine


@dataclass(frozen=True)
class ReDistanceIntermediates:
    """Building blocks of the r-D2D distance mean mu_re.

    p_neq is the probability that the r-UE's nearest BS differs from the
    f-UE's serving BS; area is the expected search-region area behind it.
    The conditional means split on whether the cellular link is longer
    than the pair separation (gt) or not (lt); mu_gt / mu_lt bound the
    distance to the f-UE's serving BS in each branch, mu_rc2 does so
    unconditionally.
    """

    p_neq: float
    area: float
    p_rc_gt_rd: float
    mu_rc2: float
    mu_gt: float
    mu_lt: float
    e_rd_gt: float
    e_rc_gt: float
    e_rd_lt: float
    e_rc_lt: float
    mu_re: float


def _assemble(cfg: NetworkConfig, area: float) -> ReDistanceIntermediates:
    lam = cfg.lambda_bs
    om = cfg.omega
    r_bar = cfg.derived().r_bar
    pl = math.pi * lam
    x_cap = pl * r_bar * r_bar

    g2 = lower_incomplete_gamma((2.0 - om) / 2.0, x_cap)
    g3 = lower_incomplete_gamma((3.0 - om) / 2.0, x_cap)
    g5 = lower_incomplete_gamma((5.0 - om) / 2.0, x_cap)

    p_gt = (2.0 - om) / (2.0 * r_bar ** (2.0 - om)) * pl ** ((om - 2.0) / 2.0) * g2
    e_rd_gt = g3 / (math.sqrt(pl) * g2)
    e_rc_gt = (4.0 * pl ** ((4.0 - om) / 2.0) / ((2.0 - om) * g2)) * (
        g5 / (2.0 * pl ** ((5.0 - om) / 2.0))
        + r_bar ** (2.0 - om)
        * (
            erfc(r_bar * math.sqrt(pl)) / (4.0 * math.pi * lam**1.5)
            + r_bar * math.exp(-x_cap) / (2.0 * pl)
        )
    )
    e_rd_lt = (2.0 - om) / (1.0 - p_gt) * (
        r_bar / (3.0 - om)
        - pl ** ((om - 3.0) / 2.0) / (2.0 * r_bar ** (2.0 - om)) * g3
    )
    e_rc_lt = (
        (erf(math.sqrt(pl) * r_bar) / (2.0 * math.sqrt(lam)) - r_bar * math.exp(-x_cap))
        / (1.0 - p_gt)
        - g5 / (pl ** ((3.0 - om) / 2.0) * r_bar ** (2.0 - om) * (1.0 - p_gt))
    )

    mu_rc2 = math.sqrt(1.0 / (4.0 * lam) + ((2.0 - om) / (3.0 - om) * r_bar) ** 2)
    mu_gt = math.hypot(e_rc_gt, e_rd_gt)
    mu_lt = math.hypot(e_rc_lt, e_rd_lt)

    p_neq = 1.0 - math.exp(-lam * area)
    term_gt = (mu_gt + e_rc_gt - e_rd_gt) / 2.0
    term_lt = (mu_lt + (e_rd_lt - e_rc_lt)) / 4.0
    mu_re = (1.0 - p_neq) * mu_rc2 + p_neq * (p_gt * term_gt + (1.0 - p_gt) * term_lt)

    return ReDistanceIntermediates(
        p_neq=float(p_neq),
        area=float(area),
        p_rc_gt_rd=float(p_gt),
        mu_rc2=float(mu_rc2),
        mu_gt=float(mu_gt),
        mu_lt=float(mu_lt),
        e_rd_gt=float(e_rd_gt),
        e_rc_gt=float(e_rc_gt),
        e_rd_lt=float(e_rd_lt),
        e_rc_lt=float(e_rc_lt),
        mu_re=float(mu_re),
    )


@lru_cache(maxsize=None)
def _intermediates_cached(cfg: NetworkConfig) -> ReDistanceIntermediates:
    return _assemble(cfg, crescent_area(cfg))


def re_distance_intermediates(cfg: NetworkConfig, area=None) -> ReDistanceIntermediates:
    """All mu_re building blocks; pass area to override the quadrature
    (used by tests to force degenerate geometries)."""
    if area is None:
        return _intermediates_cached(cfg)
    return _assemble(cfg, area)


def mu_re(cfg: NetworkConfig) -> float:
    """Mean of the modeled r-D2D nearest-BS distance; cached per config."""
    return _intermediates_cached(cfg).mu_re


def pdf_re(x, cfg: NetworkConfig):
    """Rayleigh density of the r-D2D nearest-BS distance model."""
    if np.any(np.asarray(x) < 0):
        raise ValueError("pdf_re domain is x >= 0")
    b = cfg.derived().b
    return 2.0 * b * x * np.exp(-b * np.square(x))


def cdf_re(x, cfg: NetworkConfig):
    if np.any(np.asarray(x) < 0):
        raise ValueError("cdf_re domain is x >= 0")
    b = cfg.derived().b
    return 1.0 - np.exp(-b * np.square(x))
