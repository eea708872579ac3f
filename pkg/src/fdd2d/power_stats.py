"""Transmit-power statistics under truncated channel inversion.

Every transmitter inverts its link's path loss to hit the receiver
sensitivity of its mode and stays silent when that would exceed P_u (or,
for D2D, the interference-protection budget). Conditioned on being
active, the power has a known density on (0, cap]; its fractional
moments and Laplace transform drive the interference field and the
self-interference factor.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .config import Mode, NetworkConfig
from .numerics import DEFAULT_QUADRATURE, integrate, lower_incomplete_gamma
from .mode_selection import activity_params


class PowerLaw:
    """Power distribution of an active transmitter in one mode.

    pdf integrates to one over the support (0, cap]; moment(alpha) is the
    conditional fractional moment E[P^alpha]; laplace(s) = E[exp(-s P)].
    """

    def __init__(self, mode: Mode, cfg: NetworkConfig):
        self.mode = mode
        self.cfg = cfg
        d = cfg.derived()
        if mode is Mode.CELLULAR:
            # inversion to rho_c over eta_c, truncated at P_u
            self.cap = cfg.p_u
            self.power_exp = 2.0 / cfg.eta_c
            self.rate = math.pi * cfg.lambda_bs
            self.scale = cfg.rho_c
            self.shape = 1.0
            self.norm = 1.0 - d.o_p
        else:
            if cfg.t_d == 0:
                raise ValueError(f"mode {mode.value} has no active transmitters at t_d=0")
            rate, rho, cap, shape, _ = activity_params(mode, cfg)
            self.cap = cap
            self.power_exp = (2.0 - cfg.omega) / cfg.eta_d
            self.rate = rate
            self.scale = cfg.rho_c * cfg.t_d
            self.shape = shape
            self.norm = None  # set below from the same gamma form
        self.gamma_arg = self.rate * (self.cap / self.scale) ** (2.0 / cfg.eta_c)
        if self.norm is None:
            # activity probability, written via the moment kernel so pdf
            # and moments share one normalization
            self.norm = self._kernel(0.0)

    def _kernel(self, alpha):
        """Integral of x^alpha against the unnormalized density."""
        a = self.shape + alpha * self.cfg.eta_c / 2.0
        if a <= 0:
            raise ValueError(f"moment of order {alpha} diverges")
        base = lower_incomplete_gamma(a, self.gamma_arg)
        if self.mode is Mode.CELLULAR:
            return self.scale**alpha * base / self.rate ** (alpha * self.cfg.eta_c / 2.0)
        cfg = self.cfg
        r_bar = cfg.derived().r_bar
        c_pref = (2.0 - cfg.omega) * cfg.eta_c / (2.0 * cfg.eta_d * r_bar ** (2.0 - cfg.omega))
        rho = cfg.derived().rho_d if self.mode is Mode.F_D2D else cfg.derived().rho_e
        pref = c_pref * (self.scale / (self.rate ** (cfg.eta_c / 2.0) * rho)) ** self.power_exp
        return pref * self.scale**alpha * base / self.rate ** (alpha * self.cfg.eta_c / 2.0)

    def _pdf_const(self) -> float:
        cfg = self.cfg
        if self.mode is Mode.CELLULAR:
            return 2.0 * self.rate / (cfg.eta_c * self.scale ** self.power_exp * self.norm)
        r_bar = cfg.derived().r_bar
        rho = cfg.derived().rho_d if self.mode is Mode.F_D2D else cfg.derived().rho_e
        return (2.0 - cfg.omega) / (
            cfg.eta_d * r_bar ** (2.0 - cfg.omega) * rho ** self.power_exp * self.norm
        )

    def pdf(self, x):
        arr = np.asarray(x, dtype=float)
        if np.any(arr < 0):
            raise ValueError("power pdf domain is x >= 0")
        with np.errstate(divide="ignore", over="ignore"):
            body = arr ** (self.power_exp - 1.0) * np.exp(
                -self.rate * (arr / self.scale) ** (2.0 / self.cfg.eta_c)
            )
        out = self._pdf_const() * body
        return np.where((arr > 0) & (arr <= self.cap), out, 0.0)

    def moment(self, alpha) -> float:
        """Conditional fractional moment E[P^alpha] of an active transmitter."""
        return float(self._kernel(alpha) / self.norm)

    def laplace(self, s) -> float:
        """E[exp(-s P)] for s >= 0, via endpoint-desingularized quadrature."""
        if s < 0:
            raise ValueError(f"laplace transform needs s >= 0, got {s}")
        if s == 0:
            return 1.0
        # substitute u = x^power_exp so the x^(power_exp - 1) factor in the
        # pdf becomes flat; remaining integrand is a product of exponentials
        p = self.power_exp
        inv_p = 1.0 / p
        u_hi = self.cap**p
        pdf_const = self._pdf_const()
        two_over_eta_c = 2.0 / self.cfg.eta_c

        def g(u):
            x = u**inv_p
            return math.exp(-s * x - self.rate * (x / self.scale) ** two_over_eta_c)

        value = (pdf_const / p) * integrate(g, 0.0, u_hi, DEFAULT_QUADRATURE)
        return min(max(value, 0.0), 1.0)


@lru_cache(maxsize=None)
def power_law(mode: Mode, cfg: NetworkConfig) -> PowerLaw:
    return PowerLaw(mode, cfg)


def si_laplace(mode: Mode, cfg: NetworkConfig, s) -> float:
    """Self-interference attenuation factor E[exp(-s zeta P_mode)].

    Exactly 1 when zeta = 0 or s = 0. Only D2D modes carry a
    simultaneous reverse link, so cellular is rejected.
    """
    if mode is Mode.CELLULAR:
        raise ValueError("self-interference factor applies to D2D modes only")
    if cfg.zeta == 0 or s == 0:
        return 1.0
    return power_law(mode, cfg).laplace(s * cfg.zeta)
