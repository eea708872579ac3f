"""Special functions and quadrature primitives shared by the analytical engine.

Everything here is a thin, contract-checked layer over scipy: incomplete
gamma functions in their unregularized form, erf/erfc, the Gauss
hypergeometric function restricted to nonpositive arguments, and an
adaptive integrator with explicit handling of infinite upper limits and
integrable endpoint singularities.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import scipy.integrate
import scipy.special


class NumericsError(Exception):
    """Raised when a quadrature fails to reach the requested tolerance."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and limits for adaptive quadrature.

    infinite_tail_cutoff_policy selects how an infinite upper limit is
    handled: "transform_to_finite" substitutes x = lower + t/(1-t) and
    integrates over (0,1); "adaptive_truncation" extends a finite window
    until the estimated tail contribution is below tolerance.
    """

    relative_tolerance: float = 1e-9
    absolute_tolerance: float = 1e-12
    max_subdivisions: int = 200
    infinite_tail_cutoff_policy: str = "transform_to_finite"

    def __post_init__(self):
        if self.relative_tolerance <= 0:
            raise ValueError("relative_tolerance must be > 0")
        if self.absolute_tolerance < 0:
            raise ValueError("absolute_tolerance must be >= 0")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if self.infinite_tail_cutoff_policy not in (
            "transform_to_finite",
            "adaptive_truncation",
        ):
            raise ValueError(
                "infinite_tail_cutoff_policy must be 'transform_to_finite' "
                "or 'adaptive_truncation'"
            )


DEFAULT_QUADRATURE = QuadratureSpec()


def lower_incomplete_gamma(m, n):
    """Unregularized lower incomplete gamma: integral of x^(m-1) e^-x on [0, n]."""
    if m <= 0:
        raise ValueError(f"lower_incomplete_gamma requires m > 0, got m={m}")
    if n < 0:
        raise ValueError(f"lower_incomplete_gamma requires n >= 0, got n={n}")
    return scipy.special.gamma(m) * scipy.special.gammainc(m, n)


def upper_incomplete_gamma(m, n):
    """Unregularized upper incomplete gamma: integral of x^(m-1) e^-x on [n, inf)."""
    if m <= 0:
        raise ValueError(f"upper_incomplete_gamma requires m > 0, got m={m}")
    if n < 0:
        raise ValueError(f"upper_incomplete_gamma requires n >= 0, got n={n}")
    return scipy.special.gamma(m) * scipy.special.gammaincc(m, n)


def erf_erfc(x):
    """Return the pair (erf(x), erfc(x))."""
    return float(scipy.special.erf(x)), float(scipy.special.erfc(x))


def gauss_2f1(a, b, c, z):
    """Gauss hypergeometric 2F1(a, b; c; z) for z <= 0.

    Positive z is rejected: every use in the interference transforms
    evaluates at z = -s * power_scale <= 0, where the series/transform
    combination below scipy is unconditionally convergent.
    """
    if z > 0:
        raise ValueError(f"gauss_2f1 is restricted to z <= 0, got z={z}")
    if c <= 0 and float(c).is_integer():
        raise ValueError(f"gauss_2f1 undefined for nonpositive integer c={c}")
    return float(scipy.special.hyp2f1(a, b, c, z))


def _quad(f, lo, hi, spec):
    with warnings.catch_warnings():
        warnings.simplefilter("error", scipy.integrate.IntegrationWarning)
        try:
            value, err = scipy.integrate.quad(
                f,
                lo,
                hi,
                epsabs=spec.absolute_tolerance,
                epsrel=spec.relative_tolerance,
                limit=spec.max_subdivisions,
            )
        except scipy.integrate.IntegrationWarning as exc:
            raise NumericsError(f"quadrature did not converge on [{lo}, {hi}]: {exc}")
    return value, err


def integrate(f, lower, upper, spec: QuadratureSpec = DEFAULT_QUADRATURE):
    """Adaptive quadrature of f on [lower, upper], upper may be math.inf.

    Integrable endpoint singularities of power-law type are handled by the
    underlying adaptive rule. Raises NumericsError when the subdivision
    budget is exhausted before reaching tolerance.
    """
    if upper != math.inf:
        return _quad(f, lower, upper, spec)[0]

    if spec.infinite_tail_cutoff_policy == "transform_to_finite":
        # x = lower + t/(1-t), dx = dt/(1-t)^2 maps [lower, inf) to [0, 1)
        def g(t):
            one_minus = 1.0 - t
            return f(lower + t / one_minus) / (one_minus * one_minus)

        return _quad(g, 0.0, 1.0, spec)[0]

    # adaptive_truncation: grow the window until the marginal piece is
    # negligible against the accumulated total
    total = 0.0
    lo = lower
    width = 1.0
    for _ in range(spec.max_subdivisions):
        piece, _ = _quad(f, lo, lo + width, spec)
        total += piece
        tol = max(spec.absolute_tolerance, spec.relative_tolerance * abs(total))
        if abs(piece) < tol and width > 1.0:
            return total
        lo += width
        width *= 2.0
    raise NumericsError("adaptive_truncation did not converge")
