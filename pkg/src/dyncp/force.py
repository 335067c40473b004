"""Closed-form static and dynamical Casimir-Polder force on an excited atom.

Everything is dimensionless: ``phi = F d**4 / mu**2`` as a function of
``x0 = 2 k0 d`` and ``a = c t / (2 d)``.  In these variables ``c t = 2 a d``,
``2 d k0 = x0`` and ``c k0 t = a x0``.

The dynamical force is a sum of separately named terms.  Before the
round-trip time (a < 1) there are two rational terms plus a Ci pair and an Si
pair; after it (a > 1) three rational terms plus the same pairs without the
constant pi.  ``TERMS`` holds the adopted form of each term; ``VARIANTS``
keeps competing readings of the ambiguous ones so that ``dyncp.validation``
can score every reading against the regularized-quadrature oracle.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import specfun
from .errors import DomainError, LightConeError
from .scenario import DEFAULT_LIGHT_CONE_WINDOW, Regime, classify, force_scale, reduce

_NORM = 1.0 / (12.0 * math.pi)


@dataclass(frozen=True)
class ForceResult:
    phi_static: float
    phi_dyn: float | None
    phi_total: float | None
    regime: Regime
    physical_value: float | None = None

    @property
    def available(self):
        return self.phi_dyn is not None


def _positive(x0):
    x0 = np.asarray(x0, dtype=float)
    if not np.all(x0 > 0) or not np.all(np.isfinite(x0)):
        raise DomainError("x0 must be finite and positive")
    return x0


def _ret(v, like):
    return float(v) if np.ndim(like) == 0 else v


# --- trigonometric weights shared by the static and dynamical parts ----------------


def ci_weight(x0):
    """Factor multiplying the Ci pair: 2dk0(3-2d^2k0^2)cos(2dk0) + 3(2d^2k0^2-1)sin(2dk0)."""
    h = 0.5 * x0 * x0
    return x0 * (3.0 - h) * np.cos(x0) + 3.0 * (h - 1.0) * np.sin(x0)


def si_weight(x0):
    """Factor multiplying the Si pair: 3(1-2d^2k0^2)cos(2dk0) + 2dk0(3-2d^2k0^2)sin(2dk0)."""
    h = 0.5 * x0 * x0
    return 3.0 * (1.0 - h) * np.cos(x0) + x0 * (3.0 - h) * np.sin(x0)


# --- static force --------------------------------------------------------------------


def static_force(x0):
    """Time-independent force on the excited atom, F_stat d^4 / mu^2.

    Attractive (-1/4) at short distance; oscillates with zeros roughly pi apart
    in x0 at large distance, driven by the resonant photon emission.
    """
    z = _positive(x0)
    aux = specfun.aux_fg(z)
    f_res = aux.f_val - math.pi * np.cos(z)
    g_res = aux.g_val - math.pi * np.sin(z)
    phi = _NORM * (4.0 * z - 3.0 * (z * z - 2.0) * f_res - z * (z * z - 6.0) * g_res)
    return _ret(phi, x0)


# --- dynamical terms, a < 1 ----------------------------------------------------------


def before_rational_sin(x0, a):
    a2 = a * a
    poly = 18.0 - 16.0 * a2 + 6.0 * a2 * a2 - x0 * x0 * (1.0 - a2) ** 2
    return _NORM * a * poly * np.sin(a * x0) / (1.0 - a2) ** 3


def before_rational_sin_plus_denominator(x0, a):
    a2 = a * a
    poly = 18.0 - 16.0 * a2 + 6.0 * a2 * a2 - x0 * x0 * (1.0 - a2) ** 2
    return _NORM * a * poly * np.sin(a * x0) / (1.0 + a2) ** 3


def before_rational_cos(x0, a):
    a2 = a * a
    return -_NORM * 2.0 * x0 * (2.0 - a2) * np.cos(a * x0) / (1.0 - a2) ** 2


def before_ci_pair(x0, a):
    ci_sum = specfun.cos_integral(x0 * (1.0 + a)) + specfun.cos_integral(x0 * (1.0 - a))
    return _NORM * ci_weight(x0) * ci_sum


def before_si_pair(x0, a):
    si_sum = math.pi + specfun.sin_integral(x0 * (1.0 + a)) + specfun.sin_integral(x0 * (1.0 - a))
    return _NORM * si_weight(x0) * si_sum


def before_si_pair_without_pi(x0, a):
    si_sum = specfun.sin_integral(x0 * (1.0 + a)) + specfun.sin_integral(x0 * (1.0 - a))
    return _NORM * si_weight(x0) * si_sum


# --- dynamical terms, a > 1 ----------------------------------------------------------


def after_rational_first(x0, a):
    num = -2.0 * x0 * np.cos(a * x0) + a * (2.0 - x0 * x0) * np.sin(a * x0)
    return _NORM * num / (1.0 - a * a)


def after_rational_second(x0, a):
    return -_NORM * 2.0 * x0 * np.cos(a * x0) / (1.0 - a * a) ** 2


def after_rational_third(x0, a):
    a2 = a * a
    return _NORM * 4.0 * a * (a2 * a2 - 3.0 * a2 + 4.0) * np.sin(a * x0) / (1.0 - a2) ** 3


def after_rational_third_half(x0, a):
    return 0.5 * after_rational_third(x0, a)


def after_ci_pair(x0, a):
    ci_sum = specfun.cos_integral(x0 * (a + 1.0)) + specfun.cos_integral(x0 * (a - 1.0))
    return _NORM * ci_weight(x0) * ci_sum


def after_si_pair(x0, a):
    si_diff = specfun.sin_integral(x0 * (a + 1.0)) - specfun.sin_integral(x0 * (a - 1.0))
    return _NORM * si_weight(x0) * si_diff


def after_ci_pair_sixfold(x0, a):
    return 6.0 * after_ci_pair(x0, a)


def after_si_pair_sixfold(x0, a):
    return 6.0 * after_si_pair(x0, a)


def after_si_pair_with_pi(x0, a):
    return after_si_pair(x0, a) + _NORM * math.pi * si_weight(x0)


TERMS = {
    Regime.BEFORE_ROUND_TRIP: {
        "before.rational_sin": before_rational_sin,
        "before.rational_cos": before_rational_cos,
        "before.ci_pair": before_ci_pair,
        "before.si_pair": before_si_pair,
    },
    Regime.AFTER_ROUND_TRIP: {
        "after.rational_first": after_rational_first,
        "after.rational_second": after_rational_second,
        "after.rational_third": after_rational_third,
        "after.ci_pair": after_ci_pair,
        "after.si_pair": after_si_pair,
    },
}

# description of the adopted form of every term that has competing readings
ADOPTED = {
    "before.rational_sin": "denominator (4d^2 - c^2 t^2)^3",
    "before.si_pair": "Si bracket including the constant pi",
    "after.rational_third": "prefactor 2/(3 pi)",
    "after.ci_pair": "bracket prefactor 1/(12 pi d^4)",
    "after.si_pair": "bracket prefactor 1/(12 pi d^4), no constant pi",
}

# adopted term name -> {variant label: (function, description)}
VARIANTS = {
    "before.rational_sin": {
        "plus_denominator": (before_rational_sin_plus_denominator, "denominator (4d^2 + c^2 t^2)^3"),
    },
    "before.si_pair": {
        "without_pi": (before_si_pair_without_pi, "Si bracket without the constant pi"),
    },
    "after.rational_third": {
        "half": (after_rational_third_half, "prefactor 1/(3 pi) instead of 2/(3 pi)"),
    },
    "after.ci_pair": {
        "sixfold": (after_ci_pair_sixfold, "bracket prefactor 1/(2 pi d^4) instead of 1/(12 pi d^4)"),
    },
    "after.si_pair": {
        "sixfold": (after_si_pair_sixfold, "bracket prefactor 1/(2 pi d^4) instead of 1/(12 pi d^4)"),
        "with_pi": (after_si_pair_with_pi, "Si bracket with an added constant pi"),
    },
}


def dynamical_terms(x0, a, scale=None):
    """Named contributions to the dynamical force at a single regime.

    ``scale`` maps term names to multipliers; it exists so validation can
    inject a faulty term and check that the oracle names it.
    """
    z = _positive(x0)
    a_arr = np.asarray(a, dtype=float)
    regime = classify(float(np.max(a_arr)) if a_arr.size else 0.0, 0.0)
    if a_arr.size and classify(float(np.min(a_arr)), 0.0) is not regime:
        raise DomainError("dynamical_terms needs all points on one side of the light cone")
    scale = scale or {}
    return {name: scale.get(name, 1.0) * fn(z, a_arr) for name, fn in TERMS[regime].items()}


def dynamical_force(x0, a, window=DEFAULT_LIGHT_CONE_WINDOW, scale=None):
    """Time-dependent part of the force, F_dyn d^4 / mu^2.

    Accepts scalars or broadcastable arrays.  Raises LightConeError if any
    point lies within ``window`` of a = 1.
    """
    z, a_arr = np.broadcast_arrays(_positive(x0), np.asarray(a, dtype=float))
    if np.any(a_arr < 0) or not np.all(np.isfinite(a_arr)):
        raise DomainError("a must be finite and non-negative")
    near = np.abs(a_arr - 1.0) < window
    if near.any():
        raise LightConeError(float(a_arr[near].flat[0]), window)
    out = np.empty(z.shape)
    before = a_arr < 1.0
    for mask in (before, ~before):
        if mask.any():
            terms = dynamical_terms(z[mask], a_arr[mask], scale)
            # fixed summation order keeps results independent of the caller
            out[mask] = sum(terms.values())
    return float(out) if out.ndim == 0 else out


def total_force(x0, a, scenario=None, window=DEFAULT_LIGHT_CONE_WINDOW, scale=None):
    """Static plus dynamical force at one reduced point."""
    phi_static = static_force(x0)
    phi_dyn = dynamical_force(x0, a, window, scale)
    phi_total = phi_static + phi_dyn
    physical = None if scenario is None else phi_total * force_scale(scenario).value
    return ForceResult(phi_static, phi_dyn, phi_total, classify(a, window), physical)


def force_at(scenario, t, window=DEFAULT_LIGHT_CONE_WINDOW):
    """ForceResult for a physical scenario at time t; light-cone points come back flagged."""
    point = reduce(scenario, t, window)
    phi_static = static_force(point.x0)
    if point.regime is Regime.LIGHT_CONE:
        return ForceResult(phi_static, None, None, point.regime)
    return total_force(point.x0, point.a, scenario, window)


def force_table(x0, a, window=DEFAULT_LIGHT_CONE_WINDOW):
    """Vectorized evaluation for scans; light-cone entries are NaN in dyn/total."""
    z, a_arr = np.broadcast_arrays(_positive(x0), np.asarray(a, dtype=float))
    phi_static = np.asarray(static_force(z), dtype=float).reshape(z.shape)
    phi_dyn = np.full(z.shape, np.nan)
    ok = np.abs(a_arr - 1.0) >= window
    if ok.any():
        phi_dyn[ok] = dynamical_force(z[ok], a_arr[ok], window)
    return phi_static, phi_dyn, phi_static + phi_dyn


# --- energy -------------------------------------------------------------------------


def energy_shift(x0, a, settings=None):
    """Dimensionless energy shift Delta E d^3 / mu^2 by regularized quadrature."""
    from .oracle import energy_quadrature

    return energy_quadrature(x0, a, settings)


# --- zeros and extrema of the static force ------------------------------------------


def static_force_zeros(x0_min, x0_max, step=0.05, xtol=1e-10):
    """All sign changes of the static force in [x0_min, x0_max], bisected to ``xtol``."""
    if not 0 < x0_min < x0_max:
        raise DomainError("need 0 < x0_min < x0_max")
    n = max(2, int(math.ceil((x0_max - x0_min) / step)) + 1)
    grid = np.linspace(x0_min, x0_max, n)
    values = static_force(grid)
    roots = []
    for lo, hi, vlo, vhi in zip(grid[:-1], grid[1:], values[:-1], values[1:]):
        if vlo == 0.0:
            roots.append(float(lo))
        elif vlo * vhi < 0:
            roots.append(optimize.bisect(static_force, lo, hi, xtol=xtol))
    if values[-1] == 0.0:
        roots.append(float(grid[-1]))
    return roots


def static_force_first_maximum(xtol=1e-10):
    """x0 at which the static force first peaks on its repulsive lobe at fixed k0.

    At fixed transition wavenumber the physical force is mu^2 (2 k0)^4 phi(x0)/x0^4,
    so the peak is that of phi(x0)/x0**4 between the first two zeros.
    """
    first, second = static_force_zeros(0.5, 20.0)[:2]
    res = optimize.minimize_scalar(
        lambda z: -static_force(z) / z**4, bounds=(first, second), method="bounded", options={"xatol": xtol}
    )
    return float(res.x)
