"""Sine and cosine integrals and their auxiliary functions f, g.

For ``|x| <= 4`` Si and Ci come from their Maclaurin series.  Beyond that the
auxiliary pair is evaluated directly from the continued fraction of
``exp(z) E1(z)`` at ``z = i x`` (modified Lentz), using

    g(x) - i f(x) = exp(i x) E1(i x),

and Si, Ci are reconstructed from (f, g).  The closed-form forces consume f, g
at large arguments where recomposing them from Si - pi/2 and Ci would cancel
catastrophically, so the continued-fraction branch is the reference there.

All functions accept scalars or numpy arrays; scalars come back as floats.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

EULER_GAMMA = 0.57721566490153286060651209008240243
HALF_PI = 0.5 * np.pi

SERIES_LIMIT = 4.0
_SERIES_TERMS = 26
_CF_EPS = 1e-16
_CF_MAX_ITER = 1000


@dataclass(frozen=True)
class AuxPair:
    f_val: float
    g_val: float
    at: float


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _out(arr, scalar):
    return float(arr) if scalar else arr


def _si_ci_series(x):
    """Maclaurin series for Si and Ci - gamma - ln x, x > 0 and small."""
    x2 = x * x
    term = x.copy()  # (-1)^n x^(2n+1) / (2n+1)!
    si = x.copy()
    cterm = np.ones_like(x)  # (-1)^n x^(2n) / (2n)!
    ci = np.zeros_like(x)
    for n in range(1, _SERIES_TERMS):
        cterm = -cterm * x2 / ((2 * n - 1) * (2 * n))
        ci += cterm / (2 * n)
        term = -term * x2 / ((2 * n) * (2 * n + 1))
        si += term / (2 * n + 1)
    return si, ci


def _fg_continued_fraction(x):
    """f and g for x > 2 from the continued fraction of exp(ix) E1(ix)."""
    tiny = 1e-300
    b = 1.0 + 1j * x
    c = np.full(x.shape, 1.0 / tiny, dtype=complex)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for i in range(2, _CF_MAX_ITER):
        a = -float((i - 1) * (i - 1))
        b = b + 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) >= _CF_EPS
        if not active.any():
            break
    else:  # pragma: no cover - the fraction converges for x > 2
        raise ArithmeticError("continued fraction for E1(ix) did not converge")
    return -h.imag, h.real


def _sici_positive(x):
    """Si and Ci for an array of strictly positive arguments."""
    si = np.empty_like(x)
    ci = np.empty_like(x)
    small = x <= SERIES_LIMIT
    if small.any():
        xs = x[small]
        s, c = _si_ci_series(xs)
        si[small] = s
        ci[small] = EULER_GAMMA + np.log(xs) + c
    big = ~small
    if big.any():
        xb = x[big]
        f, g = _fg_continued_fraction(xb)
        sn, cs = np.sin(xb), np.cos(xb)
        si[big] = HALF_PI - f * cs - g * sn
        ci[big] = f * sn - g * cs
    return si, ci


def sin_integral(x):
    """Si(x) = integral of sin(u)/u from 0 to x; odd in x."""
    arr, scalar = _as_array(x)
    if not np.all(np.isfinite(arr)):
        raise DomainError("Si requires a finite argument")
    ax = np.abs(arr).reshape(-1)
    out = np.zeros_like(ax)
    nz = ax > 0
    out[nz] = _sici_positive(ax[nz])[0]
    out = np.copysign(out, arr.reshape(-1)).reshape(arr.shape)
    return _out(out, scalar)


def cos_integral(x):
    """Ci(x) = gamma + ln x + integral of (cos u - 1)/u from 0 to x, for x > 0."""
    arr, scalar = _as_array(x)
    if not np.all(arr > 0) or not np.all(np.isfinite(arr)):
        raise DomainError("Ci requires a finite argument x > 0")
    out = _sici_positive(arr.reshape(-1))[1].reshape(arr.shape)
    return _out(out, scalar)


def sici(x):
    """(Si(x), Ci(x)) for x > 0 in a single pass."""
    arr, scalar = _as_array(x)
    if not np.all(arr > 0) or not np.all(np.isfinite(arr)):
        raise DomainError("sici requires a finite argument x > 0")
    si, ci = _sici_positive(arr.reshape(-1))
    return _out(si.reshape(arr.shape), scalar), _out(ci.reshape(arr.shape), scalar)


def aux_fg(z):
    """Auxiliary functions of the sine and cosine integrals.

    f(z) = Ci(z) sin z - (Si(z) - pi/2) cos z
    g(z) = -Ci(z) cos z - (Si(z) - pi/2) sin z

    Both decay at large z (f ~ 1/z, g ~ 1/z**2); above ``SERIES_LIMIT`` they are
    computed without forming Si - pi/2.
    """
    arr, scalar = _as_array(z)
    if not np.all(arr > 0) or not np.all(np.isfinite(arr)):
        raise DomainError("aux_fg requires a finite argument z > 0")
    flat = arr.reshape(-1)
    f = np.empty_like(flat)
    g = np.empty_like(flat)
    small = flat <= SERIES_LIMIT
    if small.any():
        zs = flat[small]
        s, c = _si_ci_series(zs)
        ci = EULER_GAMMA + np.log(zs) + c
        shifted = s - HALF_PI
        sn, cs = np.sin(zs), np.cos(zs)
        f[small] = ci * sn - shifted * cs
        g[small] = -ci * cs - shifted * sn
    big = ~small
    if big.any():
        f[big], g[big] = _fg_continued_fraction(flat[big])
    return AuxPair(
        f_val=_out(f.reshape(arr.shape), scalar),
        g_val=_out(g.reshape(arr.shape), scalar),
        at=_out(arr, scalar),
    )
