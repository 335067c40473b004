"""Independent numerical checks of the closed forms.

Three routes, none of which touches the Si/Ci closed forms:

* Abel-regularized quadrature of the energy integral
      e(x0, a) = -1/(12 pi) int_0^inf h(x)/(x - x0) (1 - cos a(x - x0)) dx,
      h(x) = -2x cos x + (2 - x^2) sin x,
  damped by exp(-eps x) and Richardson-extrapolated to eps -> 0;
* the same integral written through the operator 2 - 2 d/dm + d^2/dm^2
  acting on sin(m x), differentiated in m by central differences;
* a discrete mode sum over a cubic cavity with one face on the wall.

Forces follow from the energies by central differences in the distance d,
remembering that both x0 = 2 k0 d and a = c t / 2d move with d.
"""
import enum
import math
import os
from dataclasses import dataclass, field

import numba
import numpy as np
import scipy.fft

from .errors import ConvergenceError, DomainError, LightConeError, ValidityError
from .scenario import DEFAULT_LIGHT_CONE_WINDOW, reduce

_NORM = 1.0 / (12.0 * math.pi)
_GL_LOW = np.polynomial.legendre.leggauss(16)
_GL_HIGH = np.polynomial.legendre.leggauss(24)
_TAYLOR_BAND = 1e-4
RESIDUAL_LIMIT = 1e-6


class EnergyMethod(str, enum.Enum):
    REGULARIZED_QUADRATURE = "RegularizedQuadrature"
    OPERATOR_FORM = "OperatorFormQuadrature"


@dataclass(frozen=True)
class EnergyShiftResult:
    value: float
    method: EnergyMethod
    estimated_error: float
    ladder: tuple = ()
    samples: tuple = ()


@dataclass(frozen=True)
class QuadratureSettings:
    """Controls for the Abel-regularized quadrature.

    The ladder is rescaled by min(1, 2|1 - a|) so its largest rung stays well
    inside the radius of convergence of the expansion in eps, which shrinks
    to |1 - a| near the light cone.  ``x_max=None`` picks
    max(50 x0, 40/eps) per rung.
    """

    epsilon_ladder: tuple = (0.1, 0.05, 0.025, 0.0125, 0.00625, 0.003125)
    x_max: float | None = None
    panel_tolerance: float = 1e-10
    extrapolation_order: int = 5
    scale_to_light_cone: bool = True

    def __post_init__(self):
        ladder = tuple(float(e) for e in self.epsilon_ladder)
        object.__setattr__(self, "epsilon_ladder", ladder)
        if not ladder or any(e <= 0 for e in ladder):
            raise DomainError("epsilon ladder must be non-empty and positive")
        if any(b >= a for a, b in zip(ladder, ladder[1:])):
            raise DomainError("epsilon ladder must be strictly decreasing")
        if not 1 <= self.extrapolation_order < len(ladder):
            raise DomainError("extrapolation order must be >= 1 and below the ladder length")

    def ladder_for(self, a):
        if not self.scale_to_light_cone:
            return np.array(self.epsilon_ladder)
        return np.array(self.epsilon_ladder) * min(1.0, 2.0 * abs(1.0 - a))

    def upper_limit(self, x0, eps):
        if self.x_max is not None:
            if self.x_max < 10.0 * x0:
                raise DomainError("x_max must be at least 10 x0")
            return self.x_max
        return max(50.0 * x0, 40.0 / eps)


DEFAULT_QUADRATURE = QuadratureSettings()


# --- quadrature machinery ------------------------------------------------------------


def _panel_nodes(lo, hi, width, rule):
    n_panels = max(1, int(math.ceil((hi - lo) / width)))
    edges = np.linspace(lo, hi, n_panels + 1)
    nodes, weights = rule
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    x = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    return x, w


_CHUNK_PANELS = 20000


def _apply_rule(fn, lo, hi, width, rule):
    """Composite rule evaluated in chunks of panels to bound memory."""
    n_panels = max(1, int(math.ceil((hi - lo) / width)))
    step = (hi - lo) / n_panels
    total = 0.0
    for first in range(0, n_panels, _CHUNK_PANELS):
        last = min(first + _CHUNK_PANELS, n_panels)
        x, w = _panel_nodes(lo + first * step, lo + last * step, step, rule)
        total += float(np.dot(w, fn(x)))
    return total


def _integrate(fn, lo, hi, width, tol):
    """Composite Gauss-Legendre on equal panels, refined until two rules agree."""
    for _ in range(6):
        high = _apply_rule(fn, lo, hi, width, _GL_HIGH)
        low = _apply_rule(fn, lo, hi, width, _GL_LOW)
        if abs(high - low) <= tol * max(1.0, abs(high)):
            return high
        width *= 0.5
    raise ConvergenceError("panel quadrature did not meet its tolerance", abs(high - low))


def _neville_at_zero(eps, values):
    """Polynomial extrapolation of values(eps) to eps = 0."""
    p = list(values)
    n = len(eps)
    for k in range(1, n):
        for i in range(n - k):
            p[i] = (eps[i + k] * p[i] - eps[i] * p[i + 1]) / (eps[i + k] - eps[i])
    return p[0]


def _extrapolate(eps, values, order):
    eps = np.asarray(eps)
    values = np.asarray(values)
    best = _neville_at_zero(eps[-(order + 1):], values[-(order + 1):])
    lower = _neville_at_zero(eps[-order:], values[-order:])
    return best, abs(best - lower)


def h_kernel(x):
    """-2x cos x + (2 - x^2) sin x: polarization-summed, angle-integrated mode weight."""
    return -2.0 * x * np.cos(x) + (2.0 - x * x) * np.sin(x)


def brace_over_pole(x, x0, a):
    """(1 - cos a(x - x0)) / (x - x0), with its Taylor form next to the pole."""
    u = x - x0
    near = np.abs(u) < _TAYLOR_BAND
    safe = np.where(near, 1.0, u)
    s = np.sin(0.5 * a * safe)
    far = 2.0 * s * s / safe
    au2 = (a * u) ** 2
    return np.where(near, 0.5 * a * a * u * (1.0 - au2 / 12.0), far)


def _panel_width(freq):
    # one period of the fastest oscillation per 24-point panel
    return min(2.0, 2.0 * math.pi / freq)


def _check_point(x0, a):
    if not (math.isfinite(x0) and x0 > 0):
        raise DomainError("x0 must be finite and positive")
    if not (math.isfinite(a) and a >= 0):
        raise DomainError("a must be finite and non-negative")


def _abel_ladder(integral_at, ladder, settings, method):
    # energies at each rung, extrapolated to eps = 0
    samples = [-_NORM * integral_at(eps) for eps in ladder]
    value, residual = _extrapolate(ladder, samples, settings.extrapolation_order)
    if residual > RESIDUAL_LIMIT * max(1.0, abs(value)):
        raise ConvergenceError(f"Abel extrapolation did not converge ({method.value})", residual)
    return EnergyShiftResult(value, method, residual, tuple(ladder), tuple(samples))


@numba.njit(cache=True)
def _braced_panels(lo, step, n_panels, x0, a, eps, nodes_high, weights_high, nodes_low, weights_low):
    """Both Gauss-Legendre rules for the damped, braced energy integrand on equal panels."""
    high = 0.0
    low = 0.0
    for p in range(n_panels):
        mid = lo + (p + 0.5) * step
        half = 0.5 * step
        for nodes, weights, is_high in ((nodes_high, weights_high, True), (nodes_low, weights_low, False)):
            acc = 0.0
            for j in range(nodes.size):
                x = mid + half * nodes[j]
                u = x - x0
                if abs(u) < 1e-4:
                    au2 = (a * u) ** 2
                    brace = 0.5 * a * a * u * (1.0 - au2 / 12.0)
                else:
                    s = math.sin(0.5 * a * u)
                    brace = 2.0 * s * s / u
                h = -2.0 * x * math.cos(x) + (2.0 - x * x) * math.sin(x)
                acc += weights[j] * h * brace * math.exp(-eps * x)
            if is_high:
                high += half * acc
            else:
                low += half * acc
    return high, low


def _braced_integral(x0, a, eps, upper, width, tol):
    for _ in range(6):
        n_panels = max(1, int(math.ceil(upper / width)))
        high, low = _braced_panels(0.0, upper / n_panels, n_panels, x0, a, eps, *_GL_HIGH, *_GL_LOW)
        if abs(high - low) <= tol * max(1.0, abs(high)):
            return high
        width *= 0.5
    raise ConvergenceError("panel quadrature did not meet its tolerance", abs(high - low))


def energy_quadrature(x0, a, settings=None):
    """Delta E d^3 / mu^2 from the regularized frequency integral."""
    settings = settings or DEFAULT_QUADRATURE
    x0, a = float(x0), float(a)
    _check_point(x0, a)
    if a == 0.0:
        return EnergyShiftResult(0.0, EnergyMethod.REGULARIZED_QUADRATURE, 0.0)
    if a == 1.0:
        raise LightConeError(a, 0.0)
    width = _panel_width(1.0 + a)

    def integral_at(eps):
        return _braced_integral(x0, a, eps, settings.upper_limit(x0, eps), width, settings.panel_tolerance)

    return _abel_ladder(integral_at, settings.ladder_for(a), settings, EnergyMethod.REGULARIZED_QUADRATURE)


def static_energy_quadrature(x0, settings=None):
    """Time-independent (t -> infinity) energy: principal value of the pole integral."""
    settings = settings or DEFAULT_QUADRATURE
    x0 = float(x0)
    _check_point(x0, 0.0)
    width = _panel_width(1.0)

    def integral_at(eps):
        upper = settings.upper_limit(x0, eps)
        pole = h_kernel(x0) * math.exp(-eps * x0)

        def near(x):
            u = x - x0
            return (h_kernel(x) * np.exp(-eps * x) - pole) / u

        # nodes sit strictly inside [0, x0] and [x0, 2 x0]; the subtracted pole integrates to zero
        inner = _integrate(near, 0.0, x0, width, settings.panel_tolerance)
        inner += _integrate(near, x0, 2.0 * x0, width, settings.panel_tolerance)
        outer = _integrate(
            lambda x: h_kernel(x) * np.exp(-eps * x) / (x - x0), 2.0 * x0, upper, width, settings.panel_tolerance
        )
        return inner + outer

    return _abel_ladder(integral_at, settings.ladder_for(math.inf), settings, EnergyMethod.REGULARIZED_QUADRATURE)


def energy_quadrature_operator_form(x0, a, m_step=0.01, settings=None, richardson=True):
    """Energy through the m-derivative operator acting on sin(m x).

    The pole-free difference int sin(mx)(1 - cos a(x-x0))/(x - x0) dx is
    evaluated at m = 1, 1 +- m_step and the operator 2 - 2 d/dm + d^2/dm^2 is
    applied by central differences.  With ``richardson`` the stencil is also
    evaluated at m_step/2 and the two are combined to cancel the O(m_step^2)
    error.
    """
    settings = settings or DEFAULT_QUADRATURE
    x0, a = float(x0), float(a)
    _check_point(x0, a)
    if not 1e-4 < m_step < 1e-1:
        raise DomainError("m_step must lie in (1e-4, 1e-1)")
    if a == 0.0:
        return EnergyShiftResult(0.0, EnergyMethod.OPERATOR_FORM, 0.0)
    if a == 1.0:
        raise LightConeError(a, 0.0)
    steps = (m_step, 0.5 * m_step) if richardson else (m_step,)
    ms = sorted({1.0} | {1.0 + s for s in steps} | {1.0 - s for s in steps})
    width = _panel_width(1.0 + m_step + a)

    def integral_at(eps):
        upper = settings.upper_limit(x0, eps)
        x, w = _panel_nodes(0.0, upper, 0.5 * width, _GL_HIGH)
        weight = w * brace_over_pole(x, x0, a) * np.exp(-eps * x)
        j = {m: float(np.dot(weight, np.sin(m * x))) for m in ms}

        def stencil(s):
            d1 = (j[1.0 + s] - j[1.0 - s]) / (2.0 * s)
            d2 = (j[1.0 + s] - 2.0 * j[1.0] + j[1.0 - s]) / (s * s)
            return 2.0 * j[1.0] - 2.0 * d1 + d2

        if richardson:
            return (4.0 * stencil(steps[1]) - stencil(steps[0])) / 3.0
        return stencil(steps[0])

    gap = min(abs(m - a) for m in ms)
    if gap == 0.0:
        raise LightConeError(a, m_step)
    ladder = np.array(settings.epsilon_ladder)
    if settings.scale_to_light_cone:
        ladder = ladder * min(1.0, 2.0 * gap)
    return _abel_ladder(integral_at, ladder, settings, EnergyMethod.OPERATOR_FORM)


# --- finite-difference forces ---------------------------------------------------------


def _fd_stencil(energy, h):
    """-(d/dd) of e/d^3 at d = 1 in units of mu^2/d^4, via displaced reductions."""
    up = energy(1.0 + h) / (1.0 + h) ** 3
    down = energy(1.0 - h) / (1.0 - h) ** 3
    return -(up - down) / (2.0 * h)


def force_fd_reduced(x0, a, h_rel=1e-4, settings=None, richardson=True, window=DEFAULT_LIGHT_CONE_WINDOW):
    """Force phi = F d^4/mu^2 as minus the distance derivative of the quadrature energy."""
    if not 1e-6 <= h_rel <= 1e-2:
        raise DomainError("h_rel must lie in [1e-6, 1e-2]")
    for shift in (1.0 + h_rel, 1.0 - h_rel):
        if abs(a / shift - 1.0) < window:
            raise LightConeError(a / shift, window)

    def energy(shift):
        return energy_quadrature(x0 * shift, a / shift, settings).value

    coarse = _fd_stencil(energy, h_rel)
    if not richardson:
        return coarse
    fine = _fd_stencil(energy, 0.5 * h_rel)
    return (4.0 * fine - coarse) / 3.0


def force_finite_difference(s, t, h_rel=1e-4, settings=None, richardson=True, window=DEFAULT_LIGHT_CONE_WINDOW):
    """Quadrature-based force for a scenario at time t (dimensionless convention)."""
    point = reduce(s, t, window)
    return force_fd_reduced(point.x0, point.a, h_rel, settings, richardson, window)


def static_force_fd(x0, h_rel=1e-4, settings=None):
    """Distance derivative of the principal-value (static) energy."""

    def energy(shift):
        return static_energy_quadrature(x0 * shift, settings).value

    return (4.0 * _fd_stencil(energy, 0.5 * h_rel) - _fd_stencil(energy, h_rel)) / 3.0


# --- discrete mode sum ----------------------------------------------------------------


@dataclass(frozen=True)
class ModeSumSettings:
    """Cubic cavity of side ``box_side`` with the wall at z = 0.

    Modes are k = pi/L (l, m, n) with l, m, n >= 0, weighted by the smooth
    cutoff exp(-(k/K)^4).  The cutoff error of that weight is a power series
    in K^-4 once K is past the slowest oscillation of the integrand, so three
    cutoffs are summed in one pass and extrapolated.  In units of 1/(2d) the
    cutoffs are kappa / min(1, |1 - a|) + 10 x0 for kappa in ``cutoff_ladder``;
    the sum is truncated at ``cutoff_span`` times the largest cutoff unless
    ``max_index`` is given.  Lengths and time are in the scenario's units;
    ``atom_position`` is the (x, y) offset from the cavity axis.
    """

    box_side: float
    time: float
    max_index: int | None = None
    atom_position: tuple = (0.0, 0.0)
    cutoff_ladder: tuple = (20.0, 25.0, 30.0)
    cutoff_span: float = 2.3

    def __post_init__(self):
        if self.max_index is not None and self.max_index < 1:
            raise DomainError("max_index must be >= 1")
        if len(self.cutoff_ladder) < 2 or any(b <= a for a, b in zip(self.cutoff_ladder, self.cutoff_ladder[1:])):
            raise DomainError("cutoff ladder needs at least two increasing entries")
        if self.cutoff_span < 2.0:
            raise DomainError("cutoff_span below 2 leaves the truncation visible")

    def cutoffs(self, x0, a):
        """Cutoff wavenumbers K d for the reduced point (x0, a)."""
        slowest = min(1.0, abs(1.0 - a))
        return np.array([0.5 * (kappa / slowest + 10.0 * x0) for kappa in self.cutoff_ladder])


@dataclass(frozen=True)
class ModeSumResult:
    value: float
    estimated_error: float
    max_index: int
    box_side_over_d: float
    cutoffs: tuple = field(default=())
    raw: tuple = field(default=())
    warnings: tuple = field(default=())

    @property
    def converged(self):
        return not self.warnings


def _set_threads():
    threads = os.environ.get("DYNCP_NUM_THREADS")
    if threads:
        numba.set_num_threads(max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS)))


@numba.njit(cache=True)
def _radial_table(n_max, spacing, k0, t, cutoffs):
    """Row q holds 1/q followed by k (1 - cos Delta t)/Delta exp(-(k/K)^4) per cutoff."""
    q_max = n_max * n_max
    n_cut = cutoffs.size
    table = np.zeros((q_max + 1, n_cut + 1))
    for q in range(1, q_max + 1):
        k = spacing * math.sqrt(q)
        delta = k - k0
        if abs(delta) * t < 1e-4:
            bracket = 0.5 * delta * t * t
        else:
            s = math.sin(0.5 * delta * t)
            bracket = 2.0 * s * s / delta
        table[q, 0] = 1.0 / q
        for c in range(n_cut):
            u = k / cutoffs[c]
            u2 = u * u
            table[q, c + 1] = k * bracket * math.exp(-u2 * u2)
    return table


@numba.njit(parallel=True, cache=True)
def _mode_sum_kernel(n_max, box, x_pos, y_pos, height, table, symmetric):
    spacing = math.pi / box
    cx = np.empty(n_max + 1)
    cy = np.empty(n_max + 1)
    cz = np.empty(n_max + 1)
    w = np.ones(n_max + 1)
    w[0] = 0.5  # a vanishing index halves the mode normalization
    for i in range(n_max + 1):
        k = i * spacing
        cx[i] = math.cos(k * (x_pos + 0.5 * box)) ** 2
        cy[i] = math.cos(k * (y_pos + 0.5 * box)) ** 2
        cz[i] = math.cos(k * height) ** 2
    n_cut = table.shape[1] - 1
    q_max = n_max * n_max
    partial = np.zeros((n_max + 1, n_cut))
    for n in numba.prange(n_max + 1):
        acc = np.zeros(n_cut)
        n2 = n * n
        zc = cz[n]
        zs = 1.0 - zc
        for l in range(n_max + 1):
            ql = n2 + l * l
            if ql > q_max:
                break
            xc = cx[l]
            xs = 1.0 - xc
            l2 = l * l
            wl = w[l] * w[n]
            for m in range(l if symmetric else 0, n_max + 1):
                q = ql + m * m
                if q > q_max:
                    break
                if q == 0:
                    continue
                iq = table[q, 0]
                yc = cy[m]
                ys = 1.0 - yc
                # polarization-summed mode intensity at the atom, minus its bulk value
                wall = 8.0 * (
                    (1.0 - l2 * iq) * xc * ys * zs + (1.0 - m * m * iq) * xs * yc * zs + (1.0 - n2 * iq) * xs * ys * zc
                ) - 2.0
                weight = wl * w[m] * wall
                if symmetric and m != l:
                    weight *= 2.0
                for c in range(n_cut):
                    acc[c] += weight * table[q, c + 1]
        for c in range(n_cut):
            partial[n, c] = acc[c]
    out = np.zeros(n_cut)
    for n in range(n_max + 1):
        for c in range(n_cut):
            out[c] += partial[n, c]
    return out


def _square_sequence(values, length):
    """Sequence carrying values[i] at index i**2 (a lattice axis seen through q = i^2)."""
    seq = np.zeros(length)
    idx = np.arange(values.size) ** 2
    keep = idx < length
    seq[idx[keep]] = values[keep]
    return seq


def _mode_sum_fft(n_max, box, x_pos, y_pos, height, table):
    """Same sum as ``_mode_sum_kernel``, organised by q = l^2 + m^2 + n^2.

    Every summand is a product of one-dimensional factors times a function
    of q, so the lattice sum is a set of triple convolutions of sequences
    supported on the perfect squares, done by FFT in O(n_max^2 log n_max).
    """
    spacing = math.pi / box
    i = np.arange(n_max + 1, dtype=float)
    w = np.ones(n_max + 1)
    w[0] = 0.5
    k = i * spacing
    xc = np.cos(k * (x_pos + 0.5 * box)) ** 2
    yc = np.cos(k * (y_pos + 0.5 * box)) ** 2
    zc = np.cos(k * height) ** 2
    q_len = n_max * n_max + 1
    # a triple convolution reaches 3 n_max^2; shorter transforms would alias onto q <= n_max^2
    size = scipy.fft.next_fast_len(3 * q_len, real=True)

    def spectrum(values):
        return scipy.fft.rfft(_square_sequence(w * values, q_len), size)

    sx, sy, sz = spectrum(1.0 - xc), spectrum(1.0 - yc), spectrum(1.0 - zc)
    total = spectrum(np.ones_like(i)) ** 3
    plain = spectrum(xc) * sy * sz + sx * spectrum(yc) * sz + sx * sy * spectrum(zc)
    lifted = spectrum(i * i * xc) * sy * sz + sx * spectrum(i * i * yc) * sz + sx * sy * spectrum(i * i * zc)
    plain = scipy.fft.irfft(plain, size)[:q_len]
    lifted = scipy.fft.irfft(lifted, size)[:q_len]
    total = scipy.fft.irfft(total, size)[:q_len]
    mode_weight = 8.0 * (plain[1:] - lifted[1:] * table[1:, 0]) - 2.0 * total[1:]
    return mode_weight @ table[1:, 1:]


def mode_sum_reduced(x0, a, box_over_d, settings=None, atom_xy=(0.0, 0.0), method="fft"):
    """Mode-sum energy Delta E d^3/mu^2 in units d = c = 1 (k0 = x0/2, t = 2a).

    ``method`` is "fft" (q-organised convolutions) or "direct" (explicit
    triple loop, parallel over n).  The ``time`` and ``box_side`` fields of
    ``settings`` are ignored here; only the cutoff controls are read.
    """
    settings = settings or ModeSumSettings(box_side=box_over_d, time=2.0 * a)
    x0, a, box = float(x0), float(a), float(box_over_d)
    _check_point(x0, a)
    t = 2.0 * a
    if box <= 2.0:
        raise ValidityError("cavity side must exceed twice the atom-wall distance")
    if t >= box - 1.0:
        raise ValidityError("time reaches (L - d)/c: signals from the far walls arrive at the atom")
    if abs(a - 1.0) < 1e-3:
        raise LightConeError(a, 1e-3)
    cutoffs = settings.cutoffs(x0, a)
    spacing = math.pi / box
    n_max = settings.max_index or int(math.ceil(settings.cutoff_span * cutoffs[-1] / spacing))
    table = _radial_table(n_max, spacing, 0.5 * x0, t, cutoffs)
    x_pos, y_pos = (float(v) for v in atom_xy)
    if method == "fft":
        raw = _mode_sum_fft(n_max, box, x_pos, y_pos, 1.0, table)
    elif method == "direct":
        _set_threads()
        raw = _mode_sum_kernel(n_max, box, x_pos, y_pos, 1.0, table, x_pos == y_pos)
    else:
        raise DomainError(f"unknown mode-sum method {method!r}")
    raw = -2.0 * math.pi / (3.0 * box**3) * raw
    inv4 = cutoffs**-4.0
    value = _neville_at_zero(inv4, raw)
    lower = _neville_at_zero(inv4[1:], raw[1:])
    warnings = []
    if n_max * spacing < 2.0 * cutoffs[-1]:
        warnings.append(f"max_index {n_max} truncates the cutoff weight; need at least {math.ceil(2.0 * cutoffs[-1] / spacing)}")
    if abs(value - lower) > 1e-3 * abs(value):
        warnings.append("cutoff extrapolation has not settled")
    return ModeSumResult(
        value=float(value),
        estimated_error=float(abs(value - lower)),
        max_index=n_max,
        box_side_over_d=box,
        cutoffs=tuple(float(k) for k in cutoffs),
        raw=tuple(float(r) for r in raw),
        warnings=tuple(warnings),
    )


def mode_sum_energy(s, settings):
    """Mode-sum energy for a scenario at ``settings.time``, as Delta E d^3 / mu^2."""
    point = reduce(s, settings.time, 0.0)
    d = s.distance
    xy = tuple(v / d for v in settings.atom_position)
    return mode_sum_reduced(point.x0, point.a, settings.box_side / d, settings, xy)
