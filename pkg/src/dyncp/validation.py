"""Cross-checks of the closed forms against the numerical oracles.

The dynamical force is a sum of named terms.  At every grid point the oracle
force (finite-difference derivative of the regularized-quadrature energy)
minus the closed static force is fitted, per regime, as a linear combination
of the closed-form terms.  The adopted reading of every term should come out
with coefficient 1; a faulty term shows up as the coefficient that is not.
"""
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import force, oracle
from .errors import ConvergenceError, LightConeError
from .scenario import DEFAULT_LIGHT_CONE_WINDOW, Regime, classify

FORCE_TARGET = 1e-4
ENERGY_TARGET = 1e-5
STATIC_TARGET = 1e-6
COEFFICIENT_TARGET = 1e-3
MODE_SUM_TARGET = 1e-2

DEFAULT_X0 = (1.0, 2.0, 5.0)
DEFAULT_A = (0.3, 0.7, 1.5, 3.0)
DEFAULT_BOXES = (20.0, 40.0, 80.0)
MODE_SUM_POINT = (2.0, 0.5)


@dataclass(frozen=True)
class ValidationGrid:
    x0: tuple = DEFAULT_X0
    a: tuple = DEFAULT_A
    boxes: tuple = DEFAULT_BOXES
    window: float = DEFAULT_LIGHT_CONE_WINDOW

    def points(self):
        return [(float(x), float(y)) for y in self.a for x in self.x0]

    def check(self):
        for x0, a in self.points():
            if classify(a, self.window) is Regime.LIGHT_CONE:
                raise LightConeError(a, self.window)
            if x0 <= 0:
                raise ValueError("grid x0 must be positive")


@dataclass
class ValidationReport:
    force_checks: list = field(default_factory=list)
    energy_checks: list = field(default_factory=list)
    static_checks: list = field(default_factory=list)
    term_fits: dict = field(default_factory=dict)
    readings: list = field(default_factory=list)
    mode_sum: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    targets: dict = field(
        default_factory=lambda: {
            "force_relative": FORCE_TARGET,
            "energy_relative": ENERGY_TARGET,
            "static_relative": STATIC_TARGET,
            "term_coefficient": COEFFICIENT_TARGET,
            "mode_sum_relative": MODE_SUM_TARGET,
        }
    )

    @property
    def passed(self):
        return not self.failures and not self.errors

    def to_dict(self):
        doc = asdict(self)
        doc["pass"] = self.passed
        return doc


def _relative(value, reference):
    return abs(value - reference) / abs(reference)


def oracle_forces(points, window=DEFAULT_LIGHT_CONE_WINDOW):
    """Finite-difference quadrature force at each (x0, a)."""
    return {p: oracle.force_fd_reduced(p[0], p[1], window=window) for p in points}


def fit_terms(points, reference, scale=None):
    """Per-regime least-squares coefficients of the closed-form terms.

    ``reference`` maps (x0, a) to the oracle force.  Returns
    {regime: {"coefficients": {term: c}, "residual": max relative misfit}}.
    """
    fits = {}
    for regime in (Regime.BEFORE_ROUND_TRIP, Regime.AFTER_ROUND_TRIP):
        pts = [p for p in points if classify(p[1], 0.0) is regime]
        if not pts:
            continue
        x0 = np.array([p[0] for p in pts])
        a = np.array([p[1] for p in pts])
        target = np.array([reference[p] for p in pts]) - force.static_force(x0)
        terms = force.dynamical_terms(x0, a, scale)
        names = list(terms)
        basis = np.column_stack([terms[n] for n in names])
        # row scaling puts every point on the same relative footing
        weight = 1.0 / np.maximum(np.abs(np.array([reference[p] for p in pts])), 1e-12)
        coef, *_ = np.linalg.lstsq(basis * weight[:, None], target * weight, rcond=None)
        misfit = np.max(np.abs(basis @ coef - target) * weight)
        rank = np.linalg.matrix_rank(basis * weight[:, None])
        fits[regime.value] = {
            "coefficients": dict(zip(names, map(float, coef))),
            "residual": float(misfit),
            "rank": int(rank),
            "points": len(pts),
            # fewer independent points than terms leaves the coefficients undetermined
            "determined": bool(rank == len(names)),
        }
    return fits


def score_readings(points, reference):
    """Max relative force error with each ambiguous term swapped for each of its variants."""
    rows = []
    for term, variants in force.VARIANTS.items():
        regime = Regime.BEFORE_ROUND_TRIP if term.startswith("before.") else Regime.AFTER_ROUND_TRIP
        pts = [p for p in points if classify(p[1], 0.0) is regime]
        if not pts:
            continue
        adopted_fn = force.TERMS[regime][term]

        def worst(replacement):
            err = 0.0
            for x0, a in pts:
                closed = force.total_force(x0, a).phi_total
                closed += replacement(x0, a) - adopted_fn(x0, a)
                err = max(err, _relative(closed, reference[(x0, a)]))
            return err

        scores = {label: {"description": desc, "max_relative_error": worst(fn)} for label, (fn, desc) in variants.items()}
        adopted_err = worst(adopted_fn)
        best = min(scores, key=lambda k: scores[k]["max_relative_error"])
        rows.append(
            {
                "term": term,
                "adopted": force.ADOPTED[term],
                "adopted_max_relative_error": adopted_err,
                "variants": scores,
                "supported": bool(adopted_err < scores[best]["max_relative_error"]),
            }
        )
    return rows


def faulty_terms(fits, tol=COEFFICIENT_TARGET):
    """Term names whose fitted coefficient departs from 1 by more than ``tol``."""
    bad = []
    for fit in fits.values():
        if not fit["determined"]:
            continue
        bad.extend(name for name, c in fit["coefficients"].items() if abs(c - 1.0) > tol)
    return bad


def mode_sum_table(boxes, point=MODE_SUM_POINT, reference=None):
    x0, a = point
    reference = reference if reference is not None else oracle.energy_quadrature(x0, a).value
    rows = []
    for box in boxes:
        start = time.perf_counter()
        result = oracle.mode_sum_reduced(x0, a, box)
        gap = abs(result.value - reference)
        rows.append(
            {
                "box_side_over_d": float(box),
                "x0": x0,
                "a": a,
                "mode_sum": result.value,
                "cutoff_error_estimate": result.estimated_error,
                "quadrature": reference,
                "gap": gap,
                "relative_gap": gap / abs(reference),
                "max_index": result.max_index,
                "seconds": time.perf_counter() - start,
            }
        )
    return rows


def mode_sum_converges(rows, target=MODE_SUM_TARGET):
    gaps = [r["gap"] for r in rows]
    monotone = all(b < a for a, b in zip(gaps, gaps[1:]))
    return monotone and bool(rows) and rows[-1]["relative_gap"] < target


def run_validation(grid=None, scale=None, include_energy=True, include_static=True):
    """Build the full validation report.  ``scale`` corrupts closed-form terms for fault injection."""
    grid = grid or ValidationGrid()
    grid.check()
    report = ValidationReport()
    points = grid.points()
    try:
        reference = oracle_forces(points, grid.window)
    except ConvergenceError as exc:
        report.errors.append(f"force oracle: {exc}")
        return report

    for x0, a in points:
        closed = force.total_force(x0, a, window=grid.window, scale=scale).phi_total
        err = _relative(closed, reference[(x0, a)])
        ok = bool(err <= FORCE_TARGET)
        report.force_checks.append(
            {"x0": x0, "a": a, "closed_form": closed, "oracle": reference[(x0, a)], "relative_error": err, "pass": ok}
        )
        if not ok:
            report.failures.append(f"force mismatch at x0={x0:g}, a={a:g}: {err:.2e}")

    report.term_fits = fit_terms(points, reference, scale)
    for name in faulty_terms(report.term_fits):
        report.failures.append(f"term {name} disagrees with the oracle")
    report.readings = score_readings(points, reference)
    for row in report.readings:
        if not row["supported"]:
            report.failures.append(f"adopted reading of {row['term']} is not the best fit")

    try:
        if include_energy:
            for x0, a in points:
                direct = oracle.energy_quadrature(x0, a)
                operator = oracle.energy_quadrature_operator_form(x0, a)
                diff = _relative(operator.value, direct.value)
                ok = bool(diff <= ENERGY_TARGET)
                report.energy_checks.append(
                    {"x0": x0, "a": a, "direct": direct.value, "operator_form": operator.value, "relative_difference": diff, "pass": ok}
                )
                if not ok:
                    report.failures.append(f"energy forms differ at x0={x0:g}, a={a:g}: {diff:.2e}")
        if include_static:
            for x0 in grid.x0:
                closed = force.static_force(x0)
                numeric = oracle.static_force_fd(x0)
                err = _relative(closed, numeric)
                ok = bool(err <= STATIC_TARGET)
                report.static_checks.append({"x0": x0, "closed_form": closed, "oracle": numeric, "relative_error": err, "pass": ok})
                if not ok:
                    report.failures.append(f"static force mismatch at x0={x0:g}: {err:.2e}")
        if grid.boxes:
            report.mode_sum = mode_sum_table(grid.boxes)
            if not mode_sum_converges(report.mode_sum):
                report.failures.append("mode sum does not converge monotonically to the quadrature energy")
    except ConvergenceError as exc:
        report.errors.append(str(exc))
    return report


def summary_lines(report):
    lines = []
    for fit_name, fit in report.term_fits.items():
        if not fit["determined"]:
            lines.append(f"{fit_name}: {fit['points']} points cannot determine {len(fit['coefficients'])} term coefficients")
            continue
        coefs = ", ".join(f"{k}={v:.6f}" for k, v in fit["coefficients"].items())
        lines.append(f"{fit_name}: {coefs} (misfit {fit['residual']:.1e})")
    for row in report.mode_sum:
        lines.append(f"mode sum L/d={row['box_side_over_d']:g}: relative gap {row['relative_gap']:.2e}")
    lines.extend(f"FAIL {msg}" for msg in report.failures)
    lines.extend(f"ERROR {msg}" for msg in report.errors)
    lines.append("PASS" if report.passed else "FAIL")
    return lines


def finite(x):
    return x is not None and math.isfinite(x)
