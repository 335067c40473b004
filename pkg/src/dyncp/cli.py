"""Command-line front end: time scans, distance scans, oracle checks and presets.

CSV files open with a block of ``# `` lines (version, scenario JSON, scan
parameters, warnings), then a header row and one row per sample.  Floats are
written with 17 significant digits so identical inputs give identical files.
Rows inside the light-cone exclusion window carry regime ``LightCone`` and
empty force fields.

Exit codes: 0 success, 1 invalid input, 2 numerical failure or failed check.
"""
import argparse
import csv
import io
import json
import math
import subprocess
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, force, validation
from .errors import ConvergenceError, DomainError, LightConeError, ValidityError
from .scenario import (
    DEFAULT_LIGHT_CONE_WINDOW,
    VALIDITY_CEILING_SECONDS,
    Regime,
    UnitSystem,
    classify,
    force_scale,
    light_cone_window,
    roundtrip_time,
    scenario_from_dict,
    scenario_to_dict,
)

EXIT_OK, EXIT_USER, EXIT_NUMERIC = 0, 1, 2
TIME_COLUMNS = ("t", "x0", "a", "regime", "phi_static", "phi_dyn", "phi_total", "force_physical")
DISTANCE_COLUMNS = ("d", "x0", "a", "regime", "phi_static", "phi_dyn", "phi_total", "force_physical")
PRESET_NAMES = ("fig1", "fig2", "fig3-excited")


class UsageError(Exception):
    """Invalid command-line input; maps to exit code 1."""


@dataclass(frozen=True)
class Exclusion:
    """Light-cone half-width, either dimensionless (in a) or in seconds."""

    value: float
    seconds: bool = False

    @classmethod
    def parse(cls, text):
        text = text.strip()
        seconds = text.endswith("s")
        try:
            value = float(text[:-1] if seconds else text)
        except ValueError:
            raise UsageError(f"cannot parse exclusion window {text!r}") from None
        if not (math.isfinite(value) and value > 0):
            raise UsageError("exclusion window must be positive")
        return cls(value, seconds)

    def window(self, s):
        if self.seconds:
            if s.unit_system is UnitSystem.NATURAL:
                raise UsageError("an exclusion window in seconds needs a physical unit system")
            return self.value / roundtrip_time(s)
        return self.value


@dataclass(frozen=True)
class ScanSpec:
    variable: str
    min: float
    max: float
    samples: int
    exclusion: Exclusion | None = None
    output_path: str = "-"

    def __post_init__(self):
        if self.variable not in ("time", "distance"):
            raise UsageError(f"unknown scan variable {self.variable!r}")
        if not (math.isfinite(self.min) and math.isfinite(self.max) and self.min < self.max):
            raise UsageError("scan bounds need min < max")
        if self.samples < 2:
            raise UsageError("a scan needs at least two samples")
        if self.variable == "time" and self.min < 0:
            raise UsageError("times must be non-negative")
        if self.variable == "distance" and self.min <= 0:
            raise UsageError("distances must be positive")

    def grid(self):
        return np.linspace(self.min, self.max, self.samples)

    def window(self, s):
        if self.exclusion is None:
            return light_cone_window(s)
        return self.exclusion.window(s)


# --- formatting ----------------------------------------------------------------------


def software_version():
    try:
        out = subprocess.run(
            ["git", "describe", "--tags", "--always"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
            check=True,
        )
        described = out.stdout.strip()
        if described:
            return f"{__version__}+{described}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def fmt(value):
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def header_block(s, spec, warnings, extra=None, notes=()):
    lines = [f"dyncp {software_version()}", "scenario: " + json.dumps(scenario_to_dict(s), sort_keys=True)]
    scan = {"variable": spec.variable, "min": spec.min, "max": spec.max, "samples": spec.samples, "window": spec.window(s)}
    scan.update(extra or {})
    lines.append("scan: " + json.dumps(scan, sort_keys=True))
    lines.extend(f"warning: {w}" for w in warnings)
    lines.extend(f"note: {n}" for n in notes)
    return "".join(f"# {line}\n" for line in lines)


def write_csv(columns, rows, head, tail=""):
    buf = io.StringIO()
    buf.write(head)
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    buf.write(tail)
    return buf.getvalue()


def emit(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from None


# --- scans -----------------------------------------------------------------------------


def _validity_warnings(s, t_max):
    if s.unit_system is UnitSystem.SI and t_max > VALIDITY_CEILING_SECONDS:
        return [
            f"times up to {t_max:g} s exceed {VALIDITY_CEILING_SECONDS:g} s; the perturbative result "
            "holds only for times much shorter than the decay time of the excited state"
        ]
    return []


def _rows(first_column, x0, a, window, scale):
    phi_static, phi_dyn, phi_total = force.force_table(x0, a, window)
    for i, value in enumerate(first_column):
        regime = classify(float(a[i]), window)
        if regime is Regime.LIGHT_CONE:
            yield (value, x0[i], a[i], regime.value, phi_static[i], None, None, None)
        else:
            yield (value, x0[i], a[i], regime.value, phi_static[i], phi_dyn[i], phi_total[i], phi_total[i] * scale[i])


def _light_cone_note(rows):
    flagged = sum(r[3] == Regime.LIGHT_CONE.value for r in rows)
    return [f"{flagged} rows inside the light-cone exclusion window"] if flagged else []


def run_time_scan(s, spec):
    """CSV text for a time scan of one scenario."""
    times = spec.grid()
    window = spec.window(s)
    x0 = np.full(times.shape, 2.0 * s.transition_wavenumber * s.distance)
    a = s.speed_of_light * times / (2.0 * s.distance)
    scale = np.full(times.shape, force_scale(s).value)
    rows = list(_rows(times, x0, a, window, scale))
    warnings = _validity_warnings(s, spec.max)
    extra = {"roundtrip_time": roundtrip_time(s)}
    return write_csv(TIME_COLUMNS, rows, header_block(s, spec, warnings, extra, _light_cone_note(rows)))


def run_distance_scan(s, spec, t_fixed):
    """CSV text for a distance scan at fixed time, with the static-force zeros in range."""
    if not (math.isfinite(t_fixed) and t_fixed >= 0):
        raise UsageError("--t-fixed must be a non-negative time")
    distances = spec.grid()
    x0 = 2.0 * s.transition_wavenumber * distances
    a = s.speed_of_light * t_fixed / (2.0 * distances)
    scale = np.array([force_scale(s.with_distance(float(d))).value for d in distances])
    window = spec.window(s)
    rows = list(_rows(distances, x0, a, window, scale))
    warnings = _validity_warnings(s, t_fixed)
    roots = force.static_force_zeros(float(x0[0]), float(x0[-1]))
    tail = "# roots: zeros of the static force in range\n# d,x0\n"
    tail += "".join(f"# {fmt(r / (2.0 * s.transition_wavenumber))},{fmt(r)}\n" for r in roots)
    head = header_block(s, spec, warnings, {"t_fixed": t_fixed}, _light_cone_note(rows))
    return write_csv(DISTANCE_COLUMNS, rows, head, tail)


# --- presets -----------------------------------------------------------------------


def load_preset(name):
    if name not in PRESET_NAMES:
        raise UsageError(f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}")
    text = resources.files("dyncp").joinpath("presets", f"{name}.json").read_text()
    return json.loads(text)


def run_preset(name, out_dir, samples=None):
    doc = load_preset(name)
    scan = doc["scan"]
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for label, scenario_doc in doc["traces"].items():
        s = scenario_from_dict(scenario_doc)
        spec = ScanSpec(scan["variable"], scan["min"], scan["max"], samples or scan["samples"])
        path = out_dir / f"{name}_{label}.csv"
        emit(run_time_scan(s, spec), path)
        written.append(path)
    return written


# --- argument handling -------------------------------------------------------------


def _load_scenario(path, units):
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read scenario {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"invalid scenario JSON in {path}: {exc}") from None
    try:
        s = scenario_from_dict(doc)
    except KeyError as exc:
        raise UsageError(f"scenario is missing key {exc}") from None
    return s.to_units(units) if units else s


def _float_list(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _corruption(items):
    scale = {}
    for item in items or ():
        name, _, factor = item.partition("=")
        if not any(name in terms for terms in force.TERMS.values()):
            raise UsageError(f"unknown term {name!r}")
        scale[name] = float(factor or 2.0)
    return scale or None


def build_parser():
    parser = argparse.ArgumentParser(prog="dyncp", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", required=True, help="scenario JSON file")
        p.add_argument("--out", default="-", help="output path, '-' for stdout")
        p.add_argument("--samples", type=int, default=401)
        p.add_argument("--exclusion", type=Exclusion.parse, help="light-cone half-width: dimensionless, or seconds with an 's' suffix")
        p.add_argument("--units", choices=[u.value for u in UnitSystem if u is not UnitSystem.NATURAL], help="convert the scenario first")
        p.add_argument("--min", type=float, required=True, dest="lo")
        p.add_argument("--max", type=float, required=True, dest="hi")

    p = sub.add_parser("time-scan", help="force versus time at fixed distance")
    common(p)
    p = sub.add_parser("distance-scan", help="force versus distance at fixed time")
    common(p)
    p.add_argument("--t-fixed", type=float, required=True)

    p = sub.add_parser("oracle-check", help="compare the closed forms with the numerical oracles")
    p.add_argument("--x0", type=_float_list, default=validation.DEFAULT_X0)
    p.add_argument("--a", type=_float_list, default=validation.DEFAULT_A)
    p.add_argument("--boxes", type=_float_list, default=validation.DEFAULT_BOXES, help="cavity sides L/d for the mode-sum table")
    p.add_argument("--window", type=float, default=DEFAULT_LIGHT_CONE_WINDOW)
    p.add_argument("--out", default="-")
    p.add_argument("--corrupt-term", action="append", help=argparse.SUPPRESS)

    p = sub.add_parser("presets", help="bundled figure recipes")
    psub = p.add_subparsers(dest="action", required=True)
    psub.add_parser("list")
    show = psub.add_parser("show")
    show.add_argument("name")
    run = psub.add_parser("run")
    run.add_argument("name")
    run.add_argument("--out-dir", default=".")
    run.add_argument("--samples", type=int)
    return parser


def _dispatch(args):
    if args.command in ("time-scan", "distance-scan"):
        s = _load_scenario(args.scenario, args.units)
        variable = "time" if args.command == "time-scan" else "distance"
        spec = ScanSpec(variable, args.lo, args.hi, args.samples, args.exclusion, args.out)
        text = run_time_scan(s, spec) if variable == "time" else run_distance_scan(s, spec, args.t_fixed)
        emit(text, args.out)
        return EXIT_OK

    if args.command == "oracle-check":
        grid = validation.ValidationGrid(x0=args.x0, a=args.a, boxes=args.boxes, window=args.window)
        report = validation.run_validation(grid, scale=_corruption(args.corrupt_term))
        emit(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", args.out)
        for line in validation.summary_lines(report):
            print(line, file=sys.stderr)
        return EXIT_OK if report.passed else EXIT_NUMERIC

    if args.action == "list":
        for name in PRESET_NAMES:
            print(f"{name}: {load_preset(name)['description']}")
    elif args.action == "show":
        print(json.dumps(load_preset(args.name), indent=2, ensure_ascii=False))
    else:
        for path in run_preset(args.name, args.out_dir, args.samples):
            print(path)
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USER if exc.code else EXIT_OK
    try:
        return _dispatch(args)
    except (UsageError, DomainError, ValidityError, LightConeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    except ConvergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
