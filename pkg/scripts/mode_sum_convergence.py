"""Convergence of the cavity mode sum to the regularized quadrature energy.

Usage: python3 scripts/mode_sum_convergence.py [--x0 2] [--a 0.5] [--boxes 20,40,80] [--json PATH]

Prints one row per cavity side L/d: mode-sum energy, cutoff-extrapolation
error estimate, gap to the quadrature value and run time.  Set
DYNCP_NUM_THREADS to bound the threads used by the direct method.
"""
import argparse
import json

from dyncp import oracle, validation


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("--x0", type=float, default=2.0)
    parser.add_argument("--a", type=float, default=0.5)
    parser.add_argument("--boxes", default="20,40,80")
    parser.add_argument("--json", help="also write the table as JSON")
    args = parser.parse_args(argv)
    boxes = [float(b) for b in args.boxes.split(",")]
    reference = oracle.energy_quadrature(args.x0, args.a)
    print(f"quadrature energy at x0={args.x0:g}, a={args.a:g}: {reference.value:.14f} (+- {reference.estimated_error:.1e})")
    rows = validation.mode_sum_table(boxes, (args.x0, args.a), reference.value)
    print(f"{'L/d':>6} {'mode sum':>18} {'cutoff err':>10} {'rel gap':>9} {'n_max':>6} {'time/s':>7}")
    for r in rows:
        print(
            f"{r['box_side_over_d']:6g} {r['mode_sum']:18.14f} {r['cutoff_error_estimate']:10.1e} "
            f"{r['relative_gap']:9.2e} {r['max_index']:6d} {r['seconds']:7.1f}"
        )
    converged = validation.mode_sum_converges(rows)
    print("monotone and within 1%:", converged)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)
    return 0 if converged else 1


if __name__ == "__main__":
    raise SystemExit(main())
