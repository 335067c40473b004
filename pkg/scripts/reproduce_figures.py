"""Write the CSV data behind the three figure presets.

Usage: python3 scripts/reproduce_figures.py [OUT_DIR] [--samples N]

Each preset trace becomes ``OUT_DIR/<preset>_<trace>.csv`` (the same files
as ``dyncp presets run``).  A short summary of each trace is printed:
sign changes before the round trip, the largest |phi| outside the light-cone
window and, after the round trip, the final distance from the static value.
"""
import argparse
import csv
from pathlib import Path

import numpy as np

from dyncp import cli


def summarize(path):
    rows = list(csv.DictReader(line for line in path.read_text().splitlines() if not line.startswith("#")))
    total = np.array([float(r["phi_total"]) if r["phi_total"] else np.nan for r in rows])
    static = np.array([float(r["phi_static"]) for r in rows])
    before = np.array([r["regime"] == "BeforeRoundTrip" for r in rows])
    after = np.array([r["regime"] == "AfterRoundTrip" for r in rows])
    changes = int(np.count_nonzero(np.diff(np.sign(total[before][1:])))) if before.sum() > 2 else 0
    parts = [f"{path.name}: {len(rows)} rows", f"{changes} sign changes before the round trip"]
    parts.append(f"max |phi| {np.nanmax(np.abs(total)):.3e}")
    if after.any():
        parts.append(f"final |phi - phi_static| {abs(total[after][-1] - static[after][-1]):.3e}")
    return ", ".join(parts)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("out_dir", nargs="?", default="figures")
    parser.add_argument("--samples", type=int, help="override the preset sample counts")
    args = parser.parse_args(argv)
    out = Path(args.out_dir)
    for name in cli.PRESET_NAMES:
        for path in cli.run_preset(name, out, args.samples):
            print(summarize(path))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
