#!/usr/bin/env python3
"""Visibility sweep of the noisy pauli family, with CSV and gnuplot output.

Reproduces the package's headline experiment: for each eta on the grid, the
see-saw search finds the eavesdropper's best guessing probability p on the
first setting, and the weight program prices the device's incompatibility.
Below eta = 1/sqrt(2) both the certified randomness 2(1-p) and the weight
vanish; above it they grow together, with the weight never dropping below
the randomness-implied floor.

Writes <out>.csv and <out>.csv.gnuplot; render with

    gnuplot <out>.csv.gnuplot
"""

import argparse
import math
import sys
import time

from starcert.experiments import (
    format_row,
    gnuplot_script,
    run_eta_sweep,
    write_sweep_csv,
    CSV_HEADER,
)
from starcert.seesaw import SeesawConfig


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="pauli_sweep.csv", help="CSV output path")
    ap.add_argument("--eta-start", type=float, default=0.65)
    ap.add_argument("--eta-end", type=float, default=1.0)
    ap.add_argument("--eta-step", type=float, default=0.01)
    ap.add_argument("--target", type=int, default=1, help="1-based pauli setting (1=x, 2=y, 3=z)")
    ap.add_argument("--restarts", type=int, default=10)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--parallel", action="store_true", help="thread pool over grid points (no warm starts)")
    ap.add_argument("--png", default=None, help="also point the gnuplot script at this PNG")
    args = ap.parse_args(argv)

    if not 1 <= args.target <= 3:
        ap.error("target must be 1, 2 or 3")

    started = time.perf_counter()
    print(CSV_HEADER)
    rows = run_eta_sweep(
        x_star=args.target - 1,
        eta_start=args.eta_start,
        eta_end=args.eta_end,
        eta_step=args.eta_step,
        config=SeesawConfig(restarts=args.restarts, seed=args.seed),
        parallel=args.parallel,
        progress=None if args.parallel else lambda row: print(format_row(row)),
    )
    if args.parallel:
        for row in rows:
            print(format_row(row))
    write_sweep_csv(rows, args.out)
    script_path = args.out + ".gnuplot"
    with open(script_path, "w", encoding="utf-8") as fh:
        fh.write(gnuplot_script(args.out, png_path=args.png))

    failed = sum(1 for r in rows if math.isnan(r.p_guess))
    elapsed = time.perf_counter() - started
    print(
        f"# {len(rows)} rows ({failed} failed) in {elapsed:.1f}s -> {args.out}, {script_path}",
        file=sys.stderr,
    )
    return 0 if failed == 0 else 1


if __name__ == "__main__":
    raise SystemExit(main())
