"""Noise sweeps and threshold searches over one-parameter device families.

The sweep walks a visibility grid, runs the alternating minimization for the
guessing probability at each point, prices the incompatibility weight, and
records both next to the weight's analytic floor. Rows go to CSV so plots and
regression checks can consume them without touching this package.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .certify import star_incompatibility_weight, weight_lower_bound, is_star_compatible
from .objects import Pmd, pauli_pmd
from .sdp import SolverError
from .seesaw import SeesawConfig, seesaw_minimize

FAMILIES: dict[str, Callable[[float], Pmd]] = {"pauli": pauli_pmd}

CSV_HEADER = (
    "eta,p_guess,two_times_one_minus_p,weight,bound_eq9,"
    "restarts_used,iterations_total,converged"
)

# Row-level consistency: the randomness column must be an exact function of
# p_guess, and the computed weight may undershoot its floor only by solver
# noise.
TWO_MINUS_TOL = 1e-12
BOUND_SLACK_TOL = 1e-6


@dataclass(frozen=True)
class SweepRow:
    eta: float
    p_guess: float
    two_times_one_minus_p: float
    weight: float
    bound_eq9: float
    restarts_used: int
    iterations_total: int
    converged: bool


def _check_row(row: SweepRow) -> SweepRow:
    if math.isnan(row.p_guess):
        return row
    dev = abs(row.two_times_one_minus_p - 2.0 * (1.0 - row.p_guess))
    if dev > TWO_MINUS_TOL:
        raise SolverError(
            f"eta={row.eta:g}: randomness column off by {dev:.3e} from 2(1-p)"
        )
    if row.weight < row.bound_eq9 - BOUND_SLACK_TOL:
        raise SolverError(
            f"eta={row.eta:g}: weight {row.weight:.12g} fell below its floor "
            f"{row.bound_eq9:.12g} by more than {BOUND_SLACK_TOL:g}"
        )
    return row


def eta_grid(start: float, end: float, step: float) -> list[float]:
    """Inclusive float grid; endpoints land exactly when (end-start)/step does."""
    if not (0.0 <= start <= end <= 1.0):
        raise ValueError(f"grid must sit inside [0, 1], got [{start}, {end}]")
    if step <= 0.0:
        raise ValueError(f"step must be positive, got {step}")
    count = int(math.floor((end - start) / step + 1e-9)) + 1
    return [round(start + k * step, 12) for k in range(count)]


def _sweep_point(family, x_star, eta, config, solver) -> tuple[SweepRow, np.ndarray | None]:
    pmd = family(eta)
    try:
        result = seesaw_minimize(pmd, x_star, config, solver)
        weight, _, _ = star_incompatibility_weight(pmd, x_star, solver)
        p = result.best_p
        row = SweepRow(
            eta=eta,
            p_guess=p,
            two_times_one_minus_p=2.0 * (1.0 - p),
            weight=weight,
            bound_eq9=weight_lower_bound(p, pmd.outcomes),
            restarts_used=config.restarts - result.failed_restarts,
            iterations_total=result.total_iterations,
            converged=result.converged,
        )
        return _check_row(row), result.best_state
    except SolverError:
        nan = float("nan")
        row = SweepRow(eta, nan, nan, nan, nan, 0, 0, False)
        return row, None


def run_eta_sweep(
    x_star: int = 0,
    eta_start: float = 0.65,
    eta_end: float = 1.0,
    eta_step: float = 0.01,
    family: Callable[[float], Pmd] = pauli_pmd,
    config: SeesawConfig | None = None,
    solver=None,
    parallel: bool = False,
    progress: Callable[[SweepRow], None] | None = None,
) -> list[SweepRow]:
    """Sweep the family over the grid and return one row per point.

    Serial runs chain warm starts: each point's best state seeds the next
    point's first restart. A failed point yields a NaN row with
    converged=false and the sweep continues.
    """
    base = config if config is not None else SeesawConfig()
    grid = eta_grid(eta_start, eta_end, eta_step)
    if parallel:
        # No state is threaded from point to point here, so seeds fully
        # determine each row and the rows stay byte-identical to a serial
        # no-chaining run.
        configs = [
            replace(base, seed=base.seed + k, warm_start=None)
            for k in range(len(grid))
        ]
        with ThreadPoolExecutor() as pool:
            results = list(
                pool.map(
                    lambda pair: _sweep_point(family, x_star, pair[0], pair[1], solver),
                    zip(grid, configs),
                )
            )
        rows = [row for row, _ in results]
        if progress is not None:
            for row in rows:
                progress(row)
        return rows
    rows = []
    prev_best: np.ndarray | None = None
    for k, eta in enumerate(grid):
        cfg = replace(base, seed=base.seed + k, warm_start=prev_best)
        row, best_state = _sweep_point(family, x_star, eta, cfg, solver)
        rows.append(row)
        if best_state is not None:
            prev_best = best_state
        if progress is not None:
            progress(row)
    return rows


def _fmt(value: float) -> str:
    return f"{value:.12g}"


def format_row(row: SweepRow) -> str:
    return ",".join(
        [
            _fmt(row.eta),
            _fmt(row.p_guess),
            _fmt(row.two_times_one_minus_p),
            _fmt(row.weight),
            _fmt(row.bound_eq9),
            str(row.restarts_used),
            str(row.iterations_total),
            "true" if row.converged else "false",
        ]
    )


def write_sweep_csv(rows: Sequence[SweepRow], path) -> None:
    for row in rows:
        _check_row(row)
    # newline="" plus explicit "\n" pins LF endings on every platform
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(format_row(row) + "\n")


def read_sweep_csv(path) -> list[SweepRow]:
    with open(path, encoding="utf-8", newline="") as fh:
        lines = fh.read().split("\n")
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path}: unexpected header {lines[0]!r}")
    rows = []
    for line in lines[1:]:
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 8:
            raise ValueError(f"{path}: bad row {line!r}")
        rows.append(
            SweepRow(
                eta=float(parts[0]),
                p_guess=float(parts[1]),
                two_times_one_minus_p=float(parts[2]),
                weight=float(parts[3]),
                bound_eq9=float(parts[4]),
                restarts_used=int(parts[5]),
                iterations_total=int(parts[6]),
                converged={"true": True, "false": False}[parts[7]],
            )
        )
    return rows


def gnuplot_script(csv_path: str, png_path: str | None = None) -> str:
    """Companion gnuplot script for a sweep CSV (weight, randomness, floor)."""
    lines = [
        "set datafile separator ','",
        "set key top left",
        "set xlabel 'eta'",
        "set grid",
    ]
    if png_path is not None:
        lines += [
            "set terminal pngcairo size 900,600",
            f"set output '{png_path}'",
        ]
    lines.append(
        f"plot '{csv_path}' skip 1 using 1:4 with linespoints title 'weight', \\\n"
        f"     '' skip 1 using 1:3 with linespoints title '2(1-p)', \\\n"
        f"     '' skip 1 using 1:5 with lines dashtype 2 title 'weight floor'"
    )
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ThresholdReport:
    threshold: float
    bracket_lo: float
    bracket_hi: float
    compatible_lo: bool
    compatible_hi: bool
    evaluations: int


def bisect_compatibility_threshold(
    x_star: int = 0,
    tol: float = 1e-3,
    lo: float = 0.0,
    hi: float = 1.0,
    family: Callable[[float], Pmd] = pauli_pmd,
    solver=None,
) -> ThresholdReport:
    """Locate the visibility where the family's compatibility verdict flips.

    The endpoint verdicts must differ; if they agree the family has no
    crossing inside [lo, hi] (or is non-monotone there) and that is an error,
    not a threshold.
    """
    if not (0.0 <= lo < hi <= 1.0):
        raise ValueError(f"need 0 <= lo < hi <= 1, got [{lo}, {hi}]")
    if tol <= 0.0:
        raise ValueError(f"tol must be positive, got {tol}")

    def verdict(eta: float) -> bool:
        ok, _ = is_star_compatible(family(eta), x_star, solver)
        return ok

    v_lo = verdict(lo)
    v_hi = verdict(hi)
    evaluations = 2
    if v_lo == v_hi:
        raise ValueError(
            f"no sign change on [{lo:g}, {hi:g}]: compatible={v_lo} at both "
            f"endpoints, so bisection has nothing to find"
        )
    a, b = lo, hi
    while b - a > tol:
        mid = 0.5 * (a + b)
        evaluations += 1
        if verdict(mid) == v_lo:
            a = mid
        else:
            b = mid
    return ThresholdReport(
        threshold=0.5 * (a + b),
        bracket_lo=a,
        bracket_hi=b,
        compatible_lo=v_lo,
        compatible_hi=v_hi,
        evaluations=evaluations,
    )
