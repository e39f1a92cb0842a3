import math

import numpy as np
import pytest

from starcert.experiments import (
    CSV_HEADER,
    SweepRow,
    ThresholdReport,
    bisect_compatibility_threshold,
    eta_grid,
    format_row,
    gnuplot_script,
    read_sweep_csv,
    run_eta_sweep,
    write_sweep_csv,
)
from starcert.objects import pauli_pmd
from starcert.sdp import SolverError
from starcert.seesaw import SeesawConfig


def make_row(**overrides) -> SweepRow:
    base = dict(
        eta=0.8,
        p_guess=0.9,
        two_times_one_minus_p=0.2,
        weight=0.3171,
        bound_eq9=0.2,
        restarts_used=10,
        iterations_total=55,
        converged=False,
    )
    base.update(overrides)
    return SweepRow(**base)


def test_eta_grid_examples():
    default = eta_grid(0.65, 1.0, 0.01)
    assert len(default) == 36
    assert default[0] == 0.65
    assert default[-1] == 1.0
    assert default[2] == 0.67
    assert eta_grid(0.0, 0.0, 0.01) == [0.0]
    assert eta_grid(0.0, 1.0, 0.25) == [0.0, 0.25, 0.5, 0.75, 1.0]


def test_eta_grid_validation():
    with pytest.raises(ValueError):
        eta_grid(0.5, 0.4, 0.01)
    with pytest.raises(ValueError):
        eta_grid(0.0, 1.1, 0.01)
    with pytest.raises(ValueError):
        eta_grid(0.0, 1.0, 0.0)


def test_row_formatting_pins_twelve_significant_digits():
    row = make_row(eta=1 / 3, p_guess=0.123456789012345)
    line = format_row(row)
    assert line.startswith("0.333333333333,0.123456789012,")
    assert line.endswith(",10,55,false")


def test_written_csv_is_checked(tmp_path):
    bad = make_row(two_times_one_minus_p=0.3)
    with pytest.raises(SolverError, match="randomness column"):
        write_sweep_csv([bad], tmp_path / "bad.csv")
    low = make_row(weight=0.1)
    with pytest.raises(SolverError, match="floor"):
        write_sweep_csv([low], tmp_path / "low.csv")


def test_csv_round_trip_and_bytes(tmp_path):
    nan = float("nan")
    rows = [
        make_row(converged=True),
        SweepRow(0.9, nan, nan, nan, nan, 0, 0, False),
    ]
    path = tmp_path / "sweep.csv"
    write_sweep_csv(rows, path)

    raw = path.read_bytes()
    assert b"\r" not in raw
    assert raw.split(b"\n")[0] == CSV_HEADER.encode()
    assert raw.endswith(b"\n")
    text = raw.decode()
    assert "True" not in text and "False" not in text

    back = read_sweep_csv(path)
    assert len(back) == 2
    assert back[0] == rows[0]
    assert back[1].eta == 0.9
    assert math.isnan(back[1].p_guess)
    assert back[1].converged is False


def test_read_rejects_foreign_files(tmp_path):
    path = tmp_path / "odd.csv"
    path.write_text("eta,p\n0.5,1\n")
    with pytest.raises(ValueError, match="header"):
        read_sweep_csv(path)
    path.write_text(CSV_HEADER + "\n0.5,1\n")
    with pytest.raises(ValueError, match="bad row"):
        read_sweep_csv(path)


def test_gnuplot_script_references_columns(tmp_path):
    script = gnuplot_script("out/sweep.csv")
    assert "out/sweep.csv" in script
    for clause in ("using 1:4", "using 1:3", "using 1:5", "skip 1"):
        assert clause in script
    assert "pngcairo" not in script
    with_png = gnuplot_script("s.csv", png_path="s.png")
    assert "set output 's.png'" in with_png


class _AlwaysFails:
    def solve(self, prog):
        raise SolverError("backend down")


def test_sweep_records_failures_and_continues():
    rows = run_eta_sweep(
        eta_start=0.66,
        eta_end=0.68,
        eta_step=0.01,
        config=SeesawConfig(restarts=1, t_max=2),
        solver=_AlwaysFails(),
    )
    assert [r.eta for r in rows] == [0.66, 0.67, 0.68]
    for row in rows:
        assert math.isnan(row.p_guess) and math.isnan(row.weight)
        assert row.converged is False
        assert row.restarts_used == 0


def test_parallel_sweep_is_deterministic():
    kwargs = dict(
        eta_start=0.66,
        eta_end=0.67,
        eta_step=0.01,
        config=SeesawConfig(restarts=2, t_max=8),
        parallel=True,
    )
    first = run_eta_sweep(**kwargs)
    second = run_eta_sweep(**kwargs)
    assert [format_row(r) for r in first] == [format_row(r) for r in second]
    for row in first:
        assert abs(row.p_guess - 1.0) < 1e-6
        assert row.weight <= 1e-6


def test_serial_sweep_reports_progress():
    seen = []
    rows = run_eta_sweep(
        eta_start=0.66,
        eta_end=0.67,
        eta_step=0.01,
        config=SeesawConfig(restarts=2, t_max=8),
        progress=seen.append,
    )
    assert seen == rows


def test_threshold_lands_next_to_the_known_crossing():
    report = bisect_compatibility_threshold(x_star=0, tol=1e-4)
    assert isinstance(report, ThresholdReport)
    assert abs(report.threshold - 1.0 / np.sqrt(2.0)) <= 5e-4
    assert report.bracket_hi - report.bracket_lo <= 1e-4
    assert report.compatible_lo is True
    assert report.compatible_hi is False
    assert report.evaluations == 16


def test_threshold_needs_a_sign_change():
    with pytest.raises(ValueError, match="no sign change"):
        bisect_compatibility_threshold(family=lambda eta: pauli_pmd(0.0))


def test_threshold_parameter_validation():
    with pytest.raises(ValueError):
        bisect_compatibility_threshold(tol=0.0)
    with pytest.raises(ValueError):
        bisect_compatibility_threshold(lo=0.9, hi=0.5)
