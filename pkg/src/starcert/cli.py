"""Command-line front end.

Every command prints a single JSON object on standard output, including
failures. Exit codes are exhaustive: 0 success, 2 input error, 3 solver
error.

Setting targets come in two flavors. Commands that read instance files take
--target as a 0-based index into the file's settings array. Commands that
build a named family (sweep, threshold) take --target as the family's 1-based
setting label, defaulting to 1; label k maps to index k-1.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .certify import (
    IncompatibilityRay,
    guessing_dual_margin,
    guessing_probability_assemblage,
    guessing_probability_pmd,
    is_star_compatible,
    star_incompatibility_weight,
)
from .experiments import (
    FAMILIES,
    bisect_compatibility_threshold,
    gnuplot_script,
    run_eta_sweep,
    write_sweep_csv,
)
from .instances import (
    KIND_OF,
    InstanceError,
    SharedState,
    instance_to_json,
    load_instance,
    witness_to_json,
)
from .objects import Assemblage, Pmd
from .sdp import ClarabelSolver, SolverError
from .seesaw import SeesawConfig, seesaw_minimize

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SOLVER = 3

SOLVER_TOL_ENV = "CERT_SOLVER_TOL"


def _emit(doc: dict) -> None:
    print(json.dumps(doc, indent=1))


def _write_json(path, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def _configured_solver(args):
    """Explicit --solver-tol wins, then the environment override, then None.

    None lets each operation keep its own backend default, which matters for
    the alternating minimization: its inner solves run tighter than the
    1e-8 certification default unless the user pins a tolerance here.
    """
    tol = args.solver_tol
    if tol is None:
        raw = os.environ.get(SOLVER_TOL_ENV)
        if raw is not None:
            try:
                tol = float(raw)
            except ValueError:
                raise InstanceError(f"{SOLVER_TOL_ENV} is not a number: {raw!r}")
    if tol is None:
        return None
    return ClarabelSolver(tol=tol)


def _load_as(path, cls, what: str):
    obj = load_instance(path)
    if not isinstance(obj, cls):
        found = KIND_OF.get(type(obj).__name__, type(obj).__name__)
        raise InstanceError(f"{path}: expected kind '{what}', file holds '{found}'")
    return obj


def _file_target(settings: int, target: int) -> int:
    if not 0 <= target < settings:
        raise InstanceError(
            f"--target {target} out of range; file has settings 0..{settings - 1}"
        )
    return target


def _family_fn(name: str):
    try:
        return FAMILIES[name]
    except KeyError:
        raise InstanceError(f"unknown family {name!r}; choices: {sorted(FAMILIES)}")


def _family_target(family_fn, label: int) -> int:
    settings = family_fn(0.5).settings
    if not 1 <= label <= settings:
        raise InstanceError(
            f"--target {label} invalid; family setting labels are 1-based "
            f"(1..{settings}), label k selects index k-1"
        )
    return label - 1


def _seesaw_config(args) -> SeesawConfig:
    return SeesawConfig(
        eps_p=args.eps_p,
        eps_rho=args.eps_rho,
        t_max=args.t_max,
        k_stall=args.k_stall,
        restarts=args.restarts,
        seed=args.seed,
    )


def cmd_guess(args) -> int:
    asm = _load_as(args.assemblage_file, Assemblage, "assemblage")
    x_star = _file_target(asm.settings, args.target)
    solver = _configured_solver(args)
    p, _, cert = guessing_probability_assemblage(asm, x_star, solver)
    margin = guessing_dual_margin(cert, np.eye(asm.dim_b))
    _emit(
        {
            "p": p,
            "gap": abs(cert.objective - p),
            "x_star": x_star,
            "certificate": {
                "objective": cert.objective,
                "feasibility_margin": margin,
            },
        }
    )
    return EXIT_OK


def cmd_guess_pmd(args) -> int:
    pmd = _load_as(args.pmd_file, Pmd, "pmd")
    state = _load_as(args.state_file, SharedState, "state")
    x_star = _file_target(pmd.settings, args.target)
    solver = _configured_solver(args)
    p, _ = guessing_probability_pmd(pmd, state.reduced_a(), x_star, solver)
    _emit(
        {
            "p": p,
            "x_star": x_star,
            "dim": pmd.dim,
            "settings": pmd.settings,
            "outcomes": pmd.outcomes,
        }
    )
    return EXIT_OK


def cmd_star_compat(args) -> int:
    pmd = _load_as(args.pmd_file, Pmd, "pmd")
    x_star = _file_target(pmd.settings, args.target)
    solver = _configured_solver(args)
    compatible, artifact = is_star_compatible(pmd, x_star, solver)
    doc: dict = {"compatible": compatible, "x_star": x_star, "witness": None}
    if isinstance(artifact, IncompatibilityRay):
        doc["ray_pairing"] = artifact.pairing
    if args.out and compatible and artifact is not None:
        _write_json(args.out, witness_to_json(artifact))
        doc["witness"] = str(args.out)
    _emit(doc)
    return EXIT_OK


def cmd_weight(args) -> int:
    pmd = _load_as(args.pmd_file, Pmd, "pmd")
    x_star = _file_target(pmd.settings, args.target)
    solver = _configured_solver(args)
    weight, decomposition, cert = star_incompatibility_weight(pmd, x_star, solver)
    doc: dict = {
        "w": weight,
        "x_star": x_star,
        "degenerate": decomposition.degenerate,
        # the certificate prices the compatible fraction s; 1-s is its weight
        "w_dual": 1.0 - cert.objective,
        "decomposition": None,
    }
    if args.out:
        dec_doc = {
            "kind": "weight_decomposition",
            "x_star": x_star,
            "weight": weight,
            "degenerate": decomposition.degenerate,
            "compatible_part": instance_to_json(decomposition.compatible_part),
            "rest_part": instance_to_json(decomposition.rest_part),
            "witness": (
                witness_to_json(decomposition.witness)
                if decomposition.witness is not None
                else None
            ),
        }
        _write_json(args.out, dec_doc)
        doc["decomposition"] = str(args.out)
    _emit(doc)
    return EXIT_OK


def cmd_seesaw(args) -> int:
    pmd = _load_as(args.pmd_file, Pmd, "pmd")
    x_star = _file_target(pmd.settings, args.target)
    solver = _configured_solver(args)
    result = seesaw_minimize(pmd, x_star, _seesaw_config(args), solver)
    doc: dict = {
        "best_p": result.best_p,
        "converged": result.converged,
        "iterations": result.iterations,
        "total_iterations": result.total_iterations,
        "restart_index": result.restart_index,
        "failed_restarts": result.failed_restarts,
        "state": None,
    }
    if args.out:
        d = pmd.dim
        _write_json(
            args.out,
            instance_to_json(
                SharedState(d, d, result.best_state),
                description="state minimizing the guessing probability",
            ),
        )
        doc["state"] = str(args.out)
    _emit(doc)
    return EXIT_OK


def cmd_sweep(args) -> int:
    family = _family_fn(args.family)
    x_star = _family_target(family, args.target)
    solver = _configured_solver(args)
    rows = run_eta_sweep(
        x_star=x_star,
        eta_start=args.eta_start,
        eta_end=args.eta_end,
        eta_step=args.eta_step,
        family=family,
        config=_seesaw_config(args),
        solver=solver,
        parallel=args.parallel,
    )
    write_sweep_csv(rows, args.out)
    doc: dict = {
        "rows": len(rows),
        "failed_rows": sum(1 for r in rows if math.isnan(r.p_guess)),
        "csv": str(args.out),
        "gnuplot": None,
    }
    if args.emit_gnuplot:
        script_path = str(args.out) + ".gnuplot"
        with open(script_path, "w", encoding="utf-8") as fh:
            fh.write(gnuplot_script(str(args.out)))
        doc["gnuplot"] = script_path
    _emit(doc)
    return EXIT_OK


def cmd_threshold(args) -> int:
    family = _family_fn(args.family)
    x_star = _family_target(family, args.target)
    solver = _configured_solver(args)
    report = bisect_compatibility_threshold(
        x_star=x_star, tol=args.tol, family=family, solver=solver
    )
    _emit(
        {
            "threshold": report.threshold,
            "bracket": [report.bracket_lo, report.bracket_hi],
            "compatible_at_lo": report.compatible_lo,
            "compatible_at_hi": report.compatible_hi,
            "evaluations": report.evaluations,
        }
    )
    return EXIT_OK


def _add_solver_flag(sp) -> None:
    sp.add_argument(
        "--solver-tol",
        type=float,
        default=None,
        metavar="TOL",
        help="interior-point tolerance (default 1e-8; env CERT_SOLVER_TOL "
        "overrides the default, an explicit flag wins)",
    )


def _add_file_target(sp) -> None:
    sp.add_argument(
        "--target",
        "-x",
        type=int,
        required=True,
        metavar="X",
        help="0-based index of the targeted setting in the file's settings array",
    )


def _add_family_flags(sp) -> None:
    sp.add_argument(
        "--family",
        choices=sorted(FAMILIES),
        default="pauli",
        help="one-parameter device family (default: pauli)",
    )
    sp.add_argument(
        "--target",
        "-x",
        type=int,
        default=1,
        metavar="X",
        help="1-based setting label of the family (default 1; label k is index k-1)",
    )


def _add_seesaw_flags(sp) -> None:
    sp.add_argument("--restarts", type=int, default=10, help="restarts per point (default 10)")
    sp.add_argument("--seed", type=int, default=42, help="base seed (default 42)")
    sp.add_argument("--eps-p", type=float, default=1e-8, metavar="EPS",
                    help="stall tolerance on the objective (default 1e-8)")
    sp.add_argument("--eps-rho", type=float, default=1e-10, metavar="EPS",
                    help="stall tolerance on the state step (default 1e-10)")
    sp.add_argument("--t-max", type=int, default=100, help="iteration cap (default 100)")
    sp.add_argument("--k-stall", type=int, default=4,
                    help="consecutive stalled iterations to declare convergence (default 4)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="starcert",
        description="Certify outcome randomness and joint measurability of "
        "programmable measurement devices.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("guess", help="guessing probability for a stored assemblage")
    sp.add_argument("assemblage_file")
    _add_file_target(sp)
    _add_solver_flag(sp)
    sp.set_defaults(func=cmd_guess)

    sp = sub.add_parser("guess-pmd", help="state-independent guessing probability "
                        "for a device and a shared state")
    sp.add_argument("pmd_file")
    sp.add_argument("state_file")
    _add_file_target(sp)
    _add_solver_flag(sp)
    sp.set_defaults(func=cmd_guess_pmd)

    sp = sub.add_parser("star-compat", help="decide star-compatibility of a device")
    sp.add_argument("pmd_file")
    _add_file_target(sp)
    sp.add_argument("--out", default=None, metavar="PATH",
                    help="write the joint-measurement witness here when compatible")
    _add_solver_flag(sp)
    sp.set_defaults(func=cmd_star_compat)

    sp = sub.add_parser("weight", help="star-incompatibility weight of a device")
    sp.add_argument("pmd_file")
    _add_file_target(sp)
    sp.add_argument("--out", default=None, metavar="PATH",
                    help="write the optimal device decomposition here")
    _add_solver_flag(sp)
    sp.set_defaults(func=cmd_weight)

    sp = sub.add_parser("seesaw", help="alternating minimization of the guessing "
                        "probability over shared states")
    sp.add_argument("pmd_file")
    _add_file_target(sp)
    _add_seesaw_flags(sp)
    sp.add_argument("--out", default=None, metavar="PATH",
                    help="write the minimizing shared state here")
    _add_solver_flag(sp)
    sp.set_defaults(func=cmd_seesaw)

    sp = sub.add_parser("sweep", help="visibility sweep of a device family, CSV output")
    _add_family_flags(sp)
    sp.add_argument("--eta-start", type=float, default=0.65, metavar="ETA")
    sp.add_argument("--eta-end", type=float, default=1.0, metavar="ETA")
    sp.add_argument("--eta-step", type=float, default=0.01, metavar="STEP")
    _add_seesaw_flags(sp)
    sp.add_argument("--out", required=True, metavar="CSV", help="output CSV path")
    sp.add_argument("--emit-gnuplot", action="store_true",
                    help="also write <CSV>.gnuplot referencing the CSV")
    sp.add_argument("--parallel", action="store_true",
                    help="run grid points independently (drops warm-start chaining)")
    _add_solver_flag(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("threshold", help="bisect the family's compatibility threshold")
    _add_family_flags(sp)
    sp.add_argument("--tol", type=float, default=1e-3,
                    help="bracket width to bisect down to (default 1e-3)")
    _add_solver_flag(sp)
    sp.set_defaults(func=cmd_threshold)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed usage/help; fold its exit into our contract
        return int(exc.code) if isinstance(exc.code, int) else EXIT_INPUT
    try:
        return args.func(args)
    except (InstanceError, ValueError) as exc:
        _emit({"error": str(exc)})
        return EXIT_INPUT
    except OSError as exc:
        _emit({"error": str(exc)})
        return EXIT_INPUT
    except SolverError as exc:
        _emit({"error": str(exc)})
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
