"""Alternating minimization of the guessing bound over shared pure states.

Fix the device, solve the assemblage-guessing dual for the current state,
then replace the state by the minimal eigenvector of the dual's linear
functional; repeat until both the objective and the state stall for several
consecutive iterations. Restarts from random pure states guard against the
non-convexity of the joint problem.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .certify import assemblage_guessing_dual
from .linalg import check_density, kron, min_eigpair
from .objects import Pmd, assemblage_from, random_pure_state, require_valid
from .sdp import ClarabelSolver, ConicSolver, SolverError


@dataclass(frozen=True)
class SeesawConfig:
    """Stopping and restart parameters of the alternating search.

    A run stops once the objective moves less than eps_p and the state moves
    less than eps_rho (Hilbert-Schmidt) for k_stall consecutive iterations,
    or after t_max iterations. warm_start, when given, is a density operator
    whose dominant eigenvector seeds the first restart.
    """

    eps_p: float = 1e-8
    eps_rho: float = 1e-10
    t_max: int = 100
    k_stall: int = 4
    restarts: int = 10
    seed: int = 42
    warm_start: np.ndarray | None = None

    def __post_init__(self):
        if self.eps_p <= 0 or self.eps_rho <= 0:
            raise ValueError("stall tolerances must be positive")
        if self.t_max < 1 or self.k_stall < 1 or self.restarts < 1:
            raise ValueError("t_max, k_stall and restarts must be at least 1")


@dataclass(frozen=True)
class SeesawResult:
    best_p: float
    best_state: np.ndarray
    trajectory: tuple[tuple[float, float], ...]
    restart_index: int
    converged: bool
    iterations: int
    total_iterations: int
    failed_restarts: int = 0


def state_step(pmd: Pmd, dual_x) -> np.ndarray:
    """Pure state minimizing trace(H rho) for H built from dual X operators."""
    ops = np.asarray(dual_x, dtype=complex)
    n, m, d = pmd.settings, pmd.outcomes, pmd.dim
    if ops.shape != (n, m, d, d):
        raise ValueError(
            f"dual operators have shape {ops.shape}, expected {(n, m, d, d)}"
        )
    h = np.zeros((d * d, d * d), dtype=complex)
    for x in range(n):
        for a in range(m):
            h += kron(pmd.ops[x, a], ops[x, a])
    _, vec = min_eigpair(h)
    return vec


def sweep_warm_start(
    prev_best,
    restarts: int,
    seed: int,
    *,
    dim_a: int | None = None,
    dim_b: int | None = None,
) -> list[np.ndarray]:
    """Initial pure states for one search: one warm slot, the rest seeded random.

    prev_best (a density operator) contributes its dominant eigenvector as
    the first initializer when present; random slots draw from seed + slot.
    Dimensions are taken from prev_best when possible, otherwise dim_a and
    dim_b are required.
    """
    restarts = int(restarts)
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    states: list[np.ndarray] = []
    if prev_best is not None:
        rho = check_density(prev_best)
        w, v = np.linalg.eigh(rho)
        states.append(np.ascontiguousarray(v[:, -1]))
    if len(states) < restarts:
        if dim_a is None or dim_b is None:
            raise ValueError("dim_a and dim_b are required to draw random states")
        for j in range(len(states), restarts):
            states.append(random_pure_state(dim_a, dim_b, seed=seed + j))
    return states


@dataclass(frozen=True)
class _Run:
    p: float
    state: np.ndarray
    trajectory: tuple[tuple[float, float], ...]
    converged: bool


def _run_single(pmd, x_star, psi0, config, solver):
    """One restart. Returns (run or None on solver failure, iterations used)."""
    vec = np.asarray(psi0, dtype=complex).reshape(-1)
    vec = vec / np.linalg.norm(vec)
    rho = np.outer(vec, vec.conj())
    p_prev = np.inf
    accepted_p = None
    accepted_state = None
    k = 0
    trajectory: list[tuple[float, float]] = []
    converged = False
    iterations = 0
    for _ in range(config.t_max):
        asm = assemblage_from(pmd, rho, dim_b=pmd.dim)
        try:
            p_new, cert = assemblage_guessing_dual(asm, x_star, solver)
        except SolverError:
            return None, iterations
        psi_next = state_step(pmd, cert.x_ops)
        rho_next = np.outer(psi_next, psi_next.conj())
        delta = float(np.linalg.norm(rho_next - rho))
        iterations += 1
        trajectory.append((p_new, delta))
        if abs(p_new - p_prev) < config.eps_p and delta < config.eps_rho:
            k += 1
            if k >= config.k_stall:
                converged = True
                break
        else:
            k = 0
        # p_new was certified for the pre-step state, so pair them
        accepted_p, accepted_state = p_new, rho
        p_prev = p_new
        rho = rho_next
    if accepted_p is None:
        return None, iterations
    return _Run(accepted_p, accepted_state, tuple(trajectory), converged), iterations


def seesaw_minimize(
    pmd: Pmd,
    x_star: int,
    config: SeesawConfig | None = None,
    solver: ConicSolver | None = None,
) -> SeesawResult:
    """Search for the shared pure state with the smallest guessing bound.

    Runs config.restarts independent alternating searches and returns the
    best; a restart whose solve fails is skipped, and only all of them
    failing raises.
    """
    require_valid(pmd)
    if not 0 <= int(x_star) < pmd.settings:
        raise ValueError(f"target setting {x_star} outside 0..{pmd.settings - 1}")
    config = config or SeesawConfig()
    if solver is None:
        # descent holds only up to per-iteration suboptimality, so the inner
        # solves run one order tighter than the library default
        solver = ClarabelSolver(tol=1e-9)
    d = pmd.dim
    initializers = sweep_warm_start(
        config.warm_start, config.restarts, config.seed, dim_a=d, dim_b=d
    )
    best: _Run | None = None
    best_index = -1
    total_iterations = 0
    failures = 0
    for index, psi0 in enumerate(initializers):
        run, used = _run_single(pmd, int(x_star), psi0, config, solver)
        total_iterations += used
        if run is None:
            failures += 1
            continue
        if best is None or run.p < best.p:
            best = run
            best_index = index
    if best is None:
        raise SolverError("every see-saw restart failed")
    return SeesawResult(
        best_p=best.p,
        best_state=best.state,
        trajectory=best.trajectory,
        restart_index=best_index,
        converged=best.converged,
        iterations=len(best.trajectory),
        total_iterations=total_iterations,
        failed_restarts=failures,
    )
