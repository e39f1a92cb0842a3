"""Certification core: guessing probabilities, star-compatibility, and weight.

All quantities refer to a targeted setting x_star of a measurement device.
The guessing programs bound an eavesdropper trying to predict the outcome of
x_star; the feasibility programs decide whether the device (or a steered
assemblage) admits a joint explanation with the targeted setting; the weight
program measures how much of the device resists any such explanation.

Maximizations conservatively report min(primal, dual) across the
independently assembled primal and dual programs; every returned certificate
is re-checkable through the residual helpers in this module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import check_density, hermitian, kron, partial_trace, schmidt_decompose
from .objects import (
    Assemblage,
    Pmd,
    StarWitness,
    UnsteerableDecomposition,
    assemblage_from,
    require_valid,
)
from .sdp import (
    GAP_TOL,
    ConicSolver,
    HermitianProgram,
    SolverError,
    SolveStatus,
)

FEAS_SLACK_TOL = 1e-7
DEGENERATE_S = 1e-9
# below the certified-gap resolution 1 - s is indistinguishable from zero and
# the rest part would be solver noise divided by it
DEGENERATE_REST = 1e-6


def _check_target(settings: int, x_star: int) -> int:
    x_star = int(x_star)
    if not 0 <= x_star < settings:
        raise ValueError(f"target setting {x_star} outside 0..{settings - 1}")
    return x_star


def _solved(sol, what: str):
    if sol.status is not SolveStatus.OPTIMAL:
        raise SolverError(f"{what}: solver status {sol.status.value}")
    return sol


@dataclass(frozen=True)
class EveAssemblageStrategy:
    """Feasible eavesdropper decomposition of an assemblage.

    parts[x, a, e] are the sub-normalized members conditioned on the guess e;
    summing over e returns the assemblage, and the e-marginals agree with the
    targeted setting across x.
    """

    assemblage: Assemblage
    x_star: int
    parts: np.ndarray

    def objective(self) -> float:
        m = self.assemblage.outcomes
        return float(
            sum(np.trace(self.parts[self.x_star, e, e]).real for e in range(m))
        )


@dataclass(frozen=True)
class EvePmdStrategy:
    """Feasible eavesdropper refinement of a measurement device."""

    pmd: Pmd
    x_star: int
    parts: np.ndarray

    def objective(self, rho_a) -> float:
        rho = check_density(rho_a)
        m = self.pmd.outcomes
        return float(
            sum(np.trace(self.parts[self.x_star, e, e] @ rho).real for e in range(m))
        )


@dataclass(frozen=True)
class DualCertificate:
    """Feasible point of a dual program together with its objective.

    x_ops/y_ops index as [x, a]; for the guessing duals the y row of the
    target setting is identically zero (it cancels from every constraint).
    z_ops and r_ops are populated by the weight dual only.
    """

    x_star: int
    x_ops: np.ndarray
    y_ops: np.ndarray
    objective: float
    z_ops: np.ndarray | None = None
    r_ops: np.ndarray | None = None


@dataclass(frozen=True)
class IncompatibilityRay:
    """Separating functional proving that no joint device exists.

    For every x != x_star and outcome pair (a, b) the sum
    row_ops[x][a] + col_ops[x][b] is PSD, while pairing (the total overlap
    with the device's marginals) is negative; a feasible joint family would
    force that overlap to be non-negative.
    """

    x_star: int
    row_ops: dict[int, np.ndarray]
    col_ops: dict[int, np.ndarray]
    pairing: float


@dataclass(frozen=True)
class WeightDecomposition:
    """Split of a device into a star-compatible part and an incompatible rest.

    device = (1 - weight) * compatible_part + weight * rest_part, with a
    witness certifying the compatible part. degenerate marks a side that was
    replaced by the uniform device because its mixing coefficient vanished.
    """

    weight: float
    compatible_part: Pmd
    rest_part: Pmd
    witness: StarWitness | None
    degenerate: bool = False


def _min_eig(op: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(hermitian(op, tol=1e-8))[0])


def assemblage_strategy_residual(strategy: EveAssemblageStrategy) -> float:
    """Worst constraint violation of an assemblage-level strategy."""
    asm, x_star, parts = strategy.assemblage, strategy.x_star, strategy.parts
    worst = 0.0
    recon = parts.sum(axis=2)
    worst = max(worst, float(np.abs(recon - asm.ops).max()))
    marg = parts.sum(axis=1)
    for x in range(asm.settings):
        worst = max(worst, float(np.abs(marg[x] - marg[x_star]).max()))
    for op in parts.reshape(-1, asm.dim_b, asm.dim_b):
        worst = max(worst, max(0.0, -_min_eig(op)))
    return worst


def pmd_strategy_residual(strategy: EvePmdStrategy) -> float:
    """Worst constraint violation of a device-level strategy."""
    pmd, x_star, parts = strategy.pmd, strategy.x_star, strategy.parts
    worst = 0.0
    recon = parts.sum(axis=2)
    worst = max(worst, float(np.abs(recon - pmd.ops).max()))
    marg = parts.sum(axis=1)
    for x in range(pmd.settings):
        worst = max(worst, float(np.abs(marg[x] - marg[x_star]).max()))
    for op in parts.reshape(-1, pmd.dim, pmd.dim):
        worst = max(worst, max(0.0, -_min_eig(op)))
    return worst


def guessing_dual_margin(cert: DualCertificate, rhs_op) -> float:
    """Smallest eigenvalue margin of the guessing-dual inequalities.

    rhs_op is the identity for assemblage certificates and the sender's
    reduced state for device certificates. Non-negative (up to solver
    tolerance) for a feasible certificate.
    """
    rhs = hermitian(rhs_op)
    n, m, d, _ = cert.x_ops.shape
    y_total = cert.y_ops.sum(axis=0)
    worst = np.inf
    for x in range(n):
        for a in range(m):
            for e in range(m):
                lhs = cert.x_ops[x, a] - cert.y_ops[x, e]
                if x == cert.x_star:
                    lhs = lhs + y_total[e]
                    if a == e:
                        lhs = lhs - rhs
                worst = min(worst, _min_eig(lhs))
    return float(worst)


def weight_dual_margin(cert: DualCertificate) -> float:
    """Worst feasibility margin of a weight dual certificate.

    Collapses equality residuals (as negative margins), the PSD conditions,
    and the trace normalization into a single number that is >= -tolerance
    for a feasible certificate.
    """
    if cert.z_ops is None or cert.r_ops is None:
        raise ValueError("certificate does not carry weight-dual blocks")
    n, m, d, _ = cert.x_ops.shape
    worst = np.inf
    y_total = cert.y_ops.sum(axis=0)
    for x in range(n):
        for a in range(m):
            lhs = cert.x_ops[x, a] + cert.z_ops[x]
            if x == cert.x_star:
                lhs = lhs + y_total[a]
            worst = min(worst, -float(np.abs(lhs - cert.r_ops[x, a]).max()))
            worst = min(worst, _min_eig(cert.r_ops[x, a]))
            for e in range(m):
                worst = min(worst, _min_eig(cert.x_ops[x, a] + cert.y_ops[x, e]))
    trace_total = float(sum(np.trace(z).real for z in cert.z_ops))
    worst = min(worst, -abs(trace_total - 1.0))
    return float(worst)


def _guessing_primal(data: np.ndarray, x_star: int, obj_mat: np.ndarray):
    n, m, d, _ = data.shape
    hp = HermitianProgram(maximize=True)
    refs = [
        [[hp.psd_operator(f"t{x}.{a}.{e}", d) for e in range(m)] for a in range(m)]
        for x in range(n)
    ]
    for x in range(n):
        for a in range(m):
            hp.add_operator_equality(
                [(1.0, refs[x][a][e]) for e in range(m)], data[x, a], label=f"marg{x}.{a}"
            )
    for x in range(n):
        if x == x_star:
            continue
        for e in range(m):
            terms = [(1.0, refs[x][a][e]) for a in range(m)]
            terms += [(-1.0, refs[x_star][a][e]) for a in range(m)]
            hp.add_operator_equality(terms, 0.0, label=f"nosig{x}.{e}")
    hp.add_objective(op_terms=[(obj_mat, refs[x_star][e][e]) for e in range(m)])
    return hp, refs


def _guessing_dual(data: np.ndarray, x_star: int, rhs_op: np.ndarray):
    n, m, d, _ = data.shape
    hp = HermitianProgram(maximize=False)
    x_refs = [[hp.free_operator(f"X{x}.{a}", d) for a in range(m)] for x in range(n)]
    y_refs = {
        x: [hp.free_operator(f"Y{x}.{e}", d) for e in range(m)]
        for x in range(n)
        if x != x_star
    }
    zero = np.zeros((d, d))
    for x in range(n):
        for a in range(m):
            for e in range(m):
                slack = hp.psd_operator(f"S{x}.{a}.{e}", d)
                terms = [(1.0, x_refs[x][a]), (-1.0, slack)]
                if x == x_star:
                    terms += [(1.0, y_refs[xp][e]) for xp in y_refs]
                    rhs = rhs_op if a == e else zero
                else:
                    terms.append((-1.0, y_refs[x][e]))
                    rhs = zero
                hp.add_operator_equality(terms, rhs)
    hp.add_objective(
        op_terms=[(data[x, a], x_refs[x][a]) for x in range(n) for a in range(m)]
    )
    return hp, x_refs, y_refs


def _certified_guessing_dual(data, x_star, rhs_op, x_ops, y_ops, what):
    """Repair a candidate dual point to exact feasibility and price it directly.

    A uniform shift of every X by the worst violation restores feasibility
    (each inequality gains the same multiple of the identity), after which
    the certificate's value is recomputed from the data so it never depends
    on a solver-reported objective.
    """
    n, m, d, _ = data.shape
    cert = DualCertificate(x_star, x_ops, y_ops, 0.0)
    margin = guessing_dual_margin(cert, rhs_op)
    if margin < -0.01:
        raise SolverError(f"{what}: recovered dual point is far from feasible ({margin:.3e})")
    if margin < 0.0:
        x_ops = x_ops - margin * np.eye(d)
        cert = DualCertificate(x_star, x_ops, y_ops, 0.0)
        margin = guessing_dual_margin(cert, rhs_op)
        if margin < -1e-9:
            raise SolverError(f"{what}: dual repair failed ({margin:.3e})")
    value = float(
        sum(
            np.trace(x_ops[x, a] @ data[x, a]).real
            for x in range(n)
            for a in range(m)
        )
    )
    return value, DualCertificate(x_star, x_ops, y_ops, objective=value)


def _solve_guessing_dual(data, x_star, rhs_op, solver, what, recovery=None):
    """Assemble and solve the guessing dual, cross-checking primal multipliers.

    Degenerate instances (rank-deficient data) can stall the dual solve even
    though the primal certifies; a second dual point is then recovered from
    the primal's equality multipliers, and the smaller of the priced upper
    bounds wins. Either way the returned certificate is feasibility-checked
    and priced directly against the data.
    """
    n, m, d, _ = data.shape
    hp, x_refs, y_refs = _guessing_dual(data, x_star, rhs_op)
    sol = hp.solve(solver)
    candidates = []
    if sol.status is SolveStatus.OPTIMAL:
        x_ops = np.stack(
            [np.stack([sol.operator(x_refs[x][a]) for a in range(m)]) for x in range(n)]
        )
        y_ops = np.zeros((n, m, d, d), dtype=complex)
        for x, row in y_refs.items():
            for e in range(m):
                y_ops[x, e] = sol.operator(row[e])
        candidates.append(
            _certified_guessing_dual(data, x_star, rhs_op, x_ops, y_ops, what)
        )
    if sol.status is not SolveStatus.OPTIMAL or sol.stalled:
        psol = recovery() if recovery is not None else None
        if psol is None:
            php, _ = _guessing_primal(data, x_star, rhs_op)
            psol = _solved(php.solve(solver), what + " (recovery primal)")
        x_ops = np.stack(
            [
                np.stack([psol.equality_dual(f"marg{x}.{a}") for a in range(m)])
                for x in range(n)
            ]
        )
        y_ops = np.zeros((n, m, d, d), dtype=complex)
        for x in range(n):
            if x == x_star:
                continue
            for e in range(m):
                y_ops[x, e] = -psol.equality_dual(f"nosig{x}.{e}")
        candidates.append(
            _certified_guessing_dual(
                data, x_star, rhs_op, x_ops, y_ops, what + " (multipliers)"
            )
        )
    return min(candidates, key=lambda vc: vc[0])


def _extract_parts(sol, refs, n, m, d):
    parts = np.empty((n, m, m, d, d), dtype=complex)
    for x in range(n):
        for a in range(m):
            for e in range(m):
                parts[x, a, e] = sol.operator(refs[x][a][e])
    return parts


def guessing_probability_assemblage(
    assemblage: Assemblage, x_star: int, solver: ConicSolver | None = None
) -> tuple[float, EveAssemblageStrategy, DualCertificate]:
    """Optimal probability of guessing the targeted outcome from an assemblage.

    Returns the conservative value min(primal, dual), the optimal
    eavesdropper strategy, and a feasible dual certificate.
    """
    require_valid(assemblage)
    x_star = _check_target(assemblage.settings, x_star)
    n, m, d = assemblage.settings, assemblage.outcomes, assemblage.dim_b
    hp, refs = _guessing_primal(assemblage.ops, x_star, np.eye(d))
    sol = _solved(hp.solve(solver), "guessing primal")
    primal_value = min(sol.primal_objective, sol.dual_objective)
    dual_value, cert = _solve_guessing_dual(
        assemblage.ops, x_star, np.eye(d), solver, "guessing dual", recovery=lambda: sol
    )
    if abs(primal_value - dual_value) > GAP_TOL * max(1.0, abs(primal_value)):
        raise SolverError(
            f"guessing programs disagree: primal {primal_value!r}, dual {dual_value!r}"
        )
    strategy = EveAssemblageStrategy(
        assemblage, x_star, _extract_parts(sol, refs, n, m, d)
    )
    return min(primal_value, dual_value), strategy, cert


def assemblage_guessing_dual(
    assemblage: Assemblage, x_star: int, solver: ConicSolver | None = None
) -> tuple[float, DualCertificate]:
    """Dual-form guessing bound for an assemblage, exposing the X operators."""
    require_valid(assemblage)
    x_star = _check_target(assemblage.settings, x_star)
    return _solve_guessing_dual(
        assemblage.ops, x_star, np.eye(assemblage.dim_b), solver, "guessing dual"
    )


def guessing_probability_pmd(
    pmd: Pmd, rho_a, x_star: int, solver: ConicSolver | None = None
) -> tuple[float, EvePmdStrategy]:
    """State-independent guessing probability for a device and sender state."""
    require_valid(pmd)
    x_star = _check_target(pmd.settings, x_star)
    rho = check_density(rho_a)
    if rho.shape[0] != pmd.dim:
        raise ValueError(f"state dimension {rho.shape[0]} does not match device {pmd.dim}")
    n, m, d = pmd.settings, pmd.outcomes, pmd.dim
    hp, refs = _guessing_primal(pmd.ops, x_star, rho)
    sol = _solved(hp.solve(solver), "device guessing primal")
    primal_value = min(sol.primal_objective, sol.dual_objective)
    dual_value, _ = _solve_guessing_dual(
        pmd.ops, x_star, rho, solver, "device guessing dual", recovery=lambda: sol
    )
    if abs(primal_value - dual_value) > GAP_TOL * max(1.0, abs(primal_value)):
        raise SolverError(
            f"device guessing programs disagree: primal {primal_value!r}, dual {dual_value!r}"
        )
    strategy = EvePmdStrategy(pmd, x_star, _extract_parts(sol, refs, n, m, d))
    return min(primal_value, dual_value), strategy


def pmd_guessing_dual(
    pmd: Pmd, rho_a, x_star: int, solver: ConicSolver | None = None
) -> tuple[float, DualCertificate]:
    """Dual-form guessing bound for a device, exposing the X operators."""
    require_valid(pmd)
    x_star = _check_target(pmd.settings, x_star)
    rho = check_density(rho_a)
    if rho.shape[0] != pmd.dim:
        raise ValueError(f"state dimension {rho.shape[0]} does not match device {pmd.dim}")
    return _solve_guessing_dual(pmd.ops, x_star, rho, solver, "device guessing dual")


def _joint_feasibility(data: np.ndarray, x_star: int, solver):
    """Feasibility of joint PSD families with the given row/column marginals.

    Returns (feasible, parts or None, ray or None). The slack fallback
    engages when the plain feasibility solve is numerically ambiguous.
    """
    n, m, d, _ = data.shape
    others = [x for x in range(n) if x != x_star]
    if not others:
        return True, {}, None
    hp = HermitianProgram(maximize=False)
    refs = {
        x: [[hp.psd_operator(f"J{x}.{a}.{b}", d) for b in range(m)] for a in range(m)]
        for x in others
    }
    for x in others:
        for a in range(m):
            hp.add_operator_equality(
                [(1.0, refs[x][a][b]) for b in range(m)], data[x, a], label=f"row{x}.{a}"
            )
        for b in range(m):
            hp.add_operator_equality(
                [(1.0, refs[x][a][b]) for a in range(m)],
                data[x_star, b],
                label=f"col{x}.{b}",
            )
    sol = hp.solve(solver)
    if sol.status is SolveStatus.OPTIMAL:
        parts = {
            x: np.stack(
                [np.stack([sol.operator(refs[x][a][b]) for b in range(m)]) for a in range(m)]
            )
            for x in others
        }
        return True, parts, None
    if sol.status is SolveStatus.INFEASIBLE:
        return False, None, _build_ray(sol, data, x_star, others, m)
    return _joint_feasibility_slack(data, x_star, others, solver)


def _build_ray(sol, data, x_star, others, m):
    row_ops = {
        x: np.stack([sol.equality_dual(f"row{x}.{a}") for a in range(m)]) for x in others
    }
    col_ops = {
        x: np.stack([sol.equality_dual(f"col{x}.{b}") for b in range(m)]) for x in others
    }
    pairing = 0.0
    for x in others:
        for a in range(m):
            pairing += float(np.trace(row_ops[x][a] @ data[x, a]).real)
            pairing += float(np.trace(col_ops[x][a] @ data[x_star, a]).real)
    if pairing > 0.0:
        row_ops = {x: -ops for x, ops in row_ops.items()}
        col_ops = {x: -ops for x, ops in col_ops.items()}
        pairing = -pairing
    return IncompatibilityRay(x_star, row_ops, col_ops, pairing)


def _joint_feasibility_slack(data, x_star, others, solver):
    n, m, d, _ = data.shape
    hp = HermitianProgram(maximize=False)
    t = hp.scalar("t")
    eye = np.eye(d)
    refs = {
        x: [[hp.psd_operator(f"J{x}.{a}.{b}", d) for b in range(m)] for a in range(m)]
        for x in others
    }

    def bound_deviation(tag, terms, target):
        up = hp.psd_operator(f"up.{tag}", d)
        dn = hp.psd_operator(f"dn.{tag}", d)
        hp.add_operator_equality(
            terms + [(1.0, up)], target, scalar_terms=[(t, -eye)]
        )
        hp.add_operator_equality(
            terms + [(-1.0, dn)], target, scalar_terms=[(t, eye)]
        )

    for x in others:
        for a in range(m):
            bound_deviation(
                f"row{x}.{a}", [(1.0, refs[x][a][b]) for b in range(m)], data[x, a]
            )
        for b in range(m):
            bound_deviation(
                f"col{x}.{b}", [(1.0, refs[x][a][b]) for a in range(m)], data[x_star, b]
            )
    hp.add_objective(scalar_terms=[(1.0, t)])
    sol = _solved(hp.solve(solver), "joint feasibility slack")
    t_star = sol.scalar(t)
    if t_star > FEAS_SLACK_TOL:
        return False, None, None
    parts = {
        x: np.stack(
            [np.stack([sol.operator(refs[x][a][b]) for b in range(m)]) for a in range(m)]
        )
        for x in others
    }
    return True, parts, None


def is_star_compatible(
    pmd: Pmd, x_star: int, solver: ConicSolver | None = None
) -> tuple[bool, StarWitness | IncompatibilityRay | None]:
    """Decide whether every setting is jointly measurable with the target.

    Returns (True, witness) or (False, ray); the ray is None when only the
    slack fallback could decide.
    """
    require_valid(pmd)
    x_star = _check_target(pmd.settings, x_star)
    feasible, parts, ray = _joint_feasibility(pmd.ops, x_star, solver)
    if feasible:
        return True, StarWitness(pmd, x_star, parts)
    return False, ray


def is_star_unsteerable(
    assemblage: Assemblage, x_star: int, solver: ConicSolver | None = None
) -> tuple[bool, UnsteerableDecomposition | None]:
    """Decide whether the assemblage admits a joint part family for the target."""
    require_valid(assemblage)
    x_star = _check_target(assemblage.settings, x_star)
    feasible, parts, _ = _joint_feasibility(assemblage.ops, x_star, solver)
    if feasible:
        return True, UnsteerableDecomposition(assemblage, x_star, parts)
    return False, None


def _uniform_pmd(n: int, m: int, d: int) -> Pmd:
    ops = np.broadcast_to(np.eye(d, dtype=complex) / m, (n, m, d, d)).copy()
    return Pmd(ops)


def _weight_primal(pmd: Pmd, x_star: int):
    n, m, d = pmd.settings, pmd.outcomes, pmd.dim
    hp = HermitianProgram(maximize=True)
    s = hp.scalar("s")
    refs = [
        [[hp.psd_operator(f"G{x}.{a}.{e}", d) for e in range(m)] for a in range(m)]
        for x in range(n)
    ]
    slack = [[hp.psd_operator(f"H{x}.{a}", d) for a in range(m)] for x in range(n)]
    for x in range(n):
        for e in range(m):
            terms = [(1.0, refs[x][a][e]) for a in range(m)]
            terms += [(-1.0, refs[x_star][e][ep]) for ep in range(m)]
            hp.add_operator_equality(terms, 0.0, label=f"match{x}.{e}")
    for x in range(n):
        for a in range(m):
            terms = [(1.0, refs[x][a][e]) for e in range(m)] + [(1.0, slack[x][a])]
            hp.add_operator_equality(terms, pmd.ops[x, a], label=f"split{x}.{a}")
    hp.add_operator_equality(
        [(1.0, refs[x_star][a][e]) for a in range(m) for e in range(m)],
        0.0,
        scalar_terms=[(s, -np.eye(d))],
        label="scale",
    )
    hp.add_objective(scalar_terms=[(1.0, s)])
    return hp, refs


def star_incompatibility_weight(
    pmd: Pmd, x_star: int, solver: ConicSolver | None = None
) -> tuple[float, WeightDecomposition, DualCertificate]:
    """Minimal fraction of the device that cannot be explained jointly with x_star.

    Returns the weight, the optimal two-part decomposition with its witness,
    and a feasible dual certificate.
    """
    require_valid(pmd)
    x_star = _check_target(pmd.settings, x_star)
    n, m, d = pmd.settings, pmd.outcomes, pmd.dim
    hp, refs = _weight_primal(pmd, x_star)
    sol = _solved(hp.solve(solver), "weight primal")
    primal_s = min(sol.primal_objective, sol.dual_objective)
    dual_s, cert = _solve_weight_dual(pmd, x_star, solver, primal_sol=sol)
    if abs(primal_s - dual_s) > GAP_TOL * max(1.0, abs(primal_s)):
        raise SolverError(f"weight programs disagree: primal {primal_s!r}, dual {dual_s!r}")
    s_value = min(primal_s, dual_s)
    weight = 1.0 - s_value
    g_parts = _extract_parts(sol, refs, n, m, d)
    f_tilde = g_parts.sum(axis=2)
    degenerate = False
    if s_value > DEGENERATE_S:
        compatible = Pmd(f_tilde / s_value)
        joints = {
            x: g_parts[x] / s_value for x in range(n) if x != x_star
        }
        witness = StarWitness(compatible, x_star, joints)
    else:
        compatible = _uniform_pmd(n, m, d)
        witness = None
        degenerate = True
    if 1.0 - s_value > DEGENERATE_REST:
        rest = Pmd((pmd.ops - f_tilde) / (1.0 - s_value))
    else:
        rest = _uniform_pmd(n, m, d)
        degenerate = True
    decomposition = WeightDecomposition(weight, compatible, rest, witness, degenerate)
    return weight, decomposition, cert


def _weight_dual_program(pmd: Pmd, x_star: int):
    n, m, d = pmd.settings, pmd.outcomes, pmd.dim
    hp = HermitianProgram(maximize=False)
    x_refs = [[hp.free_operator(f"X{x}.{a}", d) for a in range(m)] for x in range(n)]
    y_refs = [[hp.free_operator(f"Y{x}.{e}", d) for e in range(m)] for x in range(n)]
    z_refs = [hp.free_operator(f"Z{x}", d) for x in range(n)]
    r_refs = [[hp.psd_operator(f"R{x}.{a}", d) for a in range(m)] for x in range(n)]
    p_refs = [
        [[hp.psd_operator(f"P{x}.{a}.{e}", d) for e in range(m)] for a in range(m)]
        for x in range(n)
    ]
    for x in range(n):
        for a in range(m):
            terms = [(1.0, x_refs[x][a]), (1.0, z_refs[x]), (-1.0, r_refs[x][a])]
            if x == x_star:
                terms += [(1.0, y_refs[xp][a]) for xp in range(n)]
            hp.add_operator_equality(terms, 0.0)
            for e in range(m):
                hp.add_operator_equality(
                    [(1.0, x_refs[x][a]), (1.0, y_refs[x][e]), (-1.0, p_refs[x][a][e])],
                    0.0,
                )
    hp.add_scalar_equality(
        trace_terms=[(np.eye(d), z_refs[x]) for x in range(n)], rhs=1.0
    )
    hp.add_objective(
        op_terms=[(pmd.ops[x, a], r_refs[x][a]) for x in range(n) for a in range(m)]
    )
    return hp, x_refs, y_refs, z_refs


def _weight_multiplier_blocks(psol, n: int, m: int, d: int, x_star: int):
    """Weight-dual blocks rebuilt from the primal's equality multipliers.

    The split multipliers are the R blocks (so the priced value equals the
    primal optimum), the match multipliers are Y, the scale multiplier,
    negated, seeds the target's Z; X is whatever makes the linear conditions
    hold exactly.
    """
    y_ops = np.stack(
        [
            np.stack([psol.equality_dual(f"match{x}.{e}") for e in range(m)])
            for x in range(n)
        ]
    )
    z_ops = np.zeros((n, d, d), dtype=complex)
    z_ops[x_star] = -psol.equality_dual("scale")
    y_total = y_ops.sum(axis=0)
    x_ops = np.empty((n, m, d, d), dtype=complex)
    for x in range(n):
        for a in range(m):
            xa = psol.equality_dual(f"split{x}.{a}") - z_ops[x]
            if x == x_star:
                xa = xa - y_total[a]
            x_ops[x, a] = xa
    return x_ops, y_ops, z_ops


def _certified_weight_dual(ops, x_star, x_ops, y_ops, z_ops, what):
    """Repair a candidate weight-dual point and price it from the device.

    Every condition except the trace normalization is homogeneous in the
    blocks, so rescaling restores the normalization exactly; a uniform shift
    of every X then lifts both slack families to PSD at once. R is assembled
    from the repaired blocks, and the value is its direct pairing with the
    device elements, never a solver-reported objective.
    """
    n, m, d, _ = ops.shape
    total = float(sum(np.trace(z).real for z in z_ops))
    if total < 0.5:
        raise SolverError(
            f"{what}: recovered dual point is far from feasible (trace {total:.3e})"
        )
    x_ops = x_ops / total
    y_ops = y_ops / total
    z_ops = z_ops / total
    y_total = y_ops.sum(axis=0)

    def assemble(xs):
        r_ops = np.empty_like(xs)
        for x in range(n):
            for a in range(m):
                r = xs[x, a] + z_ops[x]
                if x == x_star:
                    r = r + y_total[a]
                r_ops[x, a] = r
        return r_ops

    r_ops = assemble(x_ops)
    cert = DualCertificate(x_star, x_ops, y_ops, 0.0, z_ops, r_ops)
    margin = weight_dual_margin(cert)
    if margin < -0.01:
        raise SolverError(
            f"{what}: recovered dual point is far from feasible ({margin:.3e})"
        )
    if margin < 0.0:
        x_ops = x_ops - margin * np.eye(d)
        r_ops = assemble(x_ops)
        cert = DualCertificate(x_star, x_ops, y_ops, 0.0, z_ops, r_ops)
        margin = weight_dual_margin(cert)
        if margin < -1e-9:
            raise SolverError(f"{what}: dual repair failed ({margin:.3e})")
    value = float(
        sum(
            np.trace(ops[x, a] @ r_ops[x, a]).real
            for x in range(n)
            for a in range(m)
        )
    )
    return value, DualCertificate(x_star, x_ops, y_ops, value, z_ops, r_ops)


def _solve_weight_dual(pmd: Pmd, x_star: int, solver, primal_sol=None):
    """Solve the weight dual, cross-checking against primal multipliers.

    Sharp projective devices leave the optimal slack blocks rank deficient,
    and the direct dual solve can then stall well above the optimum while
    still certifying. Whenever that happens (or the dual solve fails
    outright) a second candidate is rebuilt from the primal's equality
    multipliers; both are repaired, priced directly against the device, and
    the smaller upper bound wins.
    """
    n, m, d = pmd.settings, pmd.outcomes, pmd.dim
    hp, x_refs, y_refs, z_refs = _weight_dual_program(pmd, x_star)
    sol = hp.solve(solver)
    candidates = []
    if sol.status is SolveStatus.OPTIMAL:
        x_ops = np.stack([np.stack([sol.operator(r) for r in row]) for row in x_refs])
        y_ops = np.stack([np.stack([sol.operator(r) for r in row]) for row in y_refs])
        z_ops = np.stack([sol.operator(r) for r in z_refs])
        candidates.append(
            _certified_weight_dual(pmd.ops, x_star, x_ops, y_ops, z_ops, "weight dual")
        )
    if sol.status is not SolveStatus.OPTIMAL or sol.stalled:
        psol = primal_sol
        if psol is None:
            php, _ = _weight_primal(pmd, x_star)
            psol = _solved(php.solve(solver), "weight dual (recovery primal)")
        blocks = _weight_multiplier_blocks(psol, n, m, d, x_star)
        candidates.append(
            _certified_weight_dual(
                pmd.ops, x_star, *blocks, "weight dual (multipliers)"
            )
        )
    return min(candidates, key=lambda vc: vc[0])


def weight_dual(
    pmd: Pmd, x_star: int, solver: ConicSolver | None = None
) -> tuple[float, DualCertificate]:
    """Dual of the weight program; its value upper-bounds the compatible fraction."""
    require_valid(pmd)
    x_star = _check_target(pmd.settings, x_star)
    return _solve_weight_dual(pmd, x_star, solver)


def weight_lower_bound(p: float, outcomes: int) -> float:
    """Weight implied by a guessing probability p over the given outcome count."""
    if outcomes < 2:
        raise ValueError(f"bound needs at least 2 outcomes, got {outcomes}")
    p = float(p)
    if not (1.0 / outcomes - 1e-7 <= p <= 1.0 + 1e-7):
        raise ValueError(f"guessing probability {p} outside [1/{outcomes}, 1]")
    return outcomes / (outcomes - 1.0) * (1.0 - p)


def witness_residual(witness: StarWitness) -> float:
    """Worst marginal or positivity violation of a star witness."""
    pmd, x_star = witness.pmd, witness.x_star
    worst = 0.0
    for x, joint in witness.joints.items():
        worst = max(worst, float(np.abs(joint.sum(axis=1) - pmd.ops[x]).max()))
        worst = max(worst, float(np.abs(joint.sum(axis=0) - pmd.ops[x_star]).max()))
        for op in joint.reshape(-1, pmd.dim, pmd.dim):
            worst = max(worst, max(0.0, -_min_eig(op)))
    return worst


def witness_from_unsteerable(
    decomposition: UnsteerableDecomposition,
    psi,
    pmd: Pmd,
    tol: float = 1e-7,
) -> StarWitness:
    """Turn a no-steering certificate into a joint-measurability witness.

    Works for a pure state of full Schmidt rank whose steered assemblage the
    decomposition explains; the parts are pulled back through the state's
    Schmidt data onto the device side. Raises when the rank is deficient or
    the reconstructed marginals miss the device by more than tol.
    """
    require_valid(pmd)
    d = pmd.dim
    asm = decomposition.assemblage
    if asm.dim_b != d:
        raise ValueError(
            f"assemblage dimension {asm.dim_b} does not match device dimension {d}"
        )
    sd = schmidt_decompose(psi, d, d)
    if sd.rank < d:
        raise ValueError(f"state has Schmidt rank {sd.rank}, need full rank {d}")
    u, v = sd.basis_a, sd.basis_b
    dinv = np.diag(1.0 / (np.sqrt(d) * sd.coefficients))
    joints: dict[int, np.ndarray] = {}
    for x, part in decomposition.parts.items():
        out = np.empty_like(part)
        for a in range(asm.outcomes):
            for b in range(asm.outcomes):
                in_schmidt = v.conj().T @ part[a, b] @ v
                pulled = d * dinv @ in_schmidt.T @ dinv
                out[a, b] = u @ pulled @ u.conj().T
        joints[x] = out
    witness = StarWitness(pmd, decomposition.x_star, joints)
    residual = witness_residual(witness)
    if residual > tol:
        raise ValueError(
            f"pulled-back marginals miss the device by {residual:.3e}; "
            "decomposition does not match this device/state pair"
        )
    return witness


def lift_pmd_strategy(
    strategy: EvePmdStrategy, rho_ab, dim_b: int | None = None
) -> EveAssemblageStrategy:
    """Push a device-level strategy through a shared state onto the assemblage."""
    rho = check_density(rho_ab)
    d_a = strategy.pmd.dim
    if dim_b is None:
        if rho.shape[0] % d_a != 0:
            raise ValueError(
                f"state dimension {rho.shape[0]} is not a multiple of {d_a}"
            )
        dim_b = rho.shape[0] // d_a
    n, m = strategy.pmd.settings, strategy.pmd.outcomes
    eye_b = np.eye(dim_b)
    parts = np.empty((n, m, m, dim_b, dim_b), dtype=complex)
    for x in range(n):
        for a in range(m):
            for e in range(m):
                parts[x, a, e] = partial_trace(
                    kron(strategy.parts[x, a, e], eye_b) @ rho, d_a, dim_b, keep="B"
                )
    asm = assemblage_from(strategy.pmd, rho, dim_b)
    return EveAssemblageStrategy(asm, strategy.x_star, parts)
