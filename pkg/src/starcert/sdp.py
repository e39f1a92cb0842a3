"""Complex-Hermitian semidefinite programs lowered to a real conic standard form.

Two layers live here. ConicProgram is the real layer: named variables that
are either free scalars or real symmetric PSD matrix blocks, linear equality
rows over their entries, and a linear objective. HermitianProgram sits on
top and deals in complex Hermitian operator variables; PSD-constrained
operators become embedded real blocks of doubled size plus the equalities
linking their redundant halves, while free Hermitian operators become their
d^2 real coordinates.

The bundled backend hands the assembled cone problem to clarabel and then
re-verifies the claimed solution (equality residual, block eigenvalues,
duality gap) before reporting OPTIMAL.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Protocol

import numpy as np
import scipy.sparse as sp

from .linalg import hermitian

SQRT2 = np.sqrt(2.0)

TOL_STRUCTURE = 1e-8
GAP_TOL = 1e-6
EQ_RESIDUAL_TOL = 1e-7
PSD_RESIDUAL_TOL = 1e-7


class SolveStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    NUMERICAL_FAILURE = "numerical_failure"


class SolverError(RuntimeError):
    """Raised when a solve needed by an operation did not certify."""


def embed_hermitian(h) -> np.ndarray:
    """Real symmetric embedding [[Re h, -Im h], [Im h, Re h]] of a Hermitian matrix."""
    arr = hermitian(h)
    re, im = arr.real, arr.imag
    return np.block([[re, -im], [im, re]])


def extract_hermitian(s, tol: float = TOL_STRUCTURE) -> np.ndarray:
    """Invert embed_hermitian, averaging the redundant halves.

    Real matrices farther than tol * max(1, ||s||) from the embedded
    structure (symmetric, equal diagonal blocks, antisymmetric off-diagonal
    block) are rejected.
    """
    arr = np.asarray(s)
    if np.iscomplexobj(arr):
        if np.abs(arr.imag).max(initial=0.0) > tol:
            raise ValueError("embedded matrix must be real")
        arr = arr.real
    arr = arr.astype(float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] % 2:
        raise ValueError(f"expected an even-sized square matrix, got shape {arr.shape}")
    d = arr.shape[0] // 2
    scale = max(1.0, float(np.linalg.norm(arr)))
    asym = np.linalg.norm(arr - arr.T)
    a, b = arr[:d, :d], arr[d:, d:]
    c, ct = arr[d:, :d], arr[:d, d:]
    dev = np.sqrt(np.linalg.norm(a - b) ** 2 + np.linalg.norm(c + ct) ** 2 + asym**2)
    if dev > tol * scale:
        raise ValueError(f"matrix is not an embedded Hermitian image: deviation {dev:.3e}")
    # symmetrize in two exact steps so the result is Hermitian to the last ulp;
    # downstream quotients by tiny scalars must not amplify rounding asymmetry
    re = (a + b) / 2.0
    re = (re + re.T) / 2.0
    im = (c - ct) / 2.0
    im = (im - im.T) / 2.0
    return re + 1j * im


def _svec_len(n: int) -> int:
    return n * (n + 1) // 2


def svec(mat: np.ndarray) -> np.ndarray:
    """Pack a real symmetric matrix into the scaled upper triangle, column-major."""
    n = mat.shape[0]
    out = np.empty(_svec_len(n))
    k = 0
    for j in range(n):
        for i in range(j + 1):
            out[k] = mat[i, j] * (SQRT2 if i < j else 1.0)
            k += 1
    return out


def smat(vec: np.ndarray) -> np.ndarray:
    """Inverse of svec."""
    ln = len(vec)
    n = int(round((np.sqrt(8 * ln + 1) - 1) / 2))
    if _svec_len(n) != ln:
        raise ValueError(f"vector length {ln} is not a triangle number")
    out = np.zeros((n, n))
    k = 0
    for j in range(n):
        for i in range(j + 1):
            v = vec[k] / (SQRT2 if i < j else 1.0)
            out[i, j] = v
            out[j, i] = v
            k += 1
    return out


@dataclass(frozen=True)
class _ScalarVar:
    name: str
    offset: int


@dataclass(frozen=True)
class _BlockVar:
    name: str
    dim: int
    offset: int


class ConicProgram:
    """A real conic program over named variables.

    Variables are free scalars or symmetric matrix blocks constrained to the
    PSD cone. Equality constraints are linear in the variable entries, where
    entry (i, j) of a block addresses the symmetric value shared with (j, i);
    scalars are addressed as entry (0, 0). The objective is a linear
    functional of the same entries, maximized or minimized per `maximize`.
    """

    def __init__(self, maximize: bool = False):
        self.maximize = bool(maximize)
        self._vars: dict[str, _ScalarVar | _BlockVar] = {}
        self._order: list[str] = []
        self._n_cols = 0
        self._rows: list[list[tuple[int, float]]] = []
        self._rhs: list[float] = []
        self._obj: dict[int, float] = {}

    @property
    def n_columns(self) -> int:
        return self._n_cols

    @property
    def n_equalities(self) -> int:
        return len(self._rows)

    def variables(self) -> list[str]:
        return list(self._order)

    def add_scalar(self, name: str) -> str:
        self._register(name, _ScalarVar(name, self._n_cols))
        self._n_cols += 1
        return name

    def add_psd_block(self, name: str, dim: int) -> str:
        if dim < 1:
            raise ValueError(f"block dimension must be positive, got {dim}")
        self._register(name, _BlockVar(name, dim, self._n_cols))
        self._n_cols += _svec_len(dim)
        return name

    def _register(self, name: str, var) -> None:
        if name in self._vars:
            raise ValueError(f"variable {name!r} already declared")
        self._vars[name] = var
        self._order.append(name)

    def _entry_coord(self, name: str, i: int, j: int) -> tuple[int, float]:
        var = self._vars.get(name)
        if var is None:
            raise KeyError(f"unknown variable {name!r}")
        if isinstance(var, _ScalarVar):
            if (i, j) != (0, 0):
                raise ValueError(f"scalar {name!r} addressed with entry ({i},{j})")
            return var.offset, 1.0
        if not (0 <= i < var.dim and 0 <= j < var.dim):
            raise ValueError(f"entry ({i},{j}) outside block {name!r} of dim {var.dim}")
        lo, hi = (i, j) if i <= j else (j, i)
        k = _svec_len(hi) + lo
        return var.offset + k, 1.0 if lo == hi else 1.0 / SQRT2

    def add_equality(self, terms: Iterable[tuple[str, int, int, float]], rhs: float) -> int:
        """Add sum of coeff * entry(name, i, j) == rhs; returns the row index."""
        row: dict[int, float] = {}
        for name, i, j, coeff in terms:
            col, scale = self._entry_coord(name, i, j)
            row[col] = row.get(col, 0.0) + float(coeff) * scale
        self._rows.append(sorted(row.items()))
        self._rhs.append(float(rhs))
        return len(self._rows) - 1

    def add_objective_term(self, name: str, i: int, j: int, coeff: float) -> None:
        col, scale = self._entry_coord(name, i, j)
        self._obj[col] = self._obj.get(col, 0.0) + float(coeff) * scale

    def objective_vector(self) -> np.ndarray:
        q = np.zeros(self._n_cols)
        for col, coeff in self._obj.items():
            q[col] = coeff
        return q

    def equality_matrix(self) -> tuple[sp.csc_matrix, np.ndarray]:
        rows, cols, vals = [], [], []
        for r, row in enumerate(self._rows):
            for col, coeff in row:
                rows.append(r)
                cols.append(col)
                vals.append(coeff)
        a = sp.coo_matrix((vals, (rows, cols)), shape=(len(self._rows), self._n_cols))
        return a.tocsc(), np.asarray(self._rhs)

    def blocks(self) -> list[_BlockVar]:
        return [v for v in self._vars.values() if isinstance(v, _BlockVar)]

    def value_of(self, name: str, x: np.ndarray):
        """Read a variable's value out of a solution vector."""
        var = self._vars[name]
        if isinstance(var, _ScalarVar):
            return float(x[var.offset])
        return smat(x[var.offset : var.offset + _svec_len(var.dim)])


@dataclass
class Solution:
    """Verified outcome of a conic solve.

    equality_duals holds one multiplier per equality row, signed so that
    dual_objective == sum(equality_duals * rhs); on INFEASIBLE it carries the
    improving ray instead. psd_duals maps block names to their PSD cone dual
    matrices.
    """

    status: SolveStatus
    primal_objective: float
    dual_objective: float
    gap: float
    primal: dict[str, float | np.ndarray]
    equality_duals: np.ndarray
    psd_duals: dict[str, np.ndarray]
    eq_residual: float
    min_block_eig: float
    iterations: int
    # the accepted iterate certified but no retry setting reached a clean
    # terminal status; objectives may sit further from the optimum than the
    # gap suggests, so callers with an independent route should cross-check
    stalled: bool = False


class ConicSolver(Protocol):
    def solve(self, prog: ConicProgram) -> Solution: ...


class ClarabelSolver:
    """Interior-point backend via clarabel.

    The reported status is re-derived from the returned iterate: a solve only
    counts as OPTIMAL when the equality residual, the block eigenvalues, and
    the duality gap all pass the module tolerances, so callers never receive
    an uncertified "solved". Degenerate instances that stall under the
    default settings are retried with conservative step fractions and extra
    regularization before giving up; the certification thresholds never move.
    """

    # tried in order until an attempt certifies
    RETRY_SETTINGS = (
        {},
        {"max_step_fraction": 0.90},
        {"max_step_fraction": 0.80, "static_regularization_constant": 1e-7},
        {"equilibrate_enable": False, "max_step_fraction": 0.90},
    )

    def __init__(self, tol: float = 1e-8, max_iter: int = 200, verbose: bool = False):
        if not 0 < tol <= 1e-2:
            raise ValueError(f"solver tolerance out of range: {tol}")
        self.tol = float(tol)
        self.max_iter = int(max_iter)
        self.verbose = bool(verbose)

    def solve(self, prog: ConicProgram) -> Solution:
        import clarabel

        n = prog.n_columns
        if n == 0:
            raise ValueError("program has no variables")
        a_eq, b_eq = prog.equality_matrix()
        blocks = prog.blocks()
        cone_rows = sum(_svec_len(b.dim) for b in blocks)
        sel_rows, sel_cols, sel_vals = [], [], []
        r = 0
        for blk in blocks:
            ln = _svec_len(blk.dim)
            for k in range(ln):
                sel_rows.append(r)
                sel_cols.append(blk.offset + k)
                sel_vals.append(-1.0)
                r += 1
        a_cone = sp.coo_matrix((sel_vals, (sel_rows, sel_cols)), shape=(cone_rows, n))
        a = sp.vstack([a_eq, a_cone.tocsc()], format="csc")
        b = np.concatenate([b_eq, np.zeros(cone_rows)])
        sign = -1.0 if prog.maximize else 1.0
        q = sign * prog.objective_vector()
        cones = [clarabel.ZeroConeT(prog.n_equalities)]
        cones += [clarabel.PSDTriangleConeT(blk.dim) for blk in blocks]
        best: Solution | None = None
        almost: Solution | None = None
        for overrides in self.RETRY_SETTINGS:
            settings = clarabel.DefaultSettings()
            settings.verbose = self.verbose
            settings.max_iter = self.max_iter
            settings.tol_gap_abs = self.tol
            settings.tol_gap_rel = self.tol
            settings.tol_feas = self.tol
            for key, value in overrides.items():
                setattr(settings, key, value)
            solver = clarabel.DefaultSolver(sp.csc_matrix((n, n)), q, a, b, cones, settings)
            raw = solver.solve()
            sol = self._interpret(prog, raw, a_eq, b_eq, sign)
            if sol.status in (SolveStatus.INFEASIBLE, SolveStatus.UNBOUNDED):
                return sol
            if sol.status is SolveStatus.OPTIMAL:
                if raw.status == clarabel.SolverStatus.Solved:
                    return sol
                # AlmostSolved can certify and still sit several 1e-6 from the
                # optimum; keep the tightest such iterate but let the remaining
                # settings try for a clean solve before settling for it
                if almost is None or _objective_improves(prog, sol, almost):
                    almost = sol
                continue
            if best is None or _attempt_gap(sol) < _attempt_gap(best):
                best = sol
        if almost is not None:
            almost.stalled = True
            return almost
        return best

    def _interpret(self, prog, raw, a_eq, b_eq, sign) -> Solution:
        import clarabel

        st = raw.status
        x = np.asarray(raw.x)
        z = np.asarray(raw.z)
        n_eq = prog.n_equalities
        lam = (-sign) * z[:n_eq]
        infeasible = st in (
            clarabel.SolverStatus.PrimalInfeasible,
            clarabel.SolverStatus.AlmostPrimalInfeasible,
        )
        unbounded = st in (
            clarabel.SolverStatus.DualInfeasible,
            clarabel.SolverStatus.AlmostDualInfeasible,
        )
        candidate = st in (clarabel.SolverStatus.Solved, clarabel.SolverStatus.AlmostSolved)
        if infeasible or unbounded:
            return Solution(
                status=SolveStatus.INFEASIBLE if infeasible else SolveStatus.UNBOUNDED,
                primal_objective=float("nan"),
                dual_objective=float("nan"),
                gap=float("nan"),
                primal={},
                equality_duals=-z[:n_eq] if infeasible else np.zeros(n_eq),
                psd_duals={},
                eq_residual=float("nan"),
                min_block_eig=float("nan"),
                iterations=int(raw.iterations),
            )
        if not candidate:
            return Solution(
                status=SolveStatus.NUMERICAL_FAILURE,
                primal_objective=float("nan"),
                dual_objective=float("nan"),
                gap=float("nan"),
                primal={},
                equality_duals=np.full(n_eq, np.nan),
                psd_duals={},
                eq_residual=float("nan"),
                min_block_eig=float("nan"),
                iterations=int(raw.iterations),
            )
        primal_obj = float(sign * raw.obj_val)
        dual_obj = float(sign * raw.obj_val_dual)
        if n_eq:
            eq_residual = float(np.abs(a_eq @ x - b_eq).max())
        else:
            eq_residual = 0.0
        primal: dict[str, float | np.ndarray] = {}
        min_eig = 0.0
        psd_duals: dict[str, np.ndarray] = {}
        offset = n_eq
        for blk in prog.blocks():
            ln = _svec_len(blk.dim)
            psd_duals[blk.name] = smat(z[offset : offset + ln])
            offset += ln
        for name in prog.variables():
            primal[name] = prog.value_of(name, x)
        for blk in prog.blocks():
            lo = float(np.linalg.eigvalsh(primal[blk.name])[0])
            min_eig = min(min_eig, lo)
        gap = abs(primal_obj - dual_obj) / max(1.0, abs(primal_obj))
        certified = (
            st == clarabel.SolverStatus.Solved or st == clarabel.SolverStatus.AlmostSolved
        ) and (gap <= GAP_TOL and eq_residual <= EQ_RESIDUAL_TOL and min_eig >= -PSD_RESIDUAL_TOL)
        return Solution(
            status=SolveStatus.OPTIMAL if certified else SolveStatus.NUMERICAL_FAILURE,
            primal_objective=primal_obj,
            dual_objective=dual_obj,
            gap=gap,
            primal=primal,
            equality_duals=lam,
            psd_duals=psd_duals,
            eq_residual=eq_residual,
            min_block_eig=min_eig,
            iterations=int(raw.iterations),
        )


def _attempt_gap(sol: Solution) -> float:
    g = sol.gap
    return float("inf") if g != g else g


def _objective_improves(prog, candidate: Solution, incumbent: Solution) -> bool:
    """Among certified iterates the one further along the optimization
    direction is closer to the optimum, since all of them are feasible within
    the same residual ceiling."""
    if prog.maximize:
        return candidate.primal_objective > incumbent.primal_objective
    return candidate.primal_objective < incumbent.primal_objective


def solve(prog: ConicProgram, solver: ConicSolver | None = None) -> Solution:
    """Solve a ConicProgram with the given backend (clarabel by default)."""
    return (solver or ClarabelSolver()).solve(prog)


@dataclass(frozen=True)
class OpRef:
    """Handle to a Hermitian operator variable of a HermitianProgram."""

    name: str
    dim: int
    kind: str


@dataclass(frozen=True)
class ScalarRef:
    name: str


@dataclass
class _EqRecord:
    kind: str
    dim: int
    re_rows: dict[tuple[int, int], int] = field(default_factory=dict)
    im_rows: dict[tuple[int, int], int] = field(default_factory=dict)
    row: int = -1


class HermitianProgram:
    """Assembler for SDPs over complex Hermitian operator variables.

    Operator variables are PSD-constrained or free; real scalars can mix into
    any constraint. Operator equalities take real combination coefficients on
    operator terms, constant Hermitian matrices multiplying scalar variables,
    and a constant Hermitian right-hand side; they are emitted once per
    independent real component. Scalar equalities combine scalars with traces
    Tr[C Op]. Objectives are sums of Tr[C Op] terms and scalar terms.
    """

    def __init__(self, maximize: bool = False):
        self.prog = ConicProgram(maximize=maximize)
        self._ops: dict[str, OpRef] = {}
        self._eqs: dict[str, _EqRecord] = {}

    def psd_operator(self, name: str, dim: int) -> OpRef:
        """Declare a Hermitian operator variable constrained to the PSD cone."""
        ref = OpRef(name, dim, "psd")
        self._remember(ref)
        self.prog.add_psd_block(name, 2 * dim)
        for i in range(dim):
            for j in range(i, dim):
                self.prog.add_equality(
                    [(name, i, j, 1.0), (name, dim + i, dim + j, -1.0)], 0.0
                )
                self.prog.add_equality(
                    [(name, dim + i, j, 1.0), (name, dim + j, i, 1.0)], 0.0
                )
        return ref

    def free_operator(self, name: str, dim: int) -> OpRef:
        """Declare an unconstrained Hermitian operator variable."""
        ref = OpRef(name, dim, "free")
        self._remember(ref)
        for i in range(dim):
            for j in range(i, dim):
                self.prog.add_scalar(f"{name}.re{i}.{j}")
                if i < j:
                    self.prog.add_scalar(f"{name}.im{i}.{j}")
        return ref

    def scalar(self, name: str) -> ScalarRef:
        self.prog.add_scalar(name)
        return ScalarRef(name)

    def _remember(self, ref: OpRef) -> None:
        if ref.name in self._ops:
            raise ValueError(f"operator {ref.name!r} already declared")
        self._ops[ref.name] = ref

    def _re_term(self, ref: OpRef, i: int, j: int, coeff: float) -> tuple[str, int, int, float]:
        lo, hi = (i, j) if i <= j else (j, i)
        if ref.kind == "psd":
            return (ref.name, lo, hi, coeff)
        return (f"{ref.name}.re{lo}.{hi}", 0, 0, coeff)

    def _im_term(self, ref: OpRef, i: int, j: int, coeff: float) -> tuple[str, int, int, float]:
        if i == j:
            raise ValueError("diagonal entries have no imaginary part")
        lo, hi, sgn = (i, j, 1.0) if i < j else (j, i, -1.0)
        if ref.kind == "psd":
            return (ref.name, ref.dim + lo, hi, sgn * coeff)
        return (f"{ref.name}.im{lo}.{hi}", 0, 0, sgn * coeff)

    def add_operator_equality(
        self,
        op_terms: Iterable[tuple[float, OpRef]],
        rhs,
        scalar_terms: Iterable[tuple[ScalarRef, np.ndarray]] = (),
        label: str | None = None,
    ) -> None:
        """Add sum coeff_k Op_k + sum s_j C_j == rhs as an operator identity."""
        op_terms = [(float(c), ref) for c, ref in op_terms]
        scalar_terms = [(sref, hermitian(c)) for sref, c in scalar_terms]
        dims = {ref.dim for _, ref in op_terms}
        if len(dims) != 1:
            raise ValueError(f"operator terms of mixed dimension: {sorted(dims)}")
        d = dims.pop()
        rhs = hermitian(rhs) if np.ndim(rhs) else np.eye(d) * complex(rhs)
        if rhs.shape != (d, d):
            raise ValueError(f"rhs shape {rhs.shape} does not match dimension {d}")
        record = _EqRecord("op", d)
        for i in range(d):
            for j in range(i, d):
                terms = [self._re_term(ref, i, j, c) for c, ref in op_terms]
                terms += [
                    (sref.name, 0, 0, float(c[i, j].real))
                    for sref, c in scalar_terms
                    if abs(c[i, j].real) > 0.0
                ]
                record.re_rows[(i, j)] = self.prog.add_equality(terms, float(rhs[i, j].real))
                if i < j:
                    terms = [self._im_term(ref, i, j, c) for c, ref in op_terms]
                    terms += [
                        (sref.name, 0, 0, float(c[i, j].imag))
                        for sref, c in scalar_terms
                        if abs(c[i, j].imag) > 0.0
                    ]
                    record.im_rows[(i, j)] = self.prog.add_equality(terms, float(rhs[i, j].imag))
        if label is not None:
            self._record(label, record)

    def add_scalar_equality(
        self,
        scalar_terms: Iterable[tuple[float, ScalarRef]] = (),
        trace_terms: Iterable[tuple[np.ndarray, OpRef]] = (),
        rhs: float = 0.0,
        label: str | None = None,
    ) -> None:
        """Add sum coeff_j s_j + sum Tr[C_k Op_k] == rhs."""
        terms = [(sref.name, 0, 0, float(c)) for c, sref in scalar_terms]
        for c, ref in trace_terms:
            terms += self._trace_expansion(hermitian(c), ref)
        record = _EqRecord("scalar", 0)
        record.row = self.prog.add_equality(terms, float(rhs))
        if label is not None:
            self._record(label, record)

    def _record(self, label: str, record: _EqRecord) -> None:
        if label in self._eqs:
            raise ValueError(f"constraint label {label!r} already used")
        self._eqs[label] = record

    def _trace_expansion(self, c: np.ndarray, ref: OpRef) -> list[tuple[str, int, int, float]]:
        if c.shape != (ref.dim, ref.dim):
            raise ValueError(f"coefficient shape {c.shape} does not match operator dim {ref.dim}")
        out = []
        for i in range(ref.dim):
            if abs(c[i, i].real) > 0.0:
                out.append(self._re_term(ref, i, i, c[i, i].real))
            for j in range(i + 1, ref.dim):
                if abs(c[i, j].real) > 0.0:
                    out.append(self._re_term(ref, i, j, 2.0 * c[i, j].real))
                if abs(c[i, j].imag) > 0.0:
                    out.append(self._im_term(ref, i, j, 2.0 * c[i, j].imag))
        return out

    def add_objective(
        self,
        op_terms: Iterable[tuple[np.ndarray, OpRef]] = (),
        scalar_terms: Iterable[tuple[float, ScalarRef]] = (),
    ) -> None:
        """Accumulate sum Tr[C_k Op_k] + sum coeff_j s_j into the objective."""
        for c, ref in op_terms:
            for name, i, j, coeff in self._trace_expansion(hermitian(c), ref):
                self.prog.add_objective_term(name, i, j, coeff)
        for coeff, sref in scalar_terms:
            self.prog.add_objective_term(sref.name, 0, 0, float(coeff))

    def solve(self, solver: ConicSolver | None = None) -> "HermitianSolution":
        return HermitianSolution(self, solve(self.prog, solver))


class HermitianSolution:
    """Typed view of a Solution in terms of the HermitianProgram's variables."""

    def __init__(self, hp: HermitianProgram, sol: Solution):
        self._hp = hp
        self.raw = sol

    @property
    def status(self) -> SolveStatus:
        return self.raw.status

    @property
    def primal_objective(self) -> float:
        return self.raw.primal_objective

    @property
    def dual_objective(self) -> float:
        return self.raw.dual_objective

    @property
    def gap(self) -> float:
        return self.raw.gap

    @property
    def stalled(self) -> bool:
        return self.raw.stalled

    def operator(self, ref: OpRef, tol: float = TOL_STRUCTURE) -> np.ndarray:
        """Value of a Hermitian operator variable."""
        if ref.kind == "psd":
            return extract_hermitian(self.raw.primal[ref.name], tol=tol)
        d = ref.dim
        out = np.zeros((d, d), dtype=complex)
        for i in range(d):
            for j in range(i, d):
                v = self.raw.primal[f"{ref.name}.re{i}.{j}"]
                if i == j:
                    out[i, i] = v
                else:
                    w = self.raw.primal[f"{ref.name}.im{i}.{j}"]
                    out[i, j] = v + 1j * w
                    out[j, i] = v - 1j * w
        return out

    def scalar(self, ref: ScalarRef) -> float:
        return float(self.raw.primal[ref.name])

    def equality_dual(self, label: str):
        """Multiplier of a labeled constraint; Hermitian for operator rows.

        Multipliers are normalized so that summing Tr[dual * rhs] over
        operator rows plus dual * rhs over scalar rows gives dual_objective.
        """
        record = self._hp._eqs[label]
        lam = self.raw.equality_duals
        if record.kind == "scalar":
            return float(lam[record.row])
        d = record.dim
        out = np.zeros((d, d), dtype=complex)
        for (i, j), row in record.re_rows.items():
            if i == j:
                out[i, i] = lam[row]
            else:
                out[i, j] += lam[row] / 2.0
                out[j, i] += lam[row] / 2.0
        for (i, j), row in record.im_rows.items():
            out[i, j] += 1j * lam[row] / 2.0
            out[j, i] += -1j * lam[row] / 2.0
        return out
