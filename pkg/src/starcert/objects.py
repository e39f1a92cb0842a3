"""Measurement devices, steering assemblages, and their validation.

Setting and outcome labels are dense integer indices starting at 0. File
loaders map external string labels onto these indices and keep the order of
appearance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linalg import (
    TOL_PSD,
    check_density,
    check_state_vector,
    hermitian,
    kron,
    partial_trace,
)

TOL_SUM = 1e-10
TOL_MARGINAL = 1e-8

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _as_op_array(ops, ndim: int, name: str) -> np.ndarray:
    arr = np.asarray(ops, dtype=complex)
    if arr.ndim != ndim or arr.shape[-1] != arr.shape[-2]:
        raise ValueError(f"{name} must have shape (..., d, d) with {ndim} axes, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    flat = arr.reshape(-1, arr.shape[-1], arr.shape[-1])
    herm = np.stack([hermitian(op) for op in flat])
    return herm.reshape(arr.shape)


@dataclass(frozen=True)
class Povm:
    """A measurement given by its effect operators, shape (outcomes, d, d)."""

    ops: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "ops", _as_op_array(self.ops, 3, "Povm.ops"))

    @property
    def outcomes(self) -> int:
        return self.ops.shape[0]

    @property
    def dim(self) -> int:
        return self.ops.shape[1]


@dataclass(frozen=True)
class Pmd:
    """A programmable measurement device: one POVM per classical setting.

    ops has shape (settings, outcomes, d, d). Settings with fewer physical
    outcomes are padded with zero effects up to the common outcome count.
    """

    ops: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "ops", _as_op_array(self.ops, 4, "Pmd.ops"))

    @classmethod
    def from_povms(cls, povms: Sequence[Povm]) -> "Pmd":
        """Stack POVMs of a common dimension, zero-padding the outcome axis."""
        if not povms:
            raise ValueError("need at least one setting")
        dims = {p.dim for p in povms}
        if len(dims) != 1:
            raise ValueError(f"settings act on different dimensions: {sorted(dims)}")
        d = dims.pop()
        m = max(p.outcomes for p in povms)
        ops = np.zeros((len(povms), m, d, d), dtype=complex)
        for x, p in enumerate(povms):
            ops[x, : p.outcomes] = p.ops
        return cls(ops)

    @property
    def settings(self) -> int:
        return self.ops.shape[0]

    @property
    def outcomes(self) -> int:
        return self.ops.shape[1]

    @property
    def dim(self) -> int:
        return self.ops.shape[2]

    def povm(self, x: int) -> Povm:
        return Povm(self.ops[x])


@dataclass(frozen=True)
class Assemblage:
    """Conditional states sigma^{a|x} steered on Bob, shape (settings, outcomes, d, d).

    The members of a setting sum to the same reduced state for every x and
    that common total has unit trace.
    """

    ops: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "ops", _as_op_array(self.ops, 4, "Assemblage.ops"))

    @property
    def settings(self) -> int:
        return self.ops.shape[0]

    @property
    def outcomes(self) -> int:
        return self.ops.shape[1]

    @property
    def dim_b(self) -> int:
        return self.ops.shape[2]

    def reduced(self) -> np.ndarray:
        """The steered party's total state, taken from the first setting."""
        return self.ops[0].sum(axis=0)


@dataclass(frozen=True)
class StarWitness:
    """Joint measurements certifying that every setting of a device is
    simultaneously measurable with the targeted setting x_star.

    joints[x] has shape (outcomes, outcomes, d, d); axis 0 is the outcome of
    setting x, axis 1 the outcome of x_star.
    """

    pmd: Pmd
    x_star: int
    joints: dict[int, np.ndarray]

    def __post_init__(self):
        fixed = {int(x): _as_op_array(j, 4, f"joints[{x}]") for x, j in self.joints.items()}
        object.__setattr__(self, "joints", fixed)


@dataclass(frozen=True)
class UnsteerableDecomposition:
    """Joint assemblage parts certifying the targeted no-steering property.

    parts[x] has shape (outcomes, outcomes, d, d); summing axis 1 returns the
    members sigma^{a|x}, summing axis 0 returns sigma^{a'|x_star}.
    """

    assemblage: Assemblage
    x_star: int
    parts: dict[int, np.ndarray]

    def __post_init__(self):
        fixed = {int(x): _as_op_array(p, 4, f"parts[{x}]") for x, p in self.parts.items()}
        object.__setattr__(self, "parts", fixed)


@dataclass
class Violation:
    check: str
    where: str
    magnitude: float

    def __str__(self) -> str:
        return f"{self.check} at {self.where}: {self.magnitude:.3e}"


@dataclass
class ValidationReport:
    """Outcome of validate(): empty violations means the object is clean."""

    subject: str
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, check: str, where: str, magnitude: float) -> None:
        self.violations.append(Violation(check, where, float(magnitude)))

    def to_dict(self) -> dict:
        return {
            "subject": self.subject,
            "ok": self.ok,
            "violations": [
                {"check": v.check, "where": v.where, "magnitude": v.magnitude}
                for v in self.violations
            ],
        }

    def __str__(self) -> str:
        if self.ok:
            return f"{self.subject}: ok"
        lines = [f"{self.subject}: {len(self.violations)} violation(s)"]
        lines += [f"  - {v}" for v in self.violations]
        return "\n".join(lines)


def _min_eig(op: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(op)[0])


def _spec_norm(op: np.ndarray) -> float:
    # violation magnitudes are spectral norms, so scalar examples read directly
    return float(np.linalg.norm(op, ord=2))


def _check_psd_family(report: ValidationReport, ops: np.ndarray, label: str, tol: float) -> None:
    flat = ops.reshape(-1, ops.shape[-1], ops.shape[-1])
    idx = np.ndindex(ops.shape[:-2])
    for where, op in zip(idx, flat):
        lo = _min_eig(op)
        if lo < -tol:
            report.add("psd", f"{label}{list(where)}", -lo)


def _validate_povm(povm: Povm) -> ValidationReport:
    report = ValidationReport("Povm")
    _check_psd_family(report, povm.ops, "element", TOL_PSD)
    dev = _spec_norm(povm.ops.sum(axis=0) - np.eye(povm.dim))
    if dev > TOL_SUM:
        report.add("completeness", "sum of elements", dev)
    return report


def _validate_pmd(pmd: Pmd) -> ValidationReport:
    report = ValidationReport("Pmd")
    _check_psd_family(report, pmd.ops, "element", TOL_PSD)
    eye = np.eye(pmd.dim)
    for x in range(pmd.settings):
        dev = _spec_norm(pmd.ops[x].sum(axis=0) - eye)
        if dev > TOL_SUM:
            report.add("completeness", f"setting {x}", dev)
    return report


def _validate_assemblage(asm: Assemblage) -> ValidationReport:
    report = ValidationReport("Assemblage")
    _check_psd_family(report, asm.ops, "member", TOL_PSD)
    totals = asm.ops.sum(axis=1)
    for x in range(1, asm.settings):
        dev = _spec_norm(totals[x] - totals[0])
        if dev > TOL_SUM:
            report.add("no-signaling", f"setting {x} vs 0", dev)
    tr = float(np.trace(totals[0]).real)
    if abs(tr - 1.0) > TOL_SUM:
        report.add("unit-trace", "reduced state", abs(tr - 1.0))
    return report


def _validate_witness(w: StarWitness) -> ValidationReport:
    report = ValidationReport("StarWitness")
    pmd = w.pmd
    expected = set(range(pmd.settings)) - {w.x_star}
    if set(w.joints) != expected:
        report.add("keys", f"expected settings {sorted(expected)}, got {sorted(w.joints)}", float("nan"))
        return report
    if not 0 <= w.x_star < pmd.settings:
        report.add("x_star", "out of range", float("nan"))
        return report
    for x, joint in w.joints.items():
        if joint.shape != (pmd.outcomes, pmd.outcomes, pmd.dim, pmd.dim):
            report.add("shape", f"joints[{x}]", float("nan"))
            continue
        _check_psd_family(report, joint, f"joints[{x}]", TOL_PSD)
        dev_row = max(_spec_norm(m) for m in joint.sum(axis=1) - pmd.ops[x])
        if dev_row > TOL_MARGINAL:
            report.add("marginal", f"setting {x}", dev_row)
        dev_col = max(_spec_norm(m) for m in joint.sum(axis=0) - pmd.ops[w.x_star])
        if dev_col > TOL_MARGINAL:
            report.add("target-marginal", f"setting {x}", dev_col)
    return report


def _validate_decomposition(dec: UnsteerableDecomposition) -> ValidationReport:
    report = ValidationReport("UnsteerableDecomposition")
    asm = dec.assemblage
    expected = set(range(asm.settings)) - {dec.x_star}
    if set(dec.parts) != expected:
        report.add("keys", f"expected settings {sorted(expected)}, got {sorted(dec.parts)}", float("nan"))
        return report
    for x, part in dec.parts.items():
        if part.shape != (asm.outcomes, asm.outcomes, asm.dim_b, asm.dim_b):
            report.add("shape", f"parts[{x}]", float("nan"))
            continue
        _check_psd_family(report, part, f"parts[{x}]", TOL_PSD)
        dev_row = max(_spec_norm(m) for m in part.sum(axis=1) - asm.ops[x])
        if dev_row > TOL_MARGINAL:
            report.add("marginal", f"setting {x}", dev_row)
        dev_col = max(_spec_norm(m) for m in part.sum(axis=0) - asm.ops[dec.x_star])
        if dev_col > TOL_MARGINAL:
            report.add("target-marginal", f"setting {x}", dev_col)
    return report


def validate(obj) -> ValidationReport:
    """Check the defining constraints of a domain object, returning a report."""
    if isinstance(obj, Povm):
        return _validate_povm(obj)
    if isinstance(obj, Pmd):
        return _validate_pmd(obj)
    if isinstance(obj, Assemblage):
        return _validate_assemblage(obj)
    if isinstance(obj, StarWitness):
        return _validate_witness(obj)
    if isinstance(obj, UnsteerableDecomposition):
        return _validate_decomposition(obj)
    raise TypeError(f"no validator for {type(obj).__name__}")


def require_valid(obj) -> None:
    """Raise ValueError carrying the report when validate(obj) finds violations."""
    report = validate(obj)
    if not report.ok:
        raise ValueError(str(report))


def assemblage_from(pmd: Pmd, rho_ab, dim_b: int | None = None) -> Assemblage:
    """Steer an assemblage: sigma^{a|x} = Tr_A[(M^{a|x} (x) 1_B) rho_AB]."""
    rho = check_density(rho_ab)
    if dim_b is None:
        if rho.shape[0] % pmd.dim != 0:
            raise ValueError(
                f"state dimension {rho.shape[0]} is not a multiple of the device dimension {pmd.dim}"
            )
        dim_b = rho.shape[0] // pmd.dim
    if pmd.dim * dim_b != rho.shape[0]:
        raise ValueError(f"state dimension {rho.shape[0]} does not match {pmd.dim} x {dim_b}")
    eye_b = np.eye(dim_b)
    ops = np.empty((pmd.settings, pmd.outcomes, dim_b, dim_b), dtype=complex)
    for x in range(pmd.settings):
        for a in range(pmd.outcomes):
            ops[x, a] = partial_trace(kron(pmd.ops[x, a], eye_b) @ rho, pmd.dim, dim_b, keep="B")
    return Assemblage(ops)


def pauli_pmd(eta: float) -> Pmd:
    """Noisy qubit device with settings (1 +- eta sigma_i)/2 for i in x, y, z."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {eta}")
    eye = np.eye(2, dtype=complex)
    ops = np.stack(
        [
            np.stack([(eye + eta * s) / 2.0, (eye - eta * s) / 2.0])
            for s in (_PAULI["x"], _PAULI["y"], _PAULI["z"])
        ]
    )
    return Pmd(ops)


def random_pure_state(dim_a: int, dim_b: int, seed: int | None = None) -> np.ndarray:
    """A pure state on A (x) B drawn Haar-like from normalized complex Gaussians."""
    if dim_a < 1 or dim_b < 1:
        raise ValueError("local dimensions must be positive")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim_a * dim_b) + 1j * rng.standard_normal(dim_a * dim_b)
    return check_state_vector(v / np.linalg.norm(v))
