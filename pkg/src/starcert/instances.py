"""File formats for devices, assemblages, and shared states.

Instances are JSON: every complex entry is a two-element array [re, im], so
files stay language-neutral and diff-friendly. Floats serialize through
Python's repr, which round-trips bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

import numpy as np

from .linalg import check_density, check_state_vector, partial_trace
from .objects import Assemblage, Pmd, StarWitness, UnsteerableDecomposition, validate


class InstanceError(ValueError):
    """A file failed to parse into a validate-clean object."""


@dataclass(frozen=True)
class SharedState:
    """Bipartite state loaded from a file, kept with its dimension split."""

    dim_a: int
    dim_b: int
    rho: np.ndarray

    def reduced_a(self) -> np.ndarray:
        return partial_trace(self.rho, self.dim_a, self.dim_b, keep="A")


def _complex_entry(node, where: str) -> complex:
    if (
        not isinstance(node, (list, tuple))
        or len(node) != 2
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in node)
    ):
        raise InstanceError(f"{where}: entries must be [re, im] pairs, got {node!r}")
    return complex(node[0], node[1])


def _matrix_from_json(node, where: str) -> np.ndarray:
    if not isinstance(node, list) or not node:
        raise InstanceError(f"{where}: expected a non-empty list of rows")
    width = None
    rows = []
    for i, row in enumerate(node):
        if not isinstance(row, list) or not row:
            raise InstanceError(f"{where}, row {i}: expected a non-empty list")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise InstanceError(f"{where}, row {i}: length {len(row)} != {width}")
        rows.append([_complex_entry(v, f"{where}[{i}][{j}]") for j, v in enumerate(row)])
    return np.array(rows, dtype=complex)


def _matrix_to_json(m) -> list:
    arr = np.asarray(m, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in arr]


def _vector_from_json(node, where: str) -> np.ndarray:
    if not isinstance(node, list) or not node:
        raise InstanceError(f"{where}: expected a non-empty list")
    return np.array([_complex_entry(v, f"{where}[{i}]") for i, v in enumerate(node)])


def _require_count(doc: dict, key: str, where: str) -> int:
    value = doc.get(key)
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise InstanceError(f"{where}: field '{key}' must be a positive integer")
    return value


def _operator_table(doc, list_key: str, ops_key: str, dim: int, outcomes: int, where: str):
    groups = doc.get(list_key)
    if not isinstance(groups, list) or not groups:
        raise InstanceError(f"{where}: field '{list_key}' must be a non-empty list")
    table = []
    for k, group in enumerate(groups):
        if not isinstance(group, dict):
            raise InstanceError(f"{where}: {list_key}[{k}] must be an object")
        mats = group.get(ops_key)
        if not isinstance(mats, list) or len(mats) != outcomes:
            raise InstanceError(
                f"{where}: {list_key}[{k}].{ops_key} must list {outcomes} matrices"
            )
        ops = []
        for a, mat in enumerate(mats):
            m = _matrix_from_json(mat, f"{where}: {list_key}[{k}].{ops_key}[{a}]")
            if m.shape != (dim, dim):
                raise InstanceError(
                    f"{where}: {list_key}[{k}].{ops_key}[{a}] has shape {m.shape}, "
                    f"expected {(dim, dim)}"
                )
            ops.append(m)
        table.append(ops)
    return np.array(table)


KIND_OF = {"Pmd": "pmd", "Assemblage": "assemblage", "SharedState": "state"}


def _validated(obj, where: str):
    report = validate(obj)
    if not report.ok:
        raise InstanceError(f"{where}: {report}")
    return obj


def load_instance(path) -> Pmd | Assemblage | SharedState:
    """Parse and validate one instance file; raises InstanceError on any defect."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InstanceError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise InstanceError(f"{path}: top level must be an object")
    kind = doc.get("kind")
    if kind == "pmd":
        dim = _require_count(doc, "dim", str(path))
        outcomes = _require_count(doc, "outcomes", str(path))
        ops = _operator_table(doc, "settings", "elements", dim, outcomes, str(path))
        try:
            pmd = Pmd(ops)
        except ValueError as exc:
            raise InstanceError(f"{path}: {exc}") from exc
        return _validated(pmd, str(path))
    if kind == "assemblage":
        dim = _require_count(doc, "dim_b", str(path))
        outcomes = _require_count(doc, "outcomes", str(path))
        ops = _operator_table(doc, "settings", "members", dim, outcomes, str(path))
        try:
            asm = Assemblage(ops)
        except ValueError as exc:
            raise InstanceError(f"{path}: {exc}") from exc
        return _validated(asm, str(path))
    if kind == "state":
        dim_a = _require_count(doc, "dim_a", str(path))
        dim_b = _require_count(doc, "dim_b", str(path))
        if "amplitudes" in doc:
            amps = _vector_from_json(doc["amplitudes"], f"{path}: amplitudes")
            if amps.size != dim_a * dim_b:
                raise InstanceError(
                    f"{path}: amplitudes length {amps.size} != dim_a*dim_b = {dim_a * dim_b}"
                )
            try:
                check_state_vector(amps)
            except ValueError as exc:
                raise InstanceError(f"{path}: {exc}") from exc
            rho = np.outer(amps, amps.conj())
        elif "matrix" in doc:
            m = _matrix_from_json(doc["matrix"], f"{path}: matrix")
            if m.shape != (dim_a * dim_b, dim_a * dim_b):
                raise InstanceError(
                    f"{path}: matrix has shape {m.shape}, expected "
                    f"{(dim_a * dim_b, dim_a * dim_b)}"
                )
            try:
                rho = check_density(m)
            except ValueError as exc:
                raise InstanceError(f"{path}: {exc}") from exc
        else:
            raise InstanceError(f"{path}: state needs 'amplitudes' or 'matrix'")
        return SharedState(dim_a, dim_b, rho)
    raise InstanceError(f"{path}: unknown kind {kind!r}")


def instance_to_json(obj, description: str | None = None, source: str | None = None) -> dict:
    """In-memory object to the JSON document structure of an instance file."""
    doc: dict[str, Any]
    if isinstance(obj, Pmd):
        doc = {
            "kind": "pmd",
            "dim": obj.dim,
            "outcomes": obj.outcomes,
            "settings": [
                {"label": str(x + 1), "elements": [_matrix_to_json(op) for op in obj.ops[x]]}
                for x in range(obj.settings)
            ],
        }
    elif isinstance(obj, Assemblage):
        doc = {
            "kind": "assemblage",
            "dim_b": obj.dim_b,
            "outcomes": obj.outcomes,
            "settings": [
                {"label": str(x + 1), "members": [_matrix_to_json(op) for op in obj.ops[x]]}
                for x in range(obj.settings)
            ],
        }
    elif isinstance(obj, SharedState):
        doc = {
            "kind": "state",
            "dim_a": obj.dim_a,
            "dim_b": obj.dim_b,
            "matrix": _matrix_to_json(obj.rho),
        }
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__} as an instance file")
    if description is not None:
        doc["description"] = description
    if source is not None:
        doc["source"] = source
    return doc


def save_instance(obj, path, description: str | None = None, source: str | None = None):
    doc = instance_to_json(obj, description=description, source=source)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def pure_state_to_json(amplitudes, dim_a: int, dim_b: int) -> dict:
    """State document in amplitude form (keeps purity explicit in the file)."""
    amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
    if amps.size != dim_a * dim_b:
        raise ValueError(f"amplitudes length {amps.size} != {dim_a * dim_b}")
    return {
        "kind": "state",
        "dim_a": dim_a,
        "dim_b": dim_b,
        "amplitudes": [[float(v.real), float(v.imag)] for v in amps],
    }


def witness_to_json(witness: StarWitness) -> dict:
    return {
        "kind": "star_witness",
        "x_star": witness.x_star,
        "dim": witness.pmd.dim,
        "outcomes": witness.pmd.outcomes,
        "joints": {
            str(x): [[_matrix_to_json(joint[a, b]) for b in range(joint.shape[1])]
                     for a in range(joint.shape[0])]
            for x, joint in sorted(witness.joints.items())
        },
    }


def decomposition_to_json(dec: UnsteerableDecomposition) -> dict:
    return {
        "kind": "unsteerable_decomposition",
        "x_star": dec.x_star,
        "dim_b": dec.assemblage.dim_b,
        "outcomes": dec.assemblage.outcomes,
        "parts": {
            str(x): [[_matrix_to_json(part[a, b]) for b in range(part.shape[1])]
                     for a in range(part.shape[0])]
            for x, part in sorted(dec.parts.items())
        },
    }
