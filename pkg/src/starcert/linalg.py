"""Dense complex linear algebra helpers shared by the certification stack.

Everything here works on plain numpy arrays. Operators are complex square
matrices, bipartite objects live on a tensor product with explicit local
dimensions, and pure states are flat vectors in the product basis
|i>_A |j>_B -> index i * dim_b + j.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TOL_HERM = 1e-12
TOL_PSD = 1e-8
TOL_SCHMIDT = 1e-10
TOL_UNIT = 1e-10


def dagger(m) -> np.ndarray:
    """Conjugate transpose."""
    return np.conj(np.asarray(m)).T


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite complex 2-d array."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-d, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def hermitian(m, tol: float = TOL_HERM) -> np.ndarray:
    """Return the Hermitian part (m + m^dag)/2 of a square matrix.

    Inputs whose anti-Hermitian part exceeds tol * max(1, ||m||) in
    Frobenius norm are rejected rather than silently repaired.
    """
    arr = as_matrix(m)
    if arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    dev = np.linalg.norm(arr - dagger(arr))
    if dev > tol * max(1.0, np.linalg.norm(arr)):
        raise ValueError(f"matrix is not Hermitian: anti-Hermitian norm {dev:.3e}")
    return (arr + dagger(arr)) / 2.0


def kron(a, b) -> np.ndarray:
    """Kronecker product with input checks."""
    return np.kron(as_matrix(a, "a"), as_matrix(b, "b"))


def partial_trace(m, dim_a: int, dim_b: int, keep: str) -> np.ndarray:
    """Trace out one tensor factor of an operator on A (x) B.

    Args:
        m: operator on the product space, shape (dim_a*dim_b, dim_a*dim_b).
        dim_a, dim_b: local dimensions.
        keep: "A" keeps the first factor, "B" the second.
    """
    if dim_a < 1 or dim_b < 1:
        raise ValueError("local dimensions must be positive")
    arr = as_matrix(m)
    n = dim_a * dim_b
    if arr.shape != (n, n):
        raise ValueError(f"operator shape {arr.shape} does not match dims ({dim_a},{dim_b})")
    t = arr.reshape(dim_a, dim_b, dim_a, dim_b)
    if keep in ("B", "b"):
        return np.trace(t, axis1=0, axis2=2)
    if keep in ("A", "a"):
        return np.trace(t, axis1=1, axis2=3)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def is_psd(h, tol: float = TOL_PSD) -> bool:
    """Whether a Hermitian matrix has all eigenvalues >= -tol."""
    arr = hermitian(h)
    if arr.shape[0] == 0:
        return True
    return bool(np.linalg.eigvalsh(arr)[0] >= -tol)


def check_density(rho, tol_psd: float = TOL_PSD, tol_trace: float = TOL_UNIT) -> np.ndarray:
    """Validate a density operator (Hermitian, PSD, unit trace) and return it."""
    arr = hermitian(rho)
    tr = np.trace(arr).real
    if abs(tr - 1.0) > tol_trace:
        raise ValueError(f"density operator has trace {tr!r}, expected 1")
    lo = np.linalg.eigvalsh(arr)[0]
    if lo < -tol_psd:
        raise ValueError(f"density operator has negative eigenvalue {lo:.3e}")
    return arr


def check_state_vector(psi, tol: float = TOL_UNIT) -> np.ndarray:
    """Validate a pure-state vector (finite, unit norm) and return it flattened."""
    v = np.asarray(psi, dtype=complex).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise ValueError("state vector has non-finite entries")
    nrm = np.linalg.norm(v)
    if abs(nrm - 1.0) > tol:
        raise ValueError(f"state vector has norm {nrm!r}, expected 1")
    return v


def maximally_entangled(d: int) -> np.ndarray:
    """The d-dimensional maximally entangled vector sum_i |ii> / sqrt(d)."""
    if d < 2:
        raise ValueError(f"need local dimension >= 2, got {d}")
    v = np.zeros(d * d, dtype=complex)
    v[np.arange(d) * d + np.arange(d)] = 1.0 / np.sqrt(d)
    return v


@dataclass(frozen=True)
class SchmidtDecomposition:
    """Schmidt data of a bipartite pure state.

    coefficients are non-negative and descending with sum of squares 1;
    basis_a / basis_b hold the matching orthonormal local vectors as columns.
    """

    coefficients: np.ndarray
    basis_a: np.ndarray
    basis_b: np.ndarray
    dim_a: int
    dim_b: int

    @property
    def rank(self) -> int:
        return int(np.sum(self.coefficients > TOL_SCHMIDT))

    def state(self) -> np.ndarray:
        """Reassemble the pure-state vector from the Schmidt data."""
        mat = (self.basis_a * self.coefficients) @ self.basis_b.T
        return mat.reshape(-1)


def schmidt_decompose(psi, dim_a: int, dim_b: int) -> SchmidtDecomposition:
    """Schmidt-decompose a normalized pure state on A (x) B."""
    v = check_state_vector(psi)
    if v.shape[0] != dim_a * dim_b:
        raise ValueError(f"vector length {v.shape[0]} does not match dims ({dim_a},{dim_b})")
    x = v.reshape(dim_a, dim_b)
    u, s, vh = np.linalg.svd(x)
    r = min(dim_a, dim_b)
    return SchmidtDecomposition(
        coefficients=s[:r].copy(),
        basis_a=u[:, :r].copy(),
        basis_b=vh[:r, :].T.copy(),
        dim_a=dim_a,
        dim_b=dim_b,
    )


def _canonical_member(basis: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """First vector of the canonical column-echelon basis of a subspace.

    basis holds (near-)orthonormal columns spanning the subspace. The result
    is deterministic: pivots are located row by row, so the returned vector
    concentrates weight on the lowest-index amplitudes the subspace reaches,
    with its first nonzero amplitude normalized to positive real.
    """
    b = np.array(basis, dtype=complex)
    n, k = b.shape
    col = 0
    for row in range(n):
        if col >= k:
            break
        j = col + int(np.argmax(np.abs(b[row, col:])))
        if abs(b[row, j]) <= tol:
            continue
        b[:, [col, j]] = b[:, [j, col]]
        b[:, col] = b[:, col] / b[row, col]
        for jj in range(k):
            if jj != col:
                b[:, jj] = b[:, jj] - b[row, jj] * b[:, col]
        col += 1
    vec = b[:, 0]
    vec = vec / np.linalg.norm(vec)
    nz = np.flatnonzero(np.abs(vec) > tol)
    lead = vec[nz[0]]
    vec = vec * (np.conj(lead) / abs(lead))
    return vec


def min_eigpair(h, tol: float = TOL_HERM) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue of a Hermitian matrix and a deterministic eigenvector.

    When the bottom of the spectrum is degenerate (within 1e-10 * max(1, ||h||))
    the eigenvector is the canonical echelon representative of the whole
    near-degenerate eigenspace, which makes repeated runs and reorderings of
    the input basis reproducible.
    """
    arr = hermitian(h, tol=tol)
    w, v = np.linalg.eigh(arr)
    spread = 1e-10 * max(1.0, float(np.linalg.norm(arr)))
    mask = w <= w[0] + spread
    vec = _canonical_member(v[:, mask])
    return float(w[0]), vec


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product Tr[a^dag b]."""
    return complex(np.sum(np.conj(np.asarray(a)) * np.asarray(b)))
