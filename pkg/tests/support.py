"""Independently coded oracles the tests compare the library against.

Everything here is written from the definitions, without reusing library
internals: brute-force index loops for tensor algebra, scipy LPs for the
diagonal (commuting) special cases, and simple rejection samplers for
structured random instances.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from starcert.objects import Assemblage, Pmd


def brute_kron(a, b) -> np.ndarray:
    a = np.asarray(a)
    b = np.asarray(b)
    ra, ca = a.shape
    rb, cb = b.shape
    out = np.zeros((ra * rb, ca * cb), dtype=complex)
    for i in range(ra):
        for j in range(ca):
            for k in range(rb):
                for l in range(cb):
                    out[i * rb + k, j * cb + l] = a[i, j] * b[k, l]
    return out


def brute_partial_trace(m, dim_a: int, dim_b: int, keep: str) -> np.ndarray:
    m = np.asarray(m)
    if keep == "A":
        out = np.zeros((dim_a, dim_a), dtype=complex)
        for i in range(dim_a):
            for j in range(dim_a):
                for k in range(dim_b):
                    out[i, j] += m[i * dim_b + k, j * dim_b + k]
        return out
    out = np.zeros((dim_b, dim_b), dtype=complex)
    for k in range(dim_b):
        for l in range(dim_b):
            for i in range(dim_a):
                out[k, l] += m[i * dim_b + k, i * dim_b + l]
    return out


def brute_assemblage(pmd_ops, rho_ab, dim_b: int) -> np.ndarray:
    """Direct evaluation of sigma^{a|x} = Tr_A[(M^{a|x} (x) 1_B) rho_AB]."""
    n, m, d, _ = pmd_ops.shape
    out = np.zeros((n, m, dim_b, dim_b), dtype=complex)
    eye_b = np.eye(dim_b)
    for x in range(n):
        for a in range(m):
            big = brute_kron(pmd_ops[x, a], eye_b) @ rho_ab
            out[x, a] = brute_partial_trace(big, d, dim_b, keep="B")
    return out


def random_hermitian(rng, d: int, scale: float = 1.0) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (g + g.conj().T) / 2


def random_unitary(rng, d: int) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_povm(rng, d: int, outcomes: int) -> np.ndarray:
    """Generic full-rank POVM: conjugate random PSD atoms by S^{-1/2}."""
    atoms = []
    for _ in range(outcomes):
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        atoms.append(g @ g.conj().T)
    total = sum(atoms)
    w, v = np.linalg.eigh(total)
    inv_sqrt = v @ np.diag(1.0 / np.sqrt(w)) @ v.conj().T
    return np.array([inv_sqrt @ a @ inv_sqrt for a in atoms])


def random_pmd(rng, settings: int, outcomes: int, d: int) -> Pmd:
    return Pmd(np.array([random_povm(rng, d, outcomes) for _ in range(settings)]))


def projective_pmd(rng, settings: int, d: int) -> Pmd:
    """Sharp settings (random orthonormal bases); typically far from compatible."""
    ops = np.zeros((settings, d, d, d), dtype=complex)
    for x in range(settings):
        u = random_unitary(rng, d)
        for a in range(d):
            ops[x, a] = np.outer(u[:, a], u[:, a].conj())
    return Pmd(ops)


def postprocessed_pmd(rng, settings: int, outcomes: int, d: int) -> Pmd:
    """All settings are classical post-processings of one parent POVM.

    Such a device is jointly measurable, hence star-compatible for every
    target: J^{a a*|x} = sum_t p(a|t,x) p(a*|t,x*) T_t works.
    """
    parent = random_povm(rng, d, outcomes + 1)
    ops = np.zeros((settings, outcomes, d, d), dtype=complex)
    for x in range(settings):
        cond = rng.dirichlet(np.ones(outcomes), size=outcomes + 1)
        for t in range(outcomes + 1):
            for a in range(outcomes):
                ops[x, a] += cond[t, a] * parent[t]
    return Pmd(ops)


def random_density(rng, d: int) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_full_rank_pure(rng, d: int) -> np.ndarray:
    """Pure bipartite d x d state with all Schmidt coefficients bounded away
    from the rank cut."""
    while True:
        psi = rng.normal(size=d * d) + 1j * rng.normal(size=d * d)
        psi = psi / np.linalg.norm(psi)
        c = np.linalg.svd(psi.reshape(d, d), compute_uv=False)
        if c[-1] > 1e-3:
            return psi


def diagonal_pmd(rng, settings: int, outcomes: int, d: int) -> Pmd:
    """Commuting device: every element diagonal in the computational basis."""
    ops = np.zeros((settings, outcomes, d, d), dtype=complex)
    for x in range(settings):
        for j in range(d):
            p = rng.dirichlet(np.ones(outcomes))
            for a in range(outcomes):
                ops[x, a, j, j] = p[a]
    return Pmd(ops)


def diagonal_assemblage(rng, settings: int, outcomes: int, d: int) -> Assemblage:
    weights = rng.dirichlet(np.ones(d))
    ops = np.zeros((settings, outcomes, d, d), dtype=complex)
    for x in range(settings):
        for j in range(d):
            p = rng.dirichlet(np.ones(outcomes))
            for a in range(outcomes):
                ops[x, a, j, j] = p[a] * weights[j]
    return Assemblage(ops)


def lp_guessing_diagonal(data: np.ndarray, x_star: int, obj_diag: np.ndarray) -> float:
    """LP value of the guessing program when all data matrices are diagonal.

    A pinching argument makes the diagonal restriction lossless: the optimal
    tau can be taken diagonal, so the SDP collapses to this LP. obj_diag is
    the diagonal of the objective operator (identity for assemblages, rho_A
    for devices).
    """
    n, m, d, _ = data.shape

    def idx(x, a, e, j):
        return ((x * m + a) * m + e) * d + j

    nvar = n * m * m * d
    c = np.zeros(nvar)
    for e in range(m):
        for j in range(d):
            c[idx(x_star, e, e, j)] = -obj_diag[j]

    rows = []
    rhs = []
    for x in range(n):
        for a in range(m):
            for j in range(d):
                row = np.zeros(nvar)
                for e in range(m):
                    row[idx(x, a, e, j)] = 1.0
                rows.append(row)
                rhs.append(data[x, a, j, j].real)
    for x in range(n):
        if x == x_star:
            continue
        for e in range(m):
            for j in range(d):
                row = np.zeros(nvar)
                for a in range(m):
                    row[idx(x, a, e, j)] = 1.0
                    row[idx(x_star, a, e, j)] -= 1.0
                rows.append(row)
                rhs.append(0.0)

    res = linprog(c, A_eq=np.array(rows), b_eq=np.array(rhs),
                  bounds=(0, None), method="highs")
    assert res.status == 0, res.message
    return -res.fun


def lp_star_compatible_diagonal(pmd: Pmd, x_star: int) -> bool:
    """Feasibility search for joints of a commuting device, entry by entry."""
    n, m, d = pmd.settings, pmd.outcomes, pmd.dim
    for x in range(n):
        if x == x_star:
            continue
        for j in range(d):
            # joint q(a, a*) >= 0 with the two prescribed marginals
            nvar = m * m
            rows = []
            rhs = []
            for a in range(m):
                row = np.zeros(nvar)
                row[a * m:(a + 1) * m] = 1.0
                rows.append(row)
                rhs.append(pmd.ops[x, a, j, j].real)
            for b in range(m):
                row = np.zeros(nvar)
                row[b::m] = 1.0
                rows.append(row)
                rhs.append(pmd.ops[x_star, b, j, j].real)
            res = linprog(np.zeros(nvar), A_eq=np.array(rows), b_eq=np.array(rhs),
                          bounds=(0, None), method="highs")
            if res.status != 0:
                return False
    return True
