import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import support
from starcert.linalg import kron, maximally_entangled, partial_trace
from starcert.objects import (
    Assemblage,
    Pmd,
    Povm,
    StarWitness,
    UnsteerableDecomposition,
    assemblage_from,
    pauli_pmd,
    random_pure_state,
    require_valid,
    validate,
)

SIGMA = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def phi_density(d: int = 2) -> np.ndarray:
    psi = maximally_entangled(d)
    return np.outer(psi, psi.conj())


def test_pauli_pmd_matrices_at_half():
    pmd = pauli_pmd(0.5)
    assert (pmd.settings, pmd.outcomes, pmd.dim) == (3, 2, 2)
    for x, name in enumerate("xyz"):
        plus = (np.eye(2) + 0.5 * SIGMA[name]) / 2
        minus = (np.eye(2) - 0.5 * SIGMA[name]) / 2
        assert np.allclose(pmd.ops[x, 0], plus, atol=1e-15)
        assert np.allclose(pmd.ops[x, 1], minus, atol=1e-15)


def test_pauli_pmd_extremes():
    flat = pauli_pmd(0.0)
    for x in range(3):
        for a in range(2):
            assert np.allclose(flat.ops[x, a], np.eye(2) / 2, atol=1e-15)
    sharp = pauli_pmd(1.0)
    for x in range(3):
        for a in range(2):
            op = sharp.ops[x, a]
            # rank-1 projector
            assert np.allclose(op @ op, op, atol=1e-12)
            assert np.trace(op).real == pytest.approx(1.0, abs=1e-12)


def test_pauli_pmd_completeness_exact():
    for eta in (0.0, 0.3, 0.7071, 1.0):
        pmd = pauli_pmd(eta)
        for x in range(3):
            assert np.array_equal(pmd.ops[x].sum(axis=0), np.eye(2))


def test_pauli_pmd_range_errors():
    with pytest.raises(ValueError):
        pauli_pmd(-0.01)
    with pytest.raises(ValueError):
        pauli_pmd(1.01)


def test_assemblage_from_trivial_pmd(rng):
    # single-outcome identity measurement: the lone member is rho_B
    pmd = Pmd(np.eye(2).reshape(1, 1, 2, 2))
    rho_ab = np.kron(support.random_density(rng, 2), support.random_density(rng, 3))
    asm = assemblage_from(pmd, rho_ab, dim_b=3)
    assert np.allclose(asm.ops[0, 0], partial_trace(rho_ab, 2, 3, keep="B"), atol=1e-12)


def test_assemblage_from_pauli_z_on_phi():
    asm = assemblage_from(pauli_pmd(1.0), phi_density())
    # setting index 2 is the z axis; outcome 0 the +1 eigenvalue
    assert np.allclose(asm.ops[2, 0], np.diag([0.5, 0.0]), atol=1e-12)
    assert np.allclose(asm.ops[2, 1], np.diag([0.0, 0.5]), atol=1e-12)


def test_assemblage_from_phi_is_transpose_over_d():
    # sigma^{a|x} = M^{a|x}.T / d is forced by the maximally entangled state
    for eta in (0.4, 0.9):
        pmd = pauli_pmd(eta)
        asm = assemblage_from(pmd, phi_density())
        for x in range(3):
            for a in range(2):
                assert np.allclose(asm.ops[x, a], pmd.ops[x, a].T / 2, atol=1e-12)


def test_assemblage_from_matches_brute_oracle(rng):
    for _ in range(20):
        pmd = support.random_pmd(rng, 2, 2, 2)
        rho = support.random_density(rng, 4)
        asm = assemblage_from(pmd, rho, dim_b=2)
        want = support.brute_assemblage(pmd.ops, rho, 2)
        assert np.allclose(asm.ops, want, atol=1e-12)
        assert validate(asm).ok
        # no-signaling totals equal Tr_A rho for every setting
        for x in range(2):
            total = asm.ops[x].sum(axis=0)
            assert np.allclose(total, partial_trace(rho, 2, 2, keep="B"), atol=1e-10)


def test_assemblage_from_dimension_mismatch(rng):
    with pytest.raises(ValueError):
        assemblage_from(pauli_pmd(0.5), support.random_density(rng, 6), dim_b=2)


def test_pauli_reduced_state_is_maximally_mixed():
    for eta in np.linspace(0.0, 1.0, 11):
        asm = assemblage_from(pauli_pmd(float(eta)), phi_density())
        assert np.allclose(asm.reduced(), np.eye(2) / 2, atol=1e-10)


def test_random_pure_state_contract():
    a = random_pure_state(2, 3, seed=7)
    b = random_pure_state(2, 3, seed=7)
    assert np.array_equal(a, b)
    for seed in range(100):
        v = random_pure_state(2, 2, seed=seed)
        assert abs(np.linalg.norm(v) - 1) < 1e-12


def test_random_pure_state_marginal_monte_carlo():
    d = 2
    acc = np.zeros((d, d), dtype=complex)
    for seed in range(10_000):
        v = random_pure_state(d, d, seed=seed)
        acc += partial_trace(np.outer(v, v.conj()), d, d, keep="A")
    assert np.max(np.abs(acc / 10_000 - np.eye(d) / d)) < 0.02


def test_validate_povm_completeness_magnitude():
    report = validate(Povm(np.array([np.eye(2), np.eye(2)])))
    assert not report.ok
    [violation] = [v for v in report.violations if "completeness" in v.check]
    assert violation.magnitude == pytest.approx(1.0, abs=1e-12)


def test_validate_assemblage_psd_magnitude():
    asm_ops = support.brute_assemblage(pauli_pmd(0.5).ops, phi_density(), 2)
    asm_ops[0, 0] = np.diag([1.0, -0.1])
    report = validate(Assemblage(asm_ops))
    psd = [v for v in report.violations if "psd" in v.check.lower()]
    assert psd and psd[0].magnitude == pytest.approx(0.1, abs=1e-9)


def test_validate_clean_for_pauli():
    assert validate(pauli_pmd(0.5)).ok
    require_valid(pauli_pmd(0.5))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000),
       n=st.integers(1, 3), m=st.integers(2, 3), d=st.integers(2, 3))
def test_random_pmd_assemblage_validates(seed, n, m, d):
    r = np.random.default_rng(seed)
    pmd = support.random_pmd(r, n, m, d)
    assert validate(pmd).ok
    rho = support.random_density(r, d * d)
    asm = assemblage_from(pmd, rho, dim_b=d)
    assert validate(asm).ok


def test_pmd_padding_equalizes_outcomes():
    a = Povm(np.array([np.eye(2)]))
    b = Povm(np.array([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]))
    pmd = Pmd.from_povms([a, b])
    assert pmd.outcomes == 2
    assert np.array_equal(pmd.ops[0, 1], np.zeros((2, 2)))
    assert validate(pmd).ok


def _replicated_witness():
    # identical settings: J^{ab|x} = delta_{ab} M^{a|x} satisfies Definition 1
    base = pauli_pmd(0.8).ops[2]
    pmd = Pmd(np.array([base, base, base]))
    joints = {}
    for x in (1, 2):
        j = np.zeros((2, 2, 2, 2), dtype=complex)
        for a in range(2):
            j[a, a] = base[a]
        joints[x] = j
    return pmd, joints


def test_replicated_setting_witness_validates():
    pmd, joints = _replicated_witness()
    assert validate(StarWitness(pmd, 0, joints)).ok


def test_star_witness_marginal_violation_magnitude():
    pmd, joints = _replicated_witness()
    bump = 1e-3 * np.diag([1.0, -1.0])
    joints[1] = joints[1].copy()
    joints[1][0, 0] = joints[1][0, 0] + bump
    report = validate(StarWitness(pmd, 0, joints))
    kinds = {v.check: v.magnitude for v in report.violations}
    assert kinds.get("marginal") == pytest.approx(1e-3, rel=1e-9)
    assert kinds.get("target-marginal") == pytest.approx(1e-3, rel=1e-9)


def test_star_witness_rejects_non_hermitian_joints():
    pmd, joints = _replicated_witness()
    joints[1] = joints[1].copy()
    joints[1][0, 1] = np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(ValueError):
        StarWitness(pmd, 0, joints)


def test_unsteerable_decomposition_checks():
    base = pauli_pmd(0.8).ops[2]
    pmd = Pmd(np.array([base, base]))
    asm = assemblage_from(pmd, phi_density())
    parts = {}
    p = np.zeros((2, 2, 2, 2), dtype=complex)
    for a in range(2):
        p[a, a] = asm.ops[1, a]
    parts[1] = p
    assert validate(UnsteerableDecomposition(asm, 0, parts)).ok
    bad = {1: p.copy()}
    bad[1][0, 0] = bad[1][0, 0] + 1e-3 * np.diag([1.0, -1.0])
    report = validate(UnsteerableDecomposition(asm, 0, bad))
    assert {"marginal", "target-marginal"} <= {v.check for v in report.violations}
    missing = validate(UnsteerableDecomposition(asm, 0, {}))
    assert any(v.check == "keys" for v in missing.violations)
