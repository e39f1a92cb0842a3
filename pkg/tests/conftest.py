import numpy as np
import pytest

from starcert import SeesawConfig, pauli_pmd, run_eta_sweep


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def full_sweep():
    """The default visibility sweep, shared by the acceptance criteria.

    One run covers the compatible side, the incompatible side, and the
    bound check, so the ten-minute budget is paid once.
    """
    rows = run_eta_sweep(x_star=0, config=SeesawConfig())
    assert len(rows) == 36
    return rows


@pytest.fixture(scope="session")
def pauli_cache():
    return {eta: pauli_pmd(eta) for eta in (0.0, 0.5, 0.65, 0.70, 0.72, 0.8, 0.9, 1.0)}
