import numpy as np
import pytest

from nlscatter import (
    Coefficient,
    NonlinearitySpec,
    PowerTerm,
    ScatteringConfig,
    make_grid,
    sample_gaussian,
)


@pytest.fixture(scope="session")
def grid1d():
    """Acceptance grid for propagator checks (d=1, L=40, N=4096)."""
    return make_grid(1, 40.0, 4096)


@pytest.fixture(scope="session")
def solver_grid():
    """Wide grid holding the free spread |t| <= 50 of unit-scale data."""
    return make_grid(1, 512.0, 4096)


@pytest.fixture(scope="session")
def psi(grid1d):
    return sample_gaussian(grid1d)


@pytest.fixture(scope="session")
def quintic_1d():
    """F = |u|^4 u in d = 1 (the mass-critical power p0 = 4)."""
    return NonlinearitySpec(1, (PowerTerm(4.0, Coefficient("constant", 1.0)),))


@pytest.fixture(scope="session")
def free_1d():
    """F identically zero (zero coefficient)."""
    return NonlinearitySpec(1, (PowerTerm(4.0, Coefficient("constant", 0.0)),))


@pytest.fixture(scope="session")
def mixture_1d():
    return NonlinearitySpec(
        1,
        (
            PowerTerm(4.0, Coefficient("constant", 1.0)),
            PowerTerm(6.0, Coefficient("constant", 1.0)),
        ),
    )


@pytest.fixture(scope="session")
def scat_cfg(solver_grid):
    return ScatteringConfig(horizon=50.0, dt=0.02, grid=solver_grid, amplitude_cap=0.5)
