import pytest

from twoguide import units
from twoguide.eigensolver import Grid1D, PotentialSpec, solve_modes

# calibrated default: m = 1.5e-36 kg, a = 10 um, T = 80 ps
DEFAULT_MASS = units.kg_to_internal(1.5e-36)
DEFAULT_W0 = units.rad_per_s_to_internal(3.255051e12)

ACCEPTANCE = []


@pytest.fixture(scope="session")
def default_grid():
    return Grid1D.symmetric(40001, 40.0)


@pytest.fixture(scope="session")
def default_pot():
    return PotentialSpec(DEFAULT_MASS, 10.0, DEFAULT_W0)


@pytest.fixture(scope="session")
def modes(default_grid, default_pot):
    return solve_modes(default_grid, default_pot)


@pytest.fixture(scope="session")
def coarse_modes(default_pot):
    return solve_modes(Grid1D.symmetric(4001, 40.0), default_pot)


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, ok, text in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {text}")
