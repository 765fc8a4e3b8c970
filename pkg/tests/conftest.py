import math

import pytest

from relcavity.modes import CavityGeometry
from relcavity.trajectories import SampleScenario

# Frozen reference values from independent mpmath evaluations (30 digits).
C12 = 2 * math.sqrt(2) / (27 * math.pi**2)


@pytest.fixture(autouse=True, scope="session")
def _isolated_cache(tmp_path_factory):
    mp = pytest.MonkeyPatch()
    mp.setenv("RELCAVITY_CACHE_DIR", str(tmp_path_factory.mktemp("coeff-cache")))
    yield
    mp.undo()


@pytest.fixture
def unit_cavity():
    return CavityGeometry(1.0)


@pytest.fixture
def sweep_geometry():
    return CavityGeometry(1.0, 1e-4)


@pytest.fixture
def peak_scenario():
    """Joint maximum of the sample scenario: tau = t = 1/3, N = 5."""
    return SampleScenario(tau=1 / 3, t=1 / 3, h=1e-4, N=5)


ACCEPTANCE_LINES: dict[int, str] = {}


def record_acceptance(number: int, passed: bool, detail: str) -> bool:
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
