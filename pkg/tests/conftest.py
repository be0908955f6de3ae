import pytest

from sisresilience._accel import HAVE_NUMBA
from sisresilience.topology import LatticeSpec, build_lattice

BACKENDS = ["numpy"] + (["numba"] if HAVE_NUMBA else [])

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def lattice100():
    return build_lattice(LatticeSpec(100, 100, "periodic"))


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
