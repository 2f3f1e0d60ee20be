import numpy as np
import pytest

from polartomo import acceptance, io

# Published entries, typed in independently of the shipped fixture.
RHO3D_RE = np.array([
    [0.3261, -0.0096, -0.0101, 0.1038],
    [-0.0096, 0.1739, 0.0009, 0.0101],
    [-0.0101, 0.0009, 0.1953, 0.0105],
    [0.1038, 0.0101, 0.0105, 0.3047],
])
RHO3D_IM = np.array([
    [0, -0.0135, 0.0166, 0.0002],
    [0.0135, 0, -0.0235, -0.0166],
    [-0.0166, 0.0235, 0, 0.0202],
    [-0.0002, 0.0166, -0.0202, 0],
])
RHO3D = RHO3D_RE + 1j * RHO3D_IM


@pytest.fixture
def rng():
    return np.random.default_rng(20061)


@pytest.fixture(scope="session")
def rho3d():
    return io.load_rho3d()


@pytest.fixture(scope="session")
def table1():
    return io.load_table1()


@pytest.fixture(scope="session")
def fixture_run():
    """Full-size seeded run shared by the acceptance and Monte-Carlo tests."""
    return acceptance.FixtureRun(seed=1)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
