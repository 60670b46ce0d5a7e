import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hyperjac.curvegeom import make_curve
from hyperjac.jacobian import riemann_constants
from hyperjac.periods import compute_periods

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture]
)
settings.load_profile("default")

G3 = [-3, -2, -1, 0.5, 1, 2.5, 3, 4.2]
G4 = [-4, -3, -2, -1, 0.5, 1, 2.5, 3, 4.2, 5.1]


def random_curve(rng, g, min_sep=0.5):
    """Branch points increasing in real part with separation at least ``min_sep``."""
    while True:
        re = np.cumsum(rng.uniform(min_sep, 2.0, 2 * g + 2))
        im = rng.uniform(-1.0, 1.0, 2 * g + 2)
        bp = re - re.mean() + 1j * im
        d = np.abs(bp[:, None] - bp[None, :]) + np.eye(len(bp)) * 1e9
        if d.min() >= min_sep:
            return make_curve(bp)


@pytest.fixture(scope="session")
def curve3():
    return make_curve(G3)


@pytest.fixture(scope="session")
def periods3(curve3):
    return compute_periods(curve3)


@pytest.fixture(scope="session")
def K3(curve3, periods3):
    return riemann_constants(curve3, periods3)[0]


@pytest.fixture(scope="session")
def curve4():
    return make_curve(G4)


@pytest.fixture(scope="session")
def periods4(curve4):
    return compute_periods(curve4)


@pytest.fixture(scope="session")
def K4(curve4, periods4):
    return riemann_constants(curve4, periods4)[0]


@pytest.fixture(scope="session")
def curve2():
    return make_curve([-3, -2, -1, 0.5, 1, 2.5])


@pytest.fixture(scope="session")
def periods2(curve2):
    return compute_periods(curve2)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
