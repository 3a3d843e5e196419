import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fockband import ChannelAnalysis, preset
from fockband.fy import FYSolver

settings.register_profile(
    "fockband", deadline=None, max_examples=50, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("fockband")


@pytest.fixture(scope="session")
def sym8():
    return preset("symmetric", n=8)


@pytest.fixture(scope="session")
def sym6():
    return preset("symmetric", n=6)


@pytest.fixture(scope="session")
def ch8(sym8):
    return ChannelAnalysis(sym8)


@pytest.fixture(scope="session")
def fy8(sym8, ch8):
    return FYSolver(sym8, ch8)


@pytest.fixture(scope="session")
def gap8():
    return preset("gap", n=8)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)



def pytest_terminal_summary(terminalreporter):
    import sys

    mod = next((m for k, m in sys.modules.items() if k.endswith("test_acceptance")), None)
    results = getattr(mod, "RESULTS", {})
    if results:
        terminalreporter.section("acceptance checks")
        for k in sorted(results):
            terminalreporter.write_line(results[k].line())
