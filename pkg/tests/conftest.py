import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def random_matrix(seed, rows, cols, kind="normal"):
    rng = np.random.default_rng(seed)
    if kind == "sign":
        return rng.choice([-1.0, 1.0], size=(rows, cols))
    if kind == "uniform":
        return rng.uniform(-1.0, 1.0, size=(rows, cols))
    return rng.standard_normal((rows, cols))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
