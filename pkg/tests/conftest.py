import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from levy_domains import FiniteAtomic, Triplet

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def atomic_mu():
    nu = FiniteAtomic(np.array([[1.0], [-2.0], [0.5]]), np.array([0.5, 0.3, 1.2]))
    return Triplet(np.array([[2.0]]), nu, np.array([0.4]))


@pytest.fixture(scope="session")
def bm_drift():
    """Brownian motion with drift 1."""
    return Triplet(np.eye(1), FiniteAtomic.zero(1), np.array([1.0]))


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    results = getattr(mod, "RESULTS", {})
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
