import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_pair(rng, d, k, integer=False, zeros=None):
    """Random (lambda, a) with at most k zero eigenvalues."""
    if integer:
        lam = rng.integers(0, 12, d).astype(float)
        a = rng.integers(1, 9, k).astype(float)
    else:
        lam = rng.exponential(2.0, d) * (rng.random(d) < 0.8)
        a = rng.exponential(1.5, k) + 0.05
    if zeros is not None:
        lam[:zeros] = 0.0
    nz = np.nonzero(lam == 0)[0]
    if nz.size > k:
        lam[nz[k:]] = 1.0
    return lam, a


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "SUMMARY", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
