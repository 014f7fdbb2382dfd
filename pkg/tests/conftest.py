import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "lerchkit",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("lerchkit")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_params(rng, n, z=(0.05, 0.9), s=(-6.0, 6.0), v=(0.2, 8.0)):
    """``n`` parameter triples drawn uniformly from the given boxes."""
    return [
        (float(rng.uniform(*z)), float(rng.uniform(*s)), float(rng.uniform(*v)))
        for _ in range(n)
    ]


_VERDICTS = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for an acceptance criterion."""

    def record(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        print(line)
        _VERDICTS.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
