import os

import pytest
from hypothesis import HealthCheck, settings

from bregquant import distribution as ds
from bregquant import divergence as dv

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def tn01():
    """N(0, 1) conditioned on its central 1 - 1e-12 mass."""
    return ds.truncate_support(ds.gaussian(0.0, 1.0), 1e-12)


@pytest.fixture(scope="session")
def softplus1():
    return dv.softplus(1.0)


def pytest_terminal_summary(terminalreporter):
    import acceptance_log

    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(acceptance_log.LINES):
            terminalreporter.write_line(acceptance_log.LINES[k])
