import os

import pytest
from hypothesis import HealthCheck, settings

from bianchi_pgt.geodesics import enumerate_classes

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# covolume of PSL(2, Z[i]) acting on hyperbolic 3-space
PICARD_VOLUME = 0.30532186472


@pytest.fixture(scope="session")
def ledger30():
    return enumerate_classes(1, 30.0)


@pytest.fixture(scope="session")
def ledger100():
    return enumerate_classes(1, 100.0)


@pytest.fixture(scope="session")
def ledger_big():
    """The saturated X = 10^4 Picard ledger (about two minutes)."""
    return enumerate_classes(1, 1.0e4)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import REPORT  # noqa: PLC0415

    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in REPORT:
            terminalreporter.write_line(line)
