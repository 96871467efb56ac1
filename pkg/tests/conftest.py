import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from netkat_safecheck.parser import parse_problem

FIXTURES = Path(__file__).parent / "fixtures"

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def load_fixture(name):
    return parse_problem((FIXTURES / name).read_text())


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def fig3_a():
    return load_fixture("fig3_p1p2_in1.nk")


@pytest.fixture
def fig3_b():
    return load_fixture("fig3_p1p2_in3.nk")


@pytest.fixture
def firewall():
    return load_fixture("firewall.nk")


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for num in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[num])
