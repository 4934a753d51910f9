import pytest
from hypothesis import settings

from helpers import load, load_family

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def pi1():
    return load("prologue_pi1.gm")


@pytest.fixture(scope="session")
def prologue_family():
    return load_family("prologue.json")


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import LINES
    if LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(LINES):
            terminalreporter.write_line(LINES[n])
