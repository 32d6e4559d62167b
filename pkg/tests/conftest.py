import pytest

from betadyn.precision_core import make_beta

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def two():
    return make_beta("dec:2")


@pytest.fixture(scope="session")
def golden():
    return make_beta("golden")


@pytest.fixture(scope="session")
def tribonacci():
    return make_beta("tribonacci")


@pytest.fixture(scope="session")
def two_and_half():
    return make_beta("dec:2.5")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
