import pytest

from merid.constants import DEFAULTS

# Filled by test_acceptance.py: (number, passed, detail)
ACCEPTANCE_LINES: list[tuple[int, bool, str]] = []


@pytest.fixture
def params():
    return DEFAULTS


@pytest.fixture
def sphere100():
    return DEFAULTS.sphere(50e-9)


@pytest.fixture
def trap():
    return DEFAULTS.trap()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
