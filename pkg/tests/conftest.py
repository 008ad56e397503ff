import pytest

from fracpp.subord import RngStream

_ACCEPTANCE_LINES = []


@pytest.fixture
def stream():
    """Factory for reproducible streams: ``stream(key)``."""

    def make(key=0):
        return RngStream(20240611, key)

    return make


@pytest.fixture
def report():
    """Record one acceptance line; printed in the terminal summary."""

    def record(criterion, passed, detail):
        status = "PASS" if passed else "FAIL"
        _ACCEPTANCE_LINES.append(f"[{status}] criterion {criterion}: {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
