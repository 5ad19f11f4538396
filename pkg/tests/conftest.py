"""Shared test fixtures.

Acceptance tests report through the `criterion` fixture so the terminal
summary ends with one pass/fail line per criterion regardless of pytest's
ordering or -k selection.
"""
import pytest

CRITERION_RESULTS = []


@pytest.fixture
def criterion():
    """Record (number, ok, detail) for the summary, then assert."""

    def check(num: int, ok: bool, detail: str) -> None:
        CRITERION_RESULTS.append((num, bool(ok), detail))
        assert ok, f"criterion {num}: {detail}"

    return check


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not CRITERION_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(CRITERION_RESULTS):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {num}: {status} - {detail}")
