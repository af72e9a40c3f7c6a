import pytest

ACCEPTANCE_RESULTS = []


@pytest.fixture
def acceptance_log():
    """Collects one ``(criterion, passed, detail)`` line per acceptance check."""

    def record(criterion, passed, detail):
        ACCEPTANCE_RESULTS.append((criterion, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in sorted(ACCEPTANCE_RESULTS, key=lambda r: r[0]):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {criterion}: {detail}")
