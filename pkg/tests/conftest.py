import pytest

ACCEPTANCE_LINES = {}


@pytest.fixture
def acceptance_record():
    """Store the one-line verdict of an acceptance criterion for the summary."""

    def record(number, title, passed, detail):
        ACCEPTANCE_LINES[number] = f"[{'PASS' if passed else 'FAIL'}] {number}. {title}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
