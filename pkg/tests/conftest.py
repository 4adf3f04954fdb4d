import pytest

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def record_acceptance():
    def _record(index: int, line: str) -> None:
        ACCEPTANCE_LINES[index] = line
        print(line)

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
