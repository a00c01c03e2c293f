import pytest

CRITERIA: list[str] = []


def record(line: str) -> None:
    CRITERIA.append(line)
    print(line)


@pytest.fixture
def criterion():
    return record


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA:
            terminalreporter.write_line(line)
