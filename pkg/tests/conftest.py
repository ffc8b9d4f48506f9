"""Collects the one-line verdicts of the acceptance criteria for the summary."""

import pytest

CRITERIA: dict[int, str] = {}


@pytest.fixture
def verdict(capsys):
    def record(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}"
        CRITERIA[number] = line
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for number in sorted(CRITERIA):
            terminalreporter.write_line(CRITERIA[number])
