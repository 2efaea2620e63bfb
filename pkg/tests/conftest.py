import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import pytest

ACCEPTANCE: list[str] = []


@pytest.fixture
def report():
    """Record and print one PASS/FAIL line per acceptance criterion, then assert it."""

    def _report(criterion: str, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'} [{criterion}] {detail}"
        ACCEPTANCE.append(line)
        print(line)
        assert ok, line

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
