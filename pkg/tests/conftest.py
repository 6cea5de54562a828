from pathlib import Path

import pytest

from speqwl.io import load_tudataset

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def mutag():
    return load_tudataset(DATA / "MUTAG", "MUTAG")


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one acceptance line; returns the verdict so callers can assert on it."""

    def record(criterion: str, passed: bool, detail: str, status: str | None = None) -> bool:
        verdict = status or ("PASS" if passed else "FAIL")
        line = f"criterion {criterion}: {verdict}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
