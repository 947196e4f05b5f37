import json
from pathlib import Path

import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def oracles():
    """Reference values frozen by scripts/make_oracles.py."""
    return json.loads((DATA / "oracles.json").read_text())


@pytest.fixture(scope="session")
def spectra_dir():
    return DATA / "spectra"


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict():
    """Record one pass/fail line per acceptance criterion, printed at the end of the run."""

    def record(number: int, name: str, passed: bool, detail: str) -> bool:
        ACCEPTANCE_LINES.append(f"criterion {number:2d} [{'PASS' if passed else 'FAIL'}] {name}: {detail}")
        print(ACCEPTANCE_LINES[-1])
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
