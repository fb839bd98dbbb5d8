from pathlib import Path

import pytest

import catgen
from catgen.corpus import LabelInventory, read_corpus

DATA = Path(catgen.__file__).resolve().parent / "data"


@pytest.fixture(scope="session")
def synthetic_inventory():
    return LabelInventory.load(DATA / "synthetic_inventory.txt")


@pytest.fixture(scope="session")
def toy20():
    return read_corpus(DATA / "toy20.pipe")


ACCEPTANCE_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_LINES] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion's outcome, print it, and fail the test if it did not hold."""
    lines = request.config.stash[ACCEPTANCE_LINES]

    def record(number, ok, detail, status=None):
        status = status or ("PASS" if ok else "FAIL")
        line = f"criterion {number:>2}: {status}  {detail}"
        lines.append((number, line))
        print(line)
        if status == "SKIP":
            pytest.skip(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
