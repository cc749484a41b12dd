import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(autouse=True)
def isolated_cache(tmp_path, monkeypatch):
    # keep the result cache out of the working tree
    monkeypatch.setenv("TENSIONLAB_CACHE", str(tmp_path / "cache"))


# one line per acceptance criterion, filled in by test_acceptance.report
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
