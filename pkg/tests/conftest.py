from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dehnlab.freegroup import build_presentation  # noqa: E402


@pytest.fixture(scope="session")
def z2():
    return build_presentation(2, ["abAB"])


@pytest.fixture(scope="session")
def z3():
    return build_presentation(1, ["aaa"])


@pytest.fixture(scope="session")
def free2():
    return build_presentation(2, [])


def pytest_terminal_summary(terminalreporter):
    import acceptance_log

    rows = acceptance_log.lines()
    if rows:
        terminalreporter.section("acceptance criteria")
        for line in rows:
            terminalreporter.write_line(line)
