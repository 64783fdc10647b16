from __future__ import annotations

import mpmath
import pytest
from hypothesis import settings

settings.register_profile("contcomp", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("contcomp")


@pytest.fixture(autouse=True)
def _reset_mp():
    # Oracle arithmetic and comparisons in tests run at 256 bits; library calls set their own precision.
    mpmath.mp.prec = 256
    yield
    mpmath.mp.prec = 53


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_line():
    """Record one PASS/FAIL line; all lines are repeated in the terminal summary."""

    def record(label: str, ok: bool, detail: str) -> None:
        line = f"{label}: {'PASS' if ok else 'FAIL'} ({detail})"
        _ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
