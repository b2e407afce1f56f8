import numpy as np
import pytest

_LINES = []


def report_line(criterion: str, ok: bool, detail: str) -> None:
    """Record one PASS/FAIL line; all of them are echoed in the terminal summary."""
    line = f"[criterion {criterion}] {'PASS' if ok else 'FAIL'}: {detail}"
    _LINES.append(line)
    print(line)


@pytest.fixture
def criterion():
    return report_line


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240601)
