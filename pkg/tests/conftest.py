import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def centered(a):
    a = np.asarray(a, dtype=float)
    return a - a.mean(axis=1, keepdims=True)


ACCEPTANCE_LINES = {}


def record_criterion(number, name, ok, detail):
    """Remember a criterion outcome for the end-of-run summary and assert it."""
    ACCEPTANCE_LINES[number] = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {name}: {detail}"
    print(ACCEPTANCE_LINES[number])
    assert ok, detail


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
