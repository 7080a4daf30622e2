import numpy as np
import pytest

from causalprod.linalg import complex_gaussian, rng


@pytest.fixture
def a2():
    return np.array([[2.0, 1.0], [1.0, 1.0]], dtype=complex)


def gaussian_vector(n, seed):
    return complex_gaussian(rng(seed), n)


def rel_close(x, y, rtol):
    x, y = np.asarray(x), np.asarray(y)
    return float(np.max(np.abs(x - y))) <= rtol * max(1.0, float(np.max(np.abs(y))))


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion."""

    def record(label, passed, detail=""):
        ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {label}: {detail}")
        print(ACCEPTANCE_LINES[-1])
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
