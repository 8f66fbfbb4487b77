import numpy as np
import pytest


def fd_jet(fn, x, y, h=1e-5):
    """Central differences of a scalar field: (v, dx, dy, dxx, dyy)."""
    v = fn(x, y)
    return (v,
            (fn(x + h, y) - fn(x - h, y)) / (2 * h),
            (fn(x, y + h) - fn(x, y - h)) / (2 * h),
            (fn(x + h, y) - 2 * v + fn(x - h, y)) / h ** 2,
            (fn(x, y + h) - 2 * v + fn(x, y - h)) / h ** 2)


def rel_err(a, b, floor=1.0):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), floor)))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


def report(criterion, ok, detail):
    """Record and print one acceptance line, then assert it."""
    line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
