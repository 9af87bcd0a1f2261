import numpy as np
import pytest

from tropiroots.poly import Polynomial

EPS = np.finfo(float).eps

# p(z) = z^4 - z^3 + 2e-25 z^2 + 1e-30 z - 1e-60
GRADED = [-1e-60, 1e-30, 2e-25, -1.0, 1.0]
# reference zeros of GRADED
GRADED_ROOTS = np.array([-9.999999999000001e-16, 9.999999999999999e-31,
                      1.000000000100000e-15, 1.000000000000000e00])
BETA = 2.0**-26 + 2.0**-52

# criterion number -> (passed, message); filled by test_acceptance
ACCEPTANCE = {}


@pytest.fixture
def graded():
    return Polynomial(GRADED)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, msg = ACCEPTANCE[k]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {k:2d}: {msg}")
