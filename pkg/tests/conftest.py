import numpy as np
import pytest

from spectral_bb.numerics import make_rng


@pytest.fixture
def rng():
    return make_rng(12345)


def random_pairs(rng, count, n=6):
    """(s, y) pairs with s^T y > 0 drawn from random SPD quadratics."""
    out = []
    while len(out) < count:
        s = rng.standard_normal(n)
        d = np.exp(rng.uniform(-4, 4, n))
        y = d * s
        out.append((s, y))
    return out


_CRITERIA: dict[int, str] = {}


@pytest.fixture
def criterion():
    """``criterion(n, ok, detail)`` records one acceptance line and returns ``ok``."""

    def record(n, ok, detail):
        line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        _CRITERIA[n] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[n])
