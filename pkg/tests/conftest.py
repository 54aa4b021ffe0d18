import numpy as np
import pytest
from hypothesis import settings

from tentlab.semigroup import fixture

settings.register_profile("default", max_examples=30, deadline=None)
settings.load_profile("default")

STANDARD = ("TP", "CYC_8", "TORUS_16", "SM_2")

_ACCEPTANCE = []


@pytest.fixture(params=STANDARD)
def gen(request):
    return fixture(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def acceptance_line():
    """Record one pass/fail line for the acceptance summary."""
    def record(label, ok, detail=""):
        _ACCEPTANCE.append((label, bool(ok), detail))
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}")
