import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from hardyfem.thresholds import HypothesisSet

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def hypothesis_sets(draw, require_existence=False):
    N = draw(st.integers(3, 8))
    alpha = draw(st.floats(0.05, 20))
    A = draw(st.floats(0, 5))
    lam = draw(st.floats(0, 5))
    hyp = HypothesisSet(N, alpha, alpha, A=A, lam=lam)
    if require_existence:
        from hypothesis import assume

        assume(hyp.alpha * hyp.H**2 > hyp.A * hyp.H + hyp.lam + 1e-9)
    return hyp


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[key])
