import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from clark_rif.poly import MultiPoly

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def complex_coeffs(max_abs=3.0):
    part = st.floats(-max_abs, max_abs, allow_nan=False, allow_infinity=False)
    return st.builds(complex, part, part).filter(lambda c: abs(c) > 1e-3)


@st.composite
def multipolys(draw, nvars=2, max_deg=3, max_terms=6):
    n = draw(st.integers(1, max_terms))
    exps = draw(
        st.lists(st.tuples(*[st.integers(0, max_deg)] * nvars), min_size=n, max_size=n, unique=True)
    )
    coeffs = draw(st.lists(complex_coeffs(), min_size=n, max_size=n))
    return MultiPoly(nvars, dict(zip(exps, coeffs)))


@st.composite
def torus_points(draw, nvars=2):
    ang = draw(st.lists(st.floats(0, 2 * np.pi), min_size=nvars, max_size=nvars))
    return np.exp(1j * np.array(ang))


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from tests import test_acceptance

    if test_acceptance.LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(test_acceptance.LINES):
            terminalreporter.write_line(test_acceptance.LINES[n])
