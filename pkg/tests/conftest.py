import random

import pytest
from flint import fmpq
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from levijet.jets import JetDiffeo, JetSpace, compositions

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def monomials(space, lo=0):
    return [a for d in range(lo, space.cap + 1) for a in compositions(d, space.n)]


rationals = st.builds(lambda p, q: fmpq(p, q), st.integers(-6, 6), st.integers(1, 4))


def jets(space, lo=0, max_terms=6):
    mons = monomials(space, lo)
    return st.dictionaries(st.sampled_from(mons), rationals, max_size=max_terms).map(space.poly)


def diffeos(space, max_terms=3):
    return st.lists(jets(space, 2, max_terms), min_size=space.n, max_size=space.n).map(
        lambda chi: JetDiffeo.from_displacement(space, chi))


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture
def space3():
    return JetSpace(3, 4)


# criterion number -> (passed, detail); filled by test_acceptance, printed after the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
