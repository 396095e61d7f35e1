import math
import random
from dataclasses import replace

import pytest
from flint import fmpq
from hypothesis import given
from hypothesis import strategies as st

from conftest import jets
from levijet.jets import JetBivector, JetSpace
from levijet.schedule import (NormFlavor, SmoothingParameter, Variant, approx_str,
                              check_sci_axioms, majorant_norm, norm, plan_constants, radius,
                              random_jet, schedule, smoothing, spectral_norm, validate_constants)

S2 = JetSpace(2, 6)


# -- constants ---------------------------------------------------------------------------

def test_main_constants_n3():
    c = plan_constants(3)
    assert (c.s, c.A) == (2, 21)
    assert c.epsilon == fmpq(1, 176) and 22 * c.epsilon < fmpq(1, 4)
    assert (c.l, c.L) == (1938, 3875)
    assert fmpq(11, c.l - 1) < c.epsilon


def test_main_constants_n1():
    c = plan_constants(1)
    assert (c.s, c.A) == (1, 15)


@pytest.mark.parametrize("n", range(1, 13))
@pytest.mark.parametrize("variant,tau", [("main", None), ("appendix", 0), ("appendix", fmpq(3, 2))])
def test_plan_passes_validator(n, variant, tau):
    c = plan_constants(n, variant, tau)
    assert validate_constants(c) == []
    assert c.L == 2 * c.l - 1


def test_validator_catches_bad_values():
    c = plan_constants(4)
    assert "l vs epsilon" in validate_constants(replace(c, l=10, L=19))
    assert "A" in validate_constants(replace(c, A=c.A - 1))
    assert "L" in validate_constants(replace(c, L=c.L + 1))


def test_appendix_needs_tau():
    with pytest.raises(ValueError):
        plan_constants(3, Variant.APPENDIX)


# -- schedule ---------------------------------------------------------------------------

def test_schedule_t0_16():
    seq = schedule(16, 2)
    assert [e.t.exact() for e in seq.entries] == [16, 64, 512]
    assert [e.r for e in seq.entries] == [2, fmpq(3, 2), fmpq(4, 3)]


def test_small_t0_flagged():
    seq = schedule(fmpq(101, 100), 3)
    assert seq[0].too_small


def test_radius_ratio():
    for d in range(30):
        assert radius(d + 1) / radius(d) == 1 - fmpq(1, (d + 2) ** 2)


def test_smoothing_parameter_symbolic():
    t = SmoothingParameter(fmpq(16), 3)
    assert t.exact() is None      # 16^(27/8) is irrational
    assert t.compare_power(2, 13) > 0 and t.compare_power(2, 14) < 0
    assert SmoothingParameter(fmpq(16), 40).cutoff() == math.inf


def test_t0_must_exceed_one():
    with pytest.raises(ValueError):
        schedule(1, 3)


def test_approx_rendering():
    assert approx_str(fmpq(12345)) == "1.234500e+4"
    assert approx_str(fmpq(0)) == "0"


# -- norms ------------------------------------------------------------------------------

def test_majorant_examples():
    x1 = S2.var(0)
    assert majorant_norm(x1 * x1, 0, 1) == 1
    assert majorant_norm(x1 * x1, 1, 1) == 2


def test_spectral_examples():
    assert spectral_norm(S2.var(0) * S2.var(1), 1, 1) == 2
    for k in range(4):
        assert spectral_norm(S2.zero(), k, fmpq(1, 2)) == 0


def test_spectral_needs_small_radius():
    with pytest.raises(ValueError):
        spectral_norm(S2.var(0), 1, 2)


def test_norm_of_bivector_is_component_max():
    pi = JetBivector(S2, {(0, 1): S2.var(0).scale(3)})
    assert spectral_norm(pi, 0, 1) == 3


@pytest.mark.parametrize("flavor", list(NormFlavor))
@given(f=jets(S2), g=jets(S2), c=st.integers(-5, 5), k=st.integers(0, 5))
def test_norm_properties(flavor, f, g, c, k):
    r, big = fmpq(1, 2), fmpq(1)
    assert norm(flavor, f, k, r) <= norm(flavor, f, k + 1, r)
    assert norm(flavor, f, k, r) <= norm(flavor, f, k, big)
    assert norm(flavor, f.scale(c), k, r) == abs(c) * norm(flavor, f, k, r)
    assert norm(flavor, f + g, k, r) <= norm(flavor, f, k, r) + norm(flavor, g, k, r)


def test_smoothing_examples():
    x1 = S2.var(0)
    assert smoothing(x1 + x1 ** 3, 2) == x1
    f = x1 + S2.var(1) ** 5
    assert smoothing(f, S2.cap) == f


@given(f=jets(S2), t=st.integers(2, 9))
def test_smoothing_idempotent(f, t):
    once = smoothing(f, t)
    assert smoothing(once, t) == once


@given(f=jets(S2), t=st.integers(2, 8), p=st.integers(0, 6), q=st.integers(0, 6))
def test_spectral_smoothing_inequalities(f, t, p, q):
    if p < q:
        p, q = q, p
    r = fmpq(1, 2)
    low = smoothing(f, t)
    assert spectral_norm(low, p, r) <= fmpq(t) ** (p - q) * spectral_norm(f, q, r)
    assert spectral_norm(f - low, q, r) * fmpq(t) ** (p - q) <= spectral_norm(f, p, r)


# -- axiom audit ------------------------------------------------------------------------

def test_spectral_axioms_hold_with_constant_one():
    sp = JetSpace(2, 8)
    rng = random.Random(5)
    samples = [random_jet(sp, rng) for _ in range(40)]
    rep = check_sci_axioms(NormFlavor.SPECTRAL, samples)
    assert rep.passed
    assert rep["interpolation"].worst_ratio <= 1 + 1e-9
    assert all(r.cases > 0 for r in rep.results)


def test_majorant_axioms_report_constants():
    sp = JetSpace(2, 6)
    rng = random.Random(6)
    rep = check_sci_axioms(NormFlavor.MAJORANT, [random_jet(sp, rng) for _ in range(15)])
    assert rep["monotonicity"].passed
    assert math.isfinite(rep["smoothing"].worst_ratio)


def test_zero_jet_is_degenerate_pass():
    rep = check_sci_axioms(NormFlavor.SPECTRAL, [S2.zero()])
    assert rep.passed
