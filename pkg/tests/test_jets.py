import math

import pytest
from flint import fmpq
from hypothesis import given
from hypothesis import strategies as st

from conftest import diffeos, jets
from levijet.jets import (CapMismatch, JetBivector, JetDiffeo, JetSpace, JetVectorField,
                          bracket_with_coordinate, compose, compose_diffeos, invert,
                          is_poisson, lie_bracket, poisson_bracket, pushforward,
                          schouten_jacobiator, vanishing_order)
from levijet.levi import linear_model
from levijet.lie_core import so3

S3 = JetSpace(3, 4)
S2 = JetSpace(2, 5)


def so3_linear(space):
    return linear_model(so3(), space)


# -- polynomial ring -------------------------------------------------------------------

def test_keys_order_graded_lex():
    sp = JetSpace(2, 3)
    alphas = [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]
    keys = [sp.key(a) for a in alphas]
    assert keys == sorted(keys)
    assert [sp.exponent(k) for k in keys] == alphas


def test_truncation_on_multiply():
    x = S2.var(0)
    assert (x ** 3) * (x ** 3) == S2.zero()
    assert (x ** 2 * x ** 3).coeff((5, 0)) == 1


def test_mixed_spaces_rejected():
    with pytest.raises(CapMismatch):
        S2.var(0) + JetSpace(2, 4).var(0)


@given(jets(S3), jets(S3), jets(S3))
def test_ring_axioms(f, g, h):
    assert (f * g) * h == f * (g * h)
    assert f * (g + h) == f * g + f * h
    assert f * g == g * f
    assert f - f == S3.zero()


def test_vanishing_order_examples():
    sp = JetSpace(3, 4)
    x1, x2, x3 = (sp.var(i) for i in range(3))
    assert vanishing_order(sp.zero()) == math.inf
    assert vanishing_order(x1 * x2 + x3 ** 3) == 2


# -- brackets --------------------------------------------------------------------------

def test_linear_so3_bracket():
    pi = so3_linear(S3)
    assert poisson_bracket(pi, S3.var(0), S3.var(1)) == S3.var(2)


@given(jets(S3))
def test_bracket_with_itself_vanishes(f):
    assert poisson_bracket(so3_linear(S3), f, f).is_zero()


def test_hand_bracket_example():
    sp = JetSpace(2, 3)
    x1 = sp.var(0)
    pi = JetBivector(sp, {(0, 1): x1 * x1})
    assert poisson_bracket(pi, x1, sp.var(1)) == x1 * x1


@given(jets(S3, max_terms=4), jets(S3, max_terms=4), jets(S3, max_terms=4), st.integers(-3, 3))
def test_bracket_bilinear_antisymmetric_leibniz(f, g, h, c):
    pi = so3_linear(S3) + JetBivector(S3, {(0, 1): S3.var(2) ** 2})
    br = lambda a, b: poisson_bracket(pi, a, b)
    assert br(f, g) == -br(g, f)
    assert br(f.scale(c) + h, g) == br(f, g).scale(c) + br(h, g)
    assert br(f, g * h) == br(f, g) * h + g * br(f, h)


def test_bracket_with_coordinate_matches_bracket():
    pi = so3_linear(S3)
    f = S3.var(0) ** 2 + S3.var(1) * S3.var(2)
    for l in range(3):
        assert bracket_with_coordinate(pi, f, l) == poisson_bracket(pi, f, S3.var(l))


@given(jets(S3, max_terms=3), jets(S3, max_terms=3), jets(S3, max_terms=3), diffeos(S3))
def test_jacobi_for_poisson_mod_truncation(f, g, h, theta):
    pi = pushforward(so3_linear(S3), theta)
    br = lambda a, b: poisson_bracket(pi, a, b)
    total = br(f, br(g, h)) + br(g, br(h, f)) + br(h, br(f, g))
    assert total.truncate(S3.cap - 2).is_zero()


def test_jacobiator_zero_for_linear_so3():
    assert schouten_jacobiator(so3_linear(S3)).is_zero()


def test_jacobiator_witness_for_broken_bivector():
    sp = S3
    x1, x2, x3 = (sp.var(i) for i in range(3))
    # cyclic pattern {z1,z2} = z3 + z1 z2 etc. is Poisson; flipping one quadratic sign is not
    good = JetBivector(sp, {(0, 1): x3 + x1 * x2, (1, 2): x1 + x2 * x3, (0, 2): -x2 - x3 * x1})
    assert schouten_jacobiator(good).is_zero()
    bad = JetBivector(sp, {(0, 1): x3 + x1 * x2, (1, 2): x1 + x2 * x3, (0, 2): -x2 + x3 * x1})
    assert schouten_jacobiator(bad).witness() == ((0, 1, 2), (0, 0, 2), 2)


# -- composition, inversion, pushforward --------------------------------------------------

@given(jets(S3))
def test_compose_identity(f):
    assert compose(f, JetDiffeo.identity(S3)) == f


def test_compose_hand_example():
    sp = JetSpace(2, 4)
    x1, x2 = sp.var(0), sp.var(1)
    theta = JetDiffeo.from_displacement(sp, [x2 * x2, sp.zero()])
    assert compose(x1 * x1, theta) == x1 * x1 + (x1 * x2 * x2).scale(2) + x2 ** 4


@given(jets(S3, max_terms=4), diffeos(S3), diffeos(S3))
def test_compose_associative(f, a, b):
    assert compose(compose(f, a), b) == compose(f, compose_diffeos(a, b))


def test_invert_identity():
    assert invert(JetDiffeo.identity(S3)).is_identity()


def test_invert_one_variable():
    sp = JetSpace(1, 4)
    x = sp.var(0)
    inv = invert(JetDiffeo.from_displacement(sp, [x * x]))
    assert inv[0] == sp.poly({(1,): 1, (2,): -1, (3,): 2, (4,): -5})


@given(diffeos(S3))
def test_invert_two_sided(theta):
    inv = invert(theta)
    assert compose_diffeos(theta, inv).is_identity()
    assert compose_diffeos(inv, theta).is_identity()


def test_diffeo_requires_order_two_displacement():
    with pytest.raises(ValueError):
        JetDiffeo.from_displacement(S2, [S2.var(1), S2.zero()])


def test_pushforward_identity():
    pi = so3_linear(S3)
    assert pushforward(pi, JetDiffeo.identity(S3)) == pi


def test_pushforward_hand_example():
    sp = JetSpace(3, 3)
    pi = so3_linear(sp)
    theta = JetDiffeo.from_displacement(sp, [sp.var(1) ** 2, sp.zero(), sp.zero()])
    out = pushforward(pi, theta)
    assert out != pi
    assert is_poisson(out, sp.cap - 1)
    assert out.linear_part() == pi.linear_part()


@given(diffeos(S3), diffeos(S3))
def test_pushforward_functorial(a, b):
    pi = so3_linear(S3)
    lhs = pushforward(pushforward(pi, a), b)
    rhs = pushforward(pi, compose_diffeos(b, a))
    assert (lhs - rhs).truncate(S3.cap - 1).is_zero()


@given(diffeos(S3))
def test_pushforward_preserves_jacobi(theta):
    pi = pushforward(so3_linear(S3), theta)
    assert schouten_jacobiator(pi).truncate(S3.cap - 1).is_zero()


def test_lie_bracket_of_coordinate_fields():
    sp = JetSpace(2, 3)
    x, y = sp.var(0), sp.var(1)
    X = JetVectorField(sp, [sp.const(1), sp.zero()])
    Y = JetVectorField(sp, [sp.zero(), x * x])
    # [d/dx, x^2 d/dy] = 2x d/dy
    assert lie_bracket(X, Y) == JetVectorField(sp, [sp.zero(), x.scale(2)])
