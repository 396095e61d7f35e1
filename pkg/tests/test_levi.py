import random

import pytest
from flint import fmpq

from levijet.ce_complex import Cochain
from levijet.jets import (JetBivector, JetDiffeo, JetSpace, JetVectorField, bracket_with_coordinate,
                          pushforward)
from levijet.levi import (CHECK_CORRECTED, CHECK_CYCLIC, CHECK_FIBERWISE, LeviProblem,
                          NormalizeConfig, ProblemError, Unconverged, algebroid_to_poisson,
                          check_fiberwise_linear, corrected_g,
                          corrected_g_differential_expression, cyclic_expression,
                          engine_tables, error_cochains, formal_step_bound, homothety_bivector,
                          linear_model, normalize, perturbed_algebroid, perturbed_problem,
                          quadratic_terms, step, transformation_algebroid, unscale_diffeo,
                          y_field, yy_nonlinear)
from levijet.lie_core import so3, so3_semidirect_r3
from levijet.nash_moser import Mode, Status

SO3 = so3()
SEMI = so3_semidirect_r3()


@pytest.fixture(scope="module")
def conn4():
    return perturbed_problem(SO3, 4, seed=3)[0]


@pytest.fixture(scope="module")
def semi4():
    return perturbed_problem(SEMI, 4, seed=2, density=0.2)[0]


def so3_with(sp, extra):
    comps = dict(linear_model(SO3, sp).comps)
    for k, v in extra.items():
        comps[k] = comps[k] + v
    return JetBivector(sp, comps)


# -- problem validation --------------------------------------------------------------------

def test_model_errors_are_zero():
    sp = JetSpace(6, 3)
    problem = LeviProblem(SEMI, linear_model(SEMI, sp))
    err = error_cochains(problem, problem.pi)
    assert err.f.is_zero() and err.g.is_zero()


def test_error_cochain_subtraction():
    sp = JetSpace(3, 3)
    x1 = sp.var(0)
    pi = so3_with(sp, {(0, 1): x1 * x1})
    problem = LeviProblem(SO3, pi, check=False)
    err = error_cochains(problem, pi)
    assert err.f[(0, 1)] == x1 * x1
    assert err.f[(1, 0)] == -(x1 * x1)
    assert err.f[(0, 2)].is_zero() and err.f[(1, 2)].is_zero()


def test_perturbed_error_has_order_two(semi4):
    assert error_cochains(semi4, semi4.pi).order() >= 2


def test_non_poisson_rejected_with_witness():
    sp = JetSpace(3, 3)
    x1 = sp.var(0)
    with pytest.raises(ProblemError) as exc:
        LeviProblem(SO3, so3_with(sp, {(0, 1): x1 * x1}))
    assert exc.value.witness["monomial"]


def test_wrong_linear_part_rejected():
    sp = JetSpace(3, 3)
    with pytest.raises(ProblemError, match="linear part"):
        LeviProblem(SO3, so3_with(sp, {(0, 1): sp.var(0)}))


def test_constant_term_rejected():
    sp = JetSpace(3, 3)
    with pytest.raises(ProblemError, match="origin"):
        LeviProblem(SO3, so3_with(sp, {(0, 1): sp.const(1)}))


# -- pieces of one step ----------------------------------------------------------------------

def test_corrected_g_specialisations(semi4):
    tables = engine_tables(semi4)
    sp, m = semi4.space, 3
    err = error_cochains(semi4, semi4.pi)
    zero_f = Cochain(2, m, {}, sp.zero())
    assert corrected_g(semi4, semi4.pi, zero_f, err.g, tables) == err.g
    zero_g = Cochain(1, m, {}, JetVectorField.zero(sp))
    ghat = corrected_g(semi4, semi4.pi, err.f, zero_g, tables)
    hf = tables.functions.homotopy(err.f)
    for i in range(m):
        want = y_field(sp, m, [-bracket_with_coordinate(semi4.pi, hf[(i,)], y) for y in range(m, 6)])
        assert ghat[(i,)] == want


def test_quadratic_terms_vanish_without_errors():
    sp = JetSpace(6, 3)
    problem = LeviProblem(SEMI, linear_model(SEMI, sp))
    err = error_cochains(problem, problem.pi)
    tables = engine_tables(problem)
    hf = tables.functions.homotopy(err.f)
    quad = quadratic_terms(problem, problem.pi, err, [sp.zero()] * 3, [sp.zero()] * 3, hf)
    assert quad.Q.is_zero() and quad.T.is_zero() and quad.U.is_zero()


def test_formal_step_has_no_smoothing_remainder(semi4):
    tables = engine_tables(semi4)
    err = error_cochains(semi4, semi4.pi)
    hf = tables.functions.homotopy(err.f)
    res = step(semi4, semi4.pi, tables, checks=False)
    quad = quadratic_terms(semi4, semi4.pi, err, res.phi, res.psi, hf)
    assert quad.U.is_zero()


def test_zero_error_step_is_identity():
    sp = JetSpace(6, 3)
    problem = LeviProblem(SEMI, linear_model(SEMI, sp))
    res = step(problem, problem.pi, engine_tables(problem))
    assert res.theta.is_identity() and res.pi_next == problem.pi
    assert all(res.checks.values())


def test_one_step_improves_order(conn4):
    res = step(conn4, conn4.pi, engine_tables(conn4))
    assert res.errors.order() == 2 and res.next_errors.order() >= 3
    assert all(res.checks.values()), res.checks


def test_identities_are_not_vacuous(semi4):
    tables = engine_tables(semi4)
    err = error_cochains(semi4, semi4.pi)
    fspec, yspec = tables.fspec, tables.yspec
    from levijet.ce_complex import ce_differential
    df = ce_differential(fspec, err.f)
    assert not df.is_zero()
    assert df == cyclic_expression(semi4, err)
    hf = tables.functions.homotopy(err.f)
    h_df = tables.functions.homotopy(df)
    ghat = corrected_g(semi4, semi4.pi, err.f, err.g, tables, hf)
    dg = ce_differential(yspec, ghat)
    expr = corrected_g_differential_expression(semi4, semi4.pi, err, hf, h_df)
    assert not dg.is_zero() and dg == expr
    # dropping the h(delta f) term must break the identity
    no_hdf = corrected_g_differential_expression(semi4, semi4.pi, err, hf, h_df.map(lambda p: p.scale(0)))
    assert dg != no_hdf
    # a sign error in the cyclic sum must be caught too
    assert df != cyclic_expression(semi4, err).map(lambda p: -p)


# -- full runs -----------------------------------------------------------------------------

def test_linear_semidirect_is_already_normal():
    sp = JetSpace(6, 4)
    problem = LeviProblem(SEMI, linear_model(SEMI, sp))
    res = normalize(problem)
    assert res.converged and res.theta.is_identity() and res.log.steps == []


def test_conn_hand_example():
    sp = JetSpace(3, 8)
    x1, x2, x3 = (sp.var(i) for i in range(3))
    theta0 = JetDiffeo.from_displacement(sp, [x2 * x3, sp.zero(), sp.zero()])
    problem = LeviProblem(SO3, pushforward(linear_model(SO3, sp), theta0))
    res = normalize(problem)
    assert res.converged and res.pi == linear_model(SO3, sp)
    assert all(res.relations.values())
    assert len(res.log.steps) <= 4


def test_semidirect_relations_hold_and_yy_is_free(semi4):
    res = normalize(semi4)
    assert res.converged and all(res.relations.values())
    assert res.log.all_checks() and all(res.log.all_checks().values())


def test_yy_generally_nonlinear():
    problem, _ = perturbed_problem(SEMI, 4, seed=0)
    res = normalize(problem)
    assert all(res.relations.values()) and yy_nonlinear(problem, res.pi)


def test_max_steps_zero_unconverged(conn4):
    res = normalize(conn4, NormalizeConfig(max_steps=0))
    assert res.status is Status.UNCONVERGED and res.log.final_order == 2


def test_strict_formal_run_asserts_convergence(conn4, monkeypatch):
    import levijet.levi as levi
    monkeypatch.setattr(levi, "formal_step_bound", lambda cap: 1)
    with pytest.raises(Unconverged):
        normalize(conn4, NormalizeConfig(max_steps=1))


def test_formal_step_bound():
    assert formal_step_bound(8) == 5


def test_scheduled_small_t0_still_converges():
    problem, _ = perturbed_problem(SO3, 5, seed=4)
    res = normalize(problem, NormalizeConfig(mode=Mode.SCHEDULED, t0=fmpq(5, 2)))
    assert res.converged and all(res.relations.values())
    assert all(res.log.all_checks().values())


def test_homothety_round_trip(conn4):
    t = fmpq(3)
    scaled = homothety_bivector(conn4.pi, t)
    assert homothety_bivector(scaled, 1 / t) == conn4.pi
    res = normalize(conn4, NormalizeConfig(homothety=t))
    assert res.converged and all(res.relations.values())
    assert res.relations["transform reproduces result"]
    assert unscale_diffeo(unscale_diffeo(res.theta, t), 1 / t) == res.theta


# -- algebroids ------------------------------------------------------------------------------

def test_lie_algebra_over_a_line():
    m = 3
    brackets = [[[SO3.c[i][j][k] for k in range(m)] for j in range(m)] for i in range(m)]
    anchor = [[0] for _ in range(m)]
    problem = algebroid_to_poisson(3, 1, 3, brackets, anchor, 3)
    pi, sp = problem.pi, problem.space
    for i in range(3):
        for j in range(i + 1, 3):
            k = 3 - i - j
            assert pi(i, j) == sp.var(k).scale(SO3.c[i][j][k])
        assert pi(i, 3).is_zero()


def test_transformation_algebroid_shape():
    problem = transformation_algebroid(SO3, 3)
    pi, N = problem.pi, 3
    for i in range(N):
        for j in range(N):
            p = pi(i, N + j)
            assert all(sum(a[N:]) == 1 and sum(a[:N]) == 0 for a, _ in p.items())
    for i in range(N, 6):
        for j in range(N, 6):
            assert pi(i, j).is_zero()
    assert check_fiberwise_linear(pi, problem.fiber)


def test_fiberwise_linearity_detects_base_bracket():
    problem = transformation_algebroid(SO3, 3)
    sp = problem.space
    comps = dict(problem.pi.comps)
    comps[(3, 4)] = sp.var(5) ** 2
    assert not check_fiberwise_linear(JetBivector(sp, comps), problem.fiber)


def test_algebroid_anchor_must_vanish():
    brackets = [[[SO3.c[i][j][k] for k in range(3)] for j in range(3)] for i in range(3)]
    with pytest.raises(ProblemError):
        algebroid_to_poisson(3, 1, 3, brackets, [[1], [0], [0]], 3)


def test_algebroid_normalization_keeps_fiberwise_linearity():
    problem, _ = perturbed_algebroid(SO3, 4, seed=1)
    res = normalize(problem)
    assert res.converged and all(res.relations.values())
    assert all(s.checks[CHECK_FIBERWISE] for s in res.steps)
