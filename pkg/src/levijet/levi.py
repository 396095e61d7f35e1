"""Levi normalization of Poisson jets and of Lie algebroids through their dual Poisson jets.

Coordinates are split as ``(x_1..x_m, y_1..y_{n-m})``.  At every step the
current structure is measured against the linear model on the x-x and x-y
brackets; the error cochains are pushed through the CE homotopies and the
resulting near-identity diffeomorphism is applied to the structure itself,
so the coordinates stay fixed while the structure moves.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

from flint import fmpq

from .ce_complex import Cochain, HomotopyTables, ModuleKind, ModuleSpec, ce_differential
from .jets import (JetBivector, JetDiffeo, JetPoly, JetSpace, JetVectorField,
                   Composer, bracket_from_hamiltonian, bracket_with_coordinate, compose_diffeos,
                   compositions, hamiltonian, invert, jet_sum, pushforward, schouten_jacobiator)
from .lie_core import StructureData, StructureError, validate_structure
from .nash_moser import (IterationLog, Mode, RunResult, SCIInstance, Status, StepOutcome,
                         run)
from .rational import q
from .schedule import ScheduleConstants, SmoothingParameter, plan_constants, smoothing


class ProblemError(ValueError):
    def __init__(self, message, witness=None):
        super().__init__(message if witness is None else f"{message}; witness {witness}")
        self.witness = witness


class Unconverged(RuntimeError):
    pass


# -- problem -------------------------------------------------------------------------

def linear_model(data: StructureData, space: JetSpace, yy: JetBivector | None = None) -> JetBivector:
    """Lie-Poisson bivector of the model: x-x from ``c``, x-y from ``a``; y-y from ``yy`` if given."""
    m, n = data.m, data.n
    comps = {}
    for i in range(m):
        for j in range(i + 1, m):
            comps[(i, j)] = space.poly({_unit(n, m, k): data.c[i][j][k] for k in range(m)})
        for al in range(n - m):
            comps[(i, m + al)] = space.poly({_unit(n, m, m + be): data.a[i][al][be] for be in range(n - m)})
    if yy is not None:
        for (i, j), p in yy.comps.items():
            if i >= m and j >= m:
                comps[(i, j)] = p
    return JetBivector(space, comps)


def _unit(n, m, k):
    return tuple(1 if t == k else 0 for t in range(n))


def model_component(data: StructureData, space: JetSpace, i: int, j: int) -> JetPoly:
    """Linear model value of ``{z_i, z_j}`` for ``i < m``."""
    m, n = data.m, data.n
    if j < m:
        return space.poly({_unit(n, m, k): data.c[i][j][k] for k in range(m)})
    return space.poly({_unit(n, m, m + be): data.a[i][j - m][be] for be in range(n - m)})


@dataclass
class LeviProblem:
    data: StructureData
    pi: JetBivector
    fiber: tuple[int, ...] | None = None     # set in algebroid mode
    check: bool = True

    def __post_init__(self):
        if self.pi.space.n != self.data.n:
            raise ProblemError(f"bivector has {self.pi.space.n} variables, structure has {self.data.n}")
        if self.fiber is not None:
            self.fiber = tuple(sorted(self.fiber))
        if self.check:
            self.validate()

    @property
    def space(self) -> JetSpace:
        return self.pi.space

    @property
    def cap(self) -> int:
        return self.pi.space.cap

    @property
    def is_algebroid(self) -> bool:
        return self.fiber is not None

    def validate(self):
        rep = validate_structure(self.data)
        if not rep.passed:
            bad = rep.failed()[0]
            raise ProblemError(f"structure constants fail {bad.name}", bad.witness)
        for (i, j), p in sorted(self.pi.comps.items()):
            if p.constant_term() != 0:
                raise ProblemError("bivector does not vanish at the origin", (i + 1, j + 1))
        m, n = self.data.m, self.data.n
        for i in range(m):
            for j in range(i + 1, n):
                lin = self.pi(i, j).linear_part()
                if lin != model_component(self.data, self.space, i, j):
                    raise ProblemError("linear part differs from the model", (i + 1, j + 1))
        wit = schouten_jacobiator(self.pi).truncate(self.cap - 1).witness()
        if wit is not None:
            (i, j, k), alpha, c = wit
            raise ProblemError("bivector is not Poisson", {"component": (i + 1, j + 1, k + 1),
                                                            "monomial": alpha, "coefficient": str(c)})
        if self.fiber is not None and not check_fiberwise_linear(self.pi, self.fiber):
            raise ProblemError("bivector is not fiber-wise linear")


# -- homotopy tables cache -------------------------------------------------------------

@lru_cache(maxsize=32)
def _tables(data: StructureData, kind: ModuleKind, cap: int, fiber) -> HomotopyTables:
    return HomotopyTables(ModuleSpec(data, kind, cap, fiber=fiber))


@dataclass
class EngineTables:
    functions: HomotopyTables
    fields: HomotopyTables

    @property
    def fspec(self) -> ModuleSpec:
        return self.functions.spec

    @property
    def yspec(self) -> ModuleSpec:
        return self.fields.spec


def engine_tables(problem: LeviProblem) -> EngineTables:
    fkind = ModuleKind.FIBERWISE_LINEAR if problem.is_algebroid else ModuleKind.FUNCTIONS
    return EngineTables(_tables(problem.data, fkind, problem.cap, problem.fiber),
                        _tables(problem.data, ModuleKind.YFIELDS, problem.cap, problem.fiber))


# -- error cochains ---------------------------------------------------------------------

@dataclass
class ErrorCochains:
    f: Cochain      # 2-cochain of functions
    g: Cochain      # 1-cochain of y-fields

    def order(self):
        return min(self.f.vanishing_order(), self.g.vanishing_order())


def y_field(space: JetSpace, m: int, coeffs: Sequence[JetPoly]) -> JetVectorField:
    return JetVectorField(space, [space.zero()] * m + list(coeffs))


def error_cochains(problem: LeviProblem, pi_d: JetBivector) -> ErrorCochains:
    data, sp = problem.data, pi_d.space
    if sp != problem.space:
        raise ProblemError("structure lives in a different jet space")
    m, n = data.m, data.n
    fvals = {}
    for i in range(m):
        for j in range(i + 1, m):
            fvals[(i, j)] = pi_d(i, j) - model_component(data, sp, i, j)
    gvals = {}
    for i in range(m):
        coeffs = [pi_d(i, j) - model_component(data, sp, i, j) for j in range(m, n)]
        gvals[(i,)] = y_field(sp, m, coeffs)
    f = Cochain(2, m, fvals, sp.zero())
    g = Cochain(1, m, gvals, JetVectorField.zero(sp))
    for name, c in (("f", f), ("g", g)):
        if c.vanishing_order() < 2:
            bad = next(k for k, v in sorted(c.values.items()) if v.vanishing_order() < 2)
            raise ProblemError(f"error cochain {name} has a linear part", tuple(i + 1 for i in bad))
    return ErrorCochains(f, g)


def error_bivector(problem: LeviProblem, pi_d: JetBivector) -> JetBivector:
    """x-x and x-y components of ``pi_d`` minus the model; y-y dropped."""
    data, sp = problem.data, pi_d.space
    comps = {}
    for i in range(data.m):
        for j in range(i + 1, data.n):
            comps[(i, j)] = pi_d(i, j) - model_component(data, sp, i, j)
    return JetBivector(sp, comps)


def project_normal(problem: LeviProblem, pi_d: JetBivector) -> JetBivector:
    """Replace x-x and x-y components by the model, keep y-y."""
    data, sp = problem.data, pi_d.space
    comps = dict(pi_d.comps)
    for i in range(data.m):
        for j in range(i + 1, data.n):
            comps[(i, j)] = model_component(data, sp, i, j)
    return JetBivector(sp, comps)


class Drift:
    """``D_i F = sum_u f_iu dF/dx_u + sum_b g_ib dF/dy_b``: the nonlinear part of ``{x_i, F}_d``."""

    def __init__(self, problem: LeviProblem, err: ErrorCochains):
        self.m, self.n = problem.data.m, problem.data.n
        self.err = err

    def __call__(self, i: int, F: JetPoly) -> JetPoly:
        f, g = self.err.f, self.err.g
        terms = []
        for u in range(self.m):
            if u != i:
                c = f[(i, u)]
                if c:
                    d = F.diff(u)
                    if d:
                        terms.append(c * d)
        gi = g[(i,)]
        for b in range(self.m, self.n):
            c = gi[b]
            if c:
                d = F.diff(b)
                if d:
                    terms.append(c * d)
        return jet_sum(F.space, terms)


def corrected_g(problem: LeviProblem, pi_d: JetBivector, f: Cochain, g: Cochain,
                tables: EngineTables, hf: Cochain | None = None) -> Cochain:
    """``g_i - sum_alpha {h(f)_i, y_alpha}_d d/dy_alpha``."""
    m, n = problem.data.m, problem.data.n
    sp = pi_d.space
    hf = tables.functions.homotopy(f) if hf is None else hf
    vals = {}
    for i in range(m):
        corr = [bracket_with_coordinate(pi_d, hf[(i,)], j) for j in range(m, n)]
        vals[(i,)] = g[(i,)] - y_field(sp, m, corr)
    return Cochain(1, m, vals, JetVectorField.zero(sp))


@dataclass
class QuadraticTerms:
    Q: Cochain
    T: Cochain
    U: Cochain


def quadratic_terms(problem: LeviProblem, pi_d: JetBivector, err: ErrorCochains,
                    phi: Sequence[JetPoly], psi: Sequence[JetPoly], hf: Cochain,
                    smoothed_hf: Sequence[JetPoly] | None = None) -> QuadraticTerms:
    """The quadratic remainders of one step; ``psi`` indexed by y-slot ``0..n-m-1``."""
    m, n = problem.data.m, problem.data.n
    sp = pi_d.space
    drift = Drift(problem, err)
    ham = [hamiltonian(pi_d, p) for p in phi]
    qv = {}
    for i in range(m):
        for j in range(i + 1, m):
            qv[(i, j)] = drift(i, phi[j]) - drift(j, phi[i]) + bracket_from_hamiltonian(ham[i], phi[j])
    tv, uv = {}, {}
    for i in range(m):
        tv[(i,)] = y_field(sp, m, [drift(i, psi[a]) + bracket_from_hamiltonian(ham[i], psi[a])
                                   for a in range(n - m)])
        if smoothed_hf is None:
            uv[(i,)] = JetVectorField.zero(sp)
        else:
            rest = hf[(i,)] - smoothed_hf[i]
            uv[(i,)] = y_field(sp, m, [bracket_with_coordinate(pi_d, rest, j) for j in range(m, n)])
    zf, zv = sp.zero(), JetVectorField.zero(sp)
    return QuadraticTerms(Cochain(2, m, qv, zf), Cochain(1, m, tv, zv), Cochain(1, m, uv, zv))


# -- identities --------------------------------------------------------------------------

def cyclic_expression(problem: LeviProblem, err: ErrorCochains) -> Cochain:
    """``cyc_{ijk} D_i f_jk`` as a 3-cochain."""
    m = problem.data.m
    drift = Drift(problem, err)
    f = err.f
    vals = {}
    for i in range(m):
        for j in range(i + 1, m):
            for k in range(j + 1, m):
                vals[(i, j, k)] = drift(i, f[(j, k)]) + drift(j, f[(k, i)]) + drift(k, f[(i, j)])
    return Cochain(3, m, vals, problem.space.zero())


def corrected_g_differential_expression(problem: LeviProblem, pi_d: JetBivector, err: ErrorCochains,
                                        hf: Cochain, h_df: Cochain) -> Cochain:
    """The explicit quadratic expression for ``delta g_hat`` as a 2-cochain of y-fields."""
    m, n = problem.data.m, problem.data.n
    sp = pi_d.space
    drift = Drift(problem, err)
    g = err.g
    ham = [hamiltonian(pi_d, hf[(i,)]) for i in range(m)]
    vals = {}
    for i in range(m):
        for j in range(i + 1, m):
            cross = drift(i, hf[(j,)]) - drift(j, hf[(i,)])
            ham_cross = hamiltonian(pi_d, cross)
            coeffs = []
            for y in range(m, n):
                gi, gj = g[(i,)][y], g[(j,)][y]
                # {h_i, y} is the y-component of the Hamiltonian field of h_i
                Hi, Hj = ham[i][y], ham[j][y]
                e = (-drift(i, gj) + drift(j, gi) + drift(i, Hj) - drift(j, Hi)
                     + bracket_from_hamiltonian(ham[i], gj) - bracket_from_hamiltonian(ham[j], gi)
                     - ham_cross[y]
                     + bracket_with_coordinate(pi_d, h_df[(i, j)], y))
                coeffs.append(e)
            vals[(i, j)] = y_field(sp, m, coeffs)
    return Cochain(2, m, vals, JetVectorField.zero(sp))


# -- step -------------------------------------------------------------------------------

CHECK_DUAL_F = "dual-path f"
CHECK_DUAL_G = "dual-path g"
CHECK_CYCLIC = "cyclic identity for delta f"
CHECK_CORRECTED = "quadratic identity for delta g_hat"
CHECK_JACOBI = "jacobi preserved"
CHECK_QUADRATIC = "quadratic progress"
CHECK_LINEAR = "linear part preserved"
CHECK_FIBERWISE = "fiber-wise linear"


@dataclass
class StepResult:
    theta: JetDiffeo
    theta_inv: JetDiffeo
    pi_next: JetBivector
    errors: ErrorCochains
    next_errors: ErrorCochains
    phi: list[JetPoly]
    psi: list[JetPoly]
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def displacement(self) -> list[JetPoly]:
        return list(self.phi) + list(self.psi)


def _cochain_entries_equal(a: Cochain, b: Cochain, upto: int) -> bool:
    keys = set(a.values) | set(b.values)
    return all((a[k] - b[k]).truncate(upto).is_zero() for k in keys)


def step(problem: LeviProblem, pi_d: JetBivector, tables: EngineTables,
         t: SmoothingParameter | None = None, checks: bool = True) -> StepResult:
    """One iteration: homotopy solve, optional smoothing, pushforward, and the exact cross-checks."""
    data, sp = problem.data, pi_d.space
    m, n, D = data.m, data.n, sp.cap
    err = error_cochains(problem, pi_d)
    hf = tables.functions.homotopy(err.f)
    ghat = corrected_g(problem, pi_d, err.f, err.g, tables, hf)
    hg = tables.fields.homotopy(ghat)
    raw_phi = [hf[(i,)] for i in range(m)]
    raw_psi = [hg[()][j] for j in range(m, n)]
    if t is None:
        sm_phi, sm_psi = raw_phi, raw_psi
    else:
        sm_phi = [smoothing(p, t) for p in raw_phi]
        sm_psi = [smoothing(p, t) for p in raw_psi]
    phi = [-p for p in sm_phi]
    psi = [-p for p in sm_psi]
    theta = JetDiffeo.from_displacement(sp, phi + psi)
    theta_inv = invert(theta)
    pi_next = pushforward(pi_d, theta, theta_inv)
    nxt = error_cochains(problem, pi_next)
    res = StepResult(theta, theta_inv, pi_next, err, nxt, phi, psi)
    if not checks:
        return res

    c = res.checks
    comp = Composer(theta_inv.components, sp)
    quad = quadratic_terms(problem, pi_d, err, phi, psi, hf, None if t is None else sm_phi)
    fspec, yspec = tables.fspec, tables.yspec
    phi_c = Cochain(1, m, {(i,): phi[i] for i in range(m)}, sp.zero())
    dphi = ce_differential(fspec, phi_c)
    assembled_f = Cochain(2, m, {k: comp(dphi[k] + err.f[k] + quad.Q[k]) for k in dphi.keys()}, sp.zero())
    c[CHECK_DUAL_F] = _cochain_entries_equal(assembled_f, nxt.f, D)
    psi_c = Cochain(0, m, {(): y_field(sp, m, psi)}, JetVectorField.zero(sp))
    dpsi = ce_differential(yspec, psi_c)
    ok = True
    for k in dpsi.keys():
        total = dpsi[k] + ghat[k] + quad.T[k] + quad.U[k]
        for y in range(m, n):
            if not (comp(total[y]) - nxt.g[k][y]).is_zero():
                ok = False
    c[CHECK_DUAL_G] = ok
    if m >= 3:
        df = ce_differential(fspec, err.f)
        c[CHECK_CYCLIC] = _cochain_entries_equal(df, cyclic_expression(problem, err), D)
        h_df = tables.functions.homotopy(df)
        dg = ce_differential(yspec, ghat)
        expr = corrected_g_differential_expression(problem, pi_d, err, hf, h_df)
        c[CHECK_CORRECTED] = all((dg[k][y] - expr[k][y]).is_zero() for k in dg.keys() for y in range(m, n))
    c[CHECK_JACOBI] = schouten_jacobiator(pi_next).truncate(D - 1).is_zero()
    c[CHECK_LINEAR] = pi_next.linear_part() == pi_d.linear_part()
    before, after = err.order(), nxt.order()
    if t is None and before != math.inf:
        c[CHECK_QUADRATIC] = after >= 2 * before - 1
    if problem.is_algebroid:
        c[CHECK_FIBERWISE] = check_fiberwise_linear(pi_next, problem.fiber)
    return res


# -- SCI instance ---------------------------------------------------------------------------

class LeviInstance(SCIInstance):
    action_offset = 1

    def __init__(self, problem: LeviProblem, tables: EngineTables | None = None, checks: bool = True):
        self.problem = problem
        self.tables = tables or engine_tables(problem)
        self.checks = checks
        self.steps: list[StepResult] = []

    def project(self, f):
        return project_normal(self.problem, f)

    def error(self, f):
        return error_bivector(self.problem, f)

    def error_order(self, f):
        return self.error(f).vanishing_order()

    def is_normal(self, f) -> bool:
        return self.error(f).is_zero()

    def solve(self, f, t):
        res = step(self.problem, f, self.tables, t, self.checks)
        self.steps.append(res)
        details = {"next_error_order": _ord(res.next_errors.order())}
        return StepOutcome(res.theta, res.displacement, res.pi_next, dict(res.checks), details)

    def act(self, transform, f):
        return pushforward(f, transform)

    def compose(self, outer, inner):
        return compose_diffeos(outer, inner)

    def identity(self, f):
        return JetDiffeo.identity(f.space)


def _ord(v):
    return "inf" if v == math.inf else int(v)


# -- homothety --------------------------------------------------------------------------------

def _rescale(p: JetPoly, t: fmpq, shift: int) -> JetPoly:
    """Multiply the degree-k part by ``t**(shift - k)``."""
    sh = p.space.deg_shift
    out = {}
    for key, c in p.terms.items():
        out[key] = c * t ** (shift - (key >> sh))
    return JetPoly(p.space, out)


def homothety_bivector(pi: JetBivector, t) -> JetBivector:
    """``(1/t) G(t)_* pi`` with ``G(t): z -> t z``."""
    t = q(t)
    return JetBivector(pi.space, {k: _rescale(p, t, 1) for k, p in pi.comps.items()})


def unscale_diffeo(phi: JetDiffeo, t) -> JetDiffeo:
    """``G(1/t) o phi o G(t)``."""
    t = 1 / q(t)
    return JetDiffeo(phi.space, [_rescale(c, t, 1) for c in phi.components], check=False)


# -- normalize ----------------------------------------------------------------------------------

@dataclass
class NormalizeConfig:
    mode: Mode = Mode.FORMAL
    max_steps: int | None = None
    t0: fmpq | None = None
    constants: ScheduleConstants | None = None
    homothety: fmpq | None = None
    checks: bool = True
    measure: bool = True
    strict: bool = True


@dataclass
class NormalizeResult:
    theta: JetDiffeo
    pi: JetBivector
    log: IterationLog
    status: Status
    relations: dict[str, bool]
    steps: list[StepResult]

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED


def formal_step_bound(cap: int) -> int:
    return math.ceil(math.log2(max(cap, 2))) + 2


def relations(problem: LeviProblem, pi: JetBivector) -> dict[str, bool]:
    """Exact normal-form relations for the final structure."""
    data, sp = problem.data, pi.space
    m, n = data.m, data.n
    xx = all((pi(i, j) - model_component(data, sp, i, j)).is_zero() for i in range(m) for j in range(i + 1, m))
    xy = all((pi(i, j) - model_component(data, sp, i, j)).is_zero() for i in range(m) for j in range(m, n))
    out = {"x-x brackets linear": xx, "x-y brackets linear": xy,
           "jacobi": schouten_jacobiator(pi).truncate(sp.cap - 1).is_zero()}
    if problem.is_algebroid:
        out["fiber-wise linear"] = check_fiberwise_linear(pi, problem.fiber)
    return out


def yy_nonlinear(problem: LeviProblem, pi: JetBivector) -> bool:
    m = problem.data.m
    return any(p.max_degree() > 1 for (i, j), p in pi.comps.items() if i >= m)


def normalize(problem: LeviProblem, config: NormalizeConfig | None = None) -> NormalizeResult:
    config = config or NormalizeConfig()
    mode = Mode(config.mode)
    max_steps = config.max_steps if config.max_steps is not None else formal_step_bound(problem.cap) + (
        12 if mode is Mode.SCHEDULED else 0)
    constants = config.constants
    if constants is None and config.measure:
        constants = plan_constants(problem.data.n)
    work = problem
    if config.homothety is not None:
        work = LeviProblem(problem.data, homothety_bivector(problem.pi, config.homothety), problem.fiber)
    instance = LeviInstance(work, checks=config.checks)
    result: RunResult = run(instance, work.pi, constants, mode, max_steps, config.t0,
                            measure=config.measure)
    theta, pi_inf = result.transform, result.element
    if config.homothety is not None:
        theta = unscale_diffeo(theta, config.homothety)
        pi_inf = homothety_bivector(pi_inf, 1 / q(config.homothety))
    rel = relations(problem, pi_inf)
    if config.checks:
        rel["transform reproduces result"] = pushforward(problem.pi, theta) == pi_inf
        rel["transform displacement order >= 2"] = all(
            d.vanishing_order() >= 2 for d in theta.displacement())
    if result.status is Status.UNCONVERGED and mode is Mode.FORMAL and config.strict \
            and max_steps >= formal_step_bound(problem.cap):
        raise Unconverged(f"formal run did not converge in {max_steps} steps; orders {result.log.orders}")
    return NormalizeResult(theta, pi_inf, result.log, result.status, rel, instance.steps)


# -- algebroids ------------------------------------------------------------------------------

def check_fiberwise_linear(pi: JetBivector, fiber: Sequence[int]) -> bool:
    """Fiber-fiber brackets have fiber degree exactly one, fiber-base brackets are base
    functions and base-base brackets vanish."""
    fs = set(fiber)
    fiber = sorted(fs)
    for (i, j), p in pi.comps.items():
        k = (i in fs) + (j in fs)
        want = k - 1
        if want < 0:
            if not p.is_zero():
                return False
            continue
        if p.degrees_in(fiber) - {want}:
            return False
    return True


def algebroid_to_poisson(N: int, n: int, m: int, brackets, anchor, cap: int,
                         check: bool = True) -> LeviProblem:
    """Fiber-wise linear Poisson jet on the dual bundle.

    Coordinates: fiber ``e_0..e_{N-1}`` (the first ``m`` span the Levi factor)
    then base ``x_0..x_{n-1}``.  ``brackets[i][j][k]`` and ``anchor[i][j]`` are
    base jets: ``{e_i, e_j} = sum_k brackets[i][j][k] e_k`` and
    ``{e_i, x_j} = anchor[i][j]``; anything given as an ``{exponent: coeff}``
    mapping over the ``n`` base variables is accepted.
    """
    if n < 1:
        raise ProblemError("base dimension must be at least 1")
    total = N + n
    sp = JetSpace(total, cap)

    def lift(obj) -> JetPoly:
        if isinstance(obj, JetPoly):
            if obj.space != sp:
                raise ProblemError("bracket coefficient lives in a different jet space")
            if obj.degrees_in(range(N)) - {0}:
                raise ProblemError("bracket coefficient depends on fiber variables")
            return obj
        if obj is None or obj == 0:
            return sp.zero()
        if isinstance(obj, dict):
            return sp.poly({(0,) * N + tuple(a): c for a, c in obj.items()})
        return sp.const(obj)

    comps = {}
    for i in range(N):
        for j in range(i + 1, N):
            terms = []
            for k in range(N):
                co = lift(brackets[i][j][k])
                if co:
                    terms.append(co * sp.var(k))
            comps[(i, j)] = jet_sum(sp, terms)
        for j in range(n):
            a = lift(anchor[i][j])
            if a.constant_term() != 0:
                raise ProblemError("anchor does not vanish at the origin", (i + 1, j + 1))
            comps[(i, N + j)] = a
    pi = JetBivector(sp, comps)
    # linear model: c from brackets at 0, a = (complement action, anchor linear part)
    r = total - m
    c = [[[lift(brackets[i][j][k]).constant_term() for k in range(m)] for j in range(m)] for i in range(m)]
    a = [[[fmpq(0)] * r for _ in range(r)] for _ in range(m)]
    for i in range(m):
        for al in range(N - m):
            for be in range(N - m):
                a[i][al][be] = lift(brackets[i][m + al][m + be]).constant_term()
        for j in range(n):
            lin = lift(anchor[i][j]).linear_part()
            for k in range(n):
                alpha = tuple(1 if t == N + k else 0 for t in range(total))
                a[i][N - m + j][N - m + k] = lin.coeff(alpha)
    try:
        data = StructureData(total, m, c, a)
    except StructureError as exc:
        raise ProblemError(str(exc)) from None
    return LeviProblem(data, pi, fiber=tuple(range(N)), check=check)


def transformation_algebroid(data: StructureData, cap: int) -> LeviProblem:
    """Action algebroid of ``g`` acting on ``R^m`` by its (co)adjoint matrices."""
    m = data.m
    brackets = [[[data.c[i][j][k] for k in range(m)] for j in range(m)] for i in range(m)]
    anchor = [[{tuple(1 if t == k else 0 for t in range(m)): data.c[i][j][k] for k in range(m)}
               for j in range(m)] for i in range(m)]
    return algebroid_to_poisson(m, m, m, brackets, anchor, cap)


# -- fixtures ---------------------------------------------------------------------------------

def random_poly(space: JetSpace, rng: random.Random, lo: int = 2, hi: int | None = None,
                density: float = 0.3, size: int = 3, variables: Sequence[int] | None = None,
                fiber: Sequence[int] | None = None, fiber_degree: int | None = None) -> JetPoly:
    hi = space.cap if hi is None else hi
    terms = {}
    allowed = set(range(space.n)) if variables is None else set(variables)
    for d in range(lo, hi + 1):
        for a in compositions(d, space.n):
            if any(e and i not in allowed for i, e in enumerate(a)):
                continue
            if fiber_degree is not None and sum(a[i] for i in fiber) != fiber_degree:
                continue
            if rng.random() < density:
                v = rng.randint(-size, size)
                if v:
                    terms[a] = fmpq(v, rng.choice((1, 1, 2, 3)))
    return space.poly(terms)


def random_diffeo(space: JetSpace, rng: random.Random, density: float = 0.3, size: int = 3,
                  hi: int | None = None) -> JetDiffeo:
    return JetDiffeo.from_displacement(space, [random_poly(space, rng, 2, hi, density, size)
                                               for _ in range(space.n)])


def fiberwise_diffeo(space: JetSpace, fiber: Sequence[int], rng: random.Random,
                     density: float = 0.3, size: int = 3) -> JetDiffeo:
    """``e -> e + (fiber-linear)``, ``x -> x + (base)``: preserves fiber-wise linearity."""
    fs = set(fiber)
    comps = []
    for i in range(space.n):
        if i in fs:
            comps.append(random_poly(space, rng, 2, None, density, size, fiber=fiber, fiber_degree=1))
        else:
            comps.append(random_poly(space, rng, 2, None, density, size, fiber=fiber, fiber_degree=0))
    return JetDiffeo.from_displacement(space, comps)


def perturbed_problem(data: StructureData, cap: int, seed: int, density: float = 0.3,
                      size: int = 3, hi: int | None = None) -> tuple[LeviProblem, JetDiffeo]:
    """Linear model pushed forward by a random order-2 diffeo; returns the problem and the diffeo."""
    sp = JetSpace(data.n, cap)
    rng = random.Random(seed)
    theta0 = random_diffeo(sp, rng, density, size, hi)
    pi = pushforward(linear_model(data, sp), theta0)
    return LeviProblem(data, pi), theta0


def perturbed_algebroid(data: StructureData, cap: int, seed: int, density: float = 0.3,
                        size: int = 3) -> tuple[LeviProblem, JetDiffeo]:
    base = transformation_algebroid(data, cap)
    rng = random.Random(seed)
    theta0 = fiberwise_diffeo(base.space, base.fiber, rng, density, size)
    pi = pushforward(base.pi, theta0)
    return LeviProblem(base.data, pi, fiber=base.fiber), theta0
