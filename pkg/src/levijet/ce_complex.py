"""Truncated Chevalley-Eilenberg complexes ``W (x) Lambda^j g*`` and their homotopies.

``W`` is a space of polynomial jets (functions or y-directed vector fields)
with ``g`` acting by Lie derivative along the linear fields ``X_i``.  The
action preserves polynomial degree and, more finely, the multidegree with
respect to the blocks of variables that the linear action mixes; each such
multidegree is a finite-dimensional submodule that we call a component.

On each component the Casimir ``Gamma`` splits the module into its kernel
(the invariants, a trivial module) and its image.  On the image,
``h = Gamma^+ sum_k rho(xi^k) iota_{xi_k}`` is a contracting homotopy because
``delta K + K delta = Gamma`` for ``K = sum_k rho(xi^k) iota_{xi_k}``.  On the
kernel we tensor the identity with a Hodge homotopy of ``Lambda^* g*``.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from math import comb
from typing import Sequence

from flint import fmpq, fmpq_mat

from .jets import (JetPoly, JetSpace, JetVectorField, compositions, jet_sum,
                   lie_bracket, linear_vector_field)
from .lie_core import StructureData, StructureError, casimir_element, casimir_operator
from .rational import ZERO, identity, is_zero_matrix, mat_equal, zeros

# Sign applied to the standard CE formula in cochain degree j -> j+1.  The
# flip in degree 2 makes the Jacobi-based cyclic identity for the error
# 2-cochain hold with a plus sign; the homotopies carry the same signs so that
# the homotopy identity is unaffected.
DIFFERENTIAL_SIGNS = (1, 1, -1)


class ModuleKind(str, Enum):
    FUNCTIONS = "functions"
    YFIELDS = "yfields"
    FIBERWISE_LINEAR = "fiberwise-linear"
    BASE_FUNCTIONS = "base-functions"

    @property
    def is_field(self) -> bool:
        return self is ModuleKind.YFIELDS


def subsets(m: int, j: int) -> list[tuple[int, ...]]:
    return list(itertools.combinations(range(m), j))


def sort_sign(idx: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Sign of the sorting permutation and the sorted tuple; sign 0 on repeats."""
    idx = list(idx)
    if len(set(idx)) < len(idx):
        return 0, ()
    sign = 1
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    return sign, tuple(idx)


def variable_blocks(L: Sequence[Sequence[Sequence]], n: int) -> list[list[int]]:
    """Connected components of the graph linking ``j`` and ``k`` when some ``L_i[j][k] != 0``."""
    parent = list(range(n))

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    for Li in L:
        for j in range(n):
            for k in range(n):
                if Li[j][k] != 0:
                    parent[find(j)] = find(k)
    groups: dict[int, list[int]] = {}
    for v in range(n):
        groups.setdefault(find(v), []).append(v)
    return sorted(groups.values())


@dataclass
class Component:
    key: tuple
    basis: list            # exponent tuples, or (exponent, target) pairs for fields
    generators: list[fmpq_mat]

    @property
    def size(self) -> int:
        return len(self.basis)

    @property
    def degree(self) -> int:
        b = self.basis[0]
        return sum(b[0] if isinstance(b[0], tuple) else b)


class ModuleSpec:
    """A jet module split into invariant components.

    ``fiber`` (algebroid mode) lists the fiber coordinates; it restricts
    ``FIBERWISE_LINEAR``/``BASE_FUNCTIONS`` and, for ``YFIELDS``, keeps only
    fiber directions with fiber-linear coefficients and base directions with
    base coefficients.
    """

    def __init__(self, data: StructureData, kind: ModuleKind | str, cap: int,
                 fiber: Sequence[int] | None = None, check: bool = True):
        self.data = data
        self.kind = ModuleKind(kind)
        self.cap = cap
        self.space = JetSpace(data.n, cap)
        self.fiber = tuple(sorted(fiber)) if fiber is not None else None
        if self.kind in (ModuleKind.FIBERWISE_LINEAR, ModuleKind.BASE_FUNCTIONS) and self.fiber is None:
            raise ValueError(f"{self.kind.value} module needs the fiber coordinates")
        self.L = data.linear_action()
        self.blocks = variable_blocks(self.L, data.n)
        self.block_of = {v: b for b, blk in enumerate(self.blocks) for v in blk}
        if self.fiber is not None:
            fs = set(self.fiber)
            for blk in self.blocks:
                if 0 < len(fs.intersection(blk)) < len(blk):
                    raise StructureError(f"linear action mixes fiber and base variables in block {blk}")
        self.fields = [linear_vector_field(self.space, Li) for Li in self.L]
        self.components = self._build_components()
        self.lookup = {}
        for ci, comp in enumerate(self.components):
            for bi, b in enumerate(comp.basis):
                self.lookup[self._basis_key(b)] = (ci, bi)
        if check:
            self.check_representation()

    # -- basis -----------------------------------------------------------------

    def _basis_key(self, b):
        if self.kind.is_field:
            alpha, target = b
            return (self.space.key(alpha), target)
        return self.space.key(b)

    def fiber_degree(self, alpha) -> int:
        return sum(alpha[v] for v in self.fiber)

    def _admissible(self, alpha, target=None) -> bool:
        if self.fiber is None:
            return True
        fd = self.fiber_degree(alpha)
        if self.kind is ModuleKind.FIBERWISE_LINEAR:
            return fd == 1
        if self.kind is ModuleKind.BASE_FUNCTIONS:
            return fd == 0
        if self.kind is ModuleKind.YFIELDS:
            return fd == (1 if target in self.fiber else 0)
        return True

    def multidegree(self, alpha) -> tuple[int, ...]:
        return tuple(sum(alpha[v] for v in blk) for blk in self.blocks)

    def targets(self) -> list[int]:
        return list(range(self.data.m, self.data.n))

    def _build_components(self) -> list[Component]:
        n = self.data.n
        groups: dict[tuple, list] = {}
        for deg in range(self.cap + 1):
            for alpha in compositions(deg, n):
                md = self.multidegree(alpha)
                if self.kind.is_field:
                    for t in self.targets():
                        if self._admissible(alpha, t):
                            groups.setdefault((md, self.block_of[t]), []).append((alpha, t))
                elif self._admissible(alpha):
                    groups.setdefault((md,), []).append(alpha)
        comps = []
        for key in sorted(groups, key=lambda k: (sum(k[0]), k)):
            basis = groups[key]
            index = {b: i for i, b in enumerate(basis)}
            gens = [self._generator(Li, basis, index) for Li in self.L]
            comps.append(Component(key, basis, gens))
        return comps

    def _act_monomial(self, Li, alpha) -> dict[tuple, fmpq]:
        """``X_i(z^alpha)`` as ``{exponent: coeff}``."""
        n = len(alpha)
        out: dict[tuple, fmpq] = {}
        for j in range(n):
            if not alpha[j]:
                continue
            for k in range(n):
                v = Li[j][k]
                if v == 0:
                    continue
                beta = list(alpha)
                beta[j] -= 1
                beta[k] += 1
                beta = tuple(beta)
                out[beta] = out.get(beta, ZERO) + v * alpha[j]
        return out

    def _generator(self, Li, basis, index) -> fmpq_mat:
        N = len(basis)
        M = zeros(N, N)
        for col, b in enumerate(basis):
            if self.kind.is_field:
                alpha, t = b
                img = {(beta, t): v for beta, v in self._act_monomial(Li, alpha).items()}
                for g in range(self.data.n):
                    v = Li[g][t]
                    if v != 0:
                        img[(alpha, g)] = img.get((alpha, g), ZERO) - v
            else:
                img = self._act_monomial(Li, b)
            for target, v in img.items():
                if v == 0:
                    continue
                row = index.get(target)
                if row is None:
                    raise StructureError(f"action leaves the module: {b} -> {target}")
                M[row, col] += v
        return M

    def check_representation(self):
        for comp in self.components:
            from .lie_core import check_representation
            bad = check_representation(self.data, comp.generators)
            if bad is not None:
                raise StructureError(f"component {comp.key}: bracket relation fails for {bad}")

    # -- jet <-> component vectors --------------------------------------------

    def zero_entry(self):
        if self.kind.is_field:
            return JetVectorField.zero(self.space)
        return self.space.zero()

    def act(self, i: int, entry):
        """``xi_i . entry``."""
        if self.kind.is_field:
            return lie_bracket(self.fields[i], entry)
        return self.fields[i].apply(entry)

    def decompose(self, entry) -> dict[int, list[fmpq]]:
        """Coordinates of a jet in every component it touches."""
        out: dict[int, list] = {}
        if self.kind.is_field:
            items = [((k, t), c) for t in range(self.data.n) for k, c in entry[t].terms.items()]
        else:
            items = list(entry.terms.items())
        for bk, c in items:
            loc = self.lookup.get(bk)
            if loc is None:
                raise ValueError(f"jet has a term outside the {self.kind.value} module: {bk}")
            ci, bi = loc
            vec = out.get(ci)
            if vec is None:
                vec = out[ci] = [ZERO] * self.components[ci].size
            vec[bi] = c
        return out

    def assemble(self, parts: dict[int, Sequence[fmpq]]):
        sp = self.space
        if self.kind.is_field:
            per: list[dict] = [dict() for _ in range(self.data.n)]
            for ci, vec in parts.items():
                for (alpha, t), v in zip(self.components[ci].basis, vec):
                    if v != 0:
                        per[t][sp.key(alpha)] = v
            return JetVectorField(sp, [JetPoly(sp, d) for d in per])
        d = {}
        for ci, vec in parts.items():
            for alpha, v in zip(self.components[ci].basis, vec):
                if v != 0:
                    d[sp.key(alpha)] = v
        return JetPoly(sp, d)


# -- cochains ----------------------------------------------------------------------

class Cochain:
    """Antisymmetric ``W``-valued ``j``-form on ``g``; stores sorted index tuples."""

    def __init__(self, degree: int, m: int, values: dict | None = None, zero=None):
        if not 0 <= degree <= 3:
            raise ValueError("cochain degree must be in 0..3")
        self.degree = degree
        self.m = m
        self.zero = zero
        self.values: dict[tuple, object] = {}
        for idx, v in (values or {}).items():
            sign, key = sort_sign(idx)
            if sign == 0 or len(key) != degree:
                continue
            v = v if sign > 0 else -v
            if key in self.values:
                v = self.values[key] + v
            self.values[key] = v

    def __getitem__(self, idx):
        sign, key = sort_sign(idx)
        if sign == 0:
            return self.zero
        v = self.values.get(key)
        if v is None:
            return self.zero
        return v if sign > 0 else -v

    def keys(self):
        return subsets(self.m, self.degree)

    def _zip(self, other, op):
        keys = set(self.values) | set(other.values)
        return Cochain(self.degree, self.m, {k: op(self[k], other[k]) for k in keys}, self.zero)

    def __add__(self, other):
        return self._zip(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._zip(other, lambda a, b: a - b)

    def __neg__(self):
        return Cochain(self.degree, self.m, {k: -v for k, v in self.values.items()}, self.zero)

    def map(self, fn) -> "Cochain":
        return Cochain(self.degree, self.m, {k: fn(v) for k, v in self.values.items()}, self.zero)

    def is_zero(self) -> bool:
        return all(v.is_zero() for v in self.values.values())

    def vanishing_order(self):
        from math import inf
        return min((v.vanishing_order() for v in self.values.values()), default=inf)

    def __eq__(self, other):
        if not isinstance(other, Cochain) or other.degree != self.degree:
            return NotImplemented
        return all(self[k] == other[k] for k in set(self.values) | set(other.values))

    def __repr__(self):
        return f"Cochain(degree={self.degree}, {self.values!r})"


def zero_cochain(spec: ModuleSpec, degree: int) -> Cochain:
    return Cochain(degree, spec.data.m, {}, spec.zero_entry())


def ce_differential(spec: ModuleSpec, w: Cochain) -> Cochain:
    """Signed CE differential evaluated directly on jets."""
    if w.degree > 2:
        raise ValueError("no differential out of cochain degree 3 in the truncated complex")
    data = spec.data
    m, j = data.m, w.degree
    sign = DIFFERENTIAL_SIGNS[j]
    out = {}
    acted: dict[tuple, object] = {}
    for I in subsets(m, j + 1):
        terms = []
        for a in range(j + 1):
            rest = I[:a] + I[a + 1:]
            key = (I[a], rest)
            if key not in acted:
                acted[key] = spec.act(I[a], w[rest])
            terms.append(acted[key] if a % 2 == 0 else -acted[key])
        for a in range(j + 1):
            for b in range(a + 1, j + 1):
                rest = I[:a] + I[a + 1:b] + I[b + 1:]
                s = -1 if (a + b) % 2 else 1
                for k, v in data.bracket(I[a], I[b]).items():
                    e = w[(k,) + rest]
                    terms.append(e.scale(s * v))
        total = spec.zero_entry()
        for t in terms:
            total = total + t
        out[I] = total if sign > 0 else -total
    return Cochain(j + 1, m, out, spec.zero_entry())


# -- trivial-coefficient Hodge homotopy -------------------------------------------

def trivial_differentials(data: StructureData) -> list[fmpq_mat]:
    """Matrices of the signed differential on ``Lambda^j g*`` (trivial coefficients), j=0..2."""
    m = data.m
    mats = []
    for j in range(3):
        src, dst = subsets(m, j), subsets(m, j + 1)
        col = {I: i for i, I in enumerate(src)}
        M = zeros(len(dst), len(src))
        for r, I in enumerate(dst):
            for a in range(j + 1):
                for b in range(a + 1, j + 1):
                    rest = I[:a] + I[a + 1:b] + I[b + 1:]
                    s = -1 if (a + b) % 2 else 1
                    for k, v in data.bracket(I[a], I[b]).items():
                        sg, key = sort_sign((k,) + rest)
                        if sg:
                            M[r, col[key]] += DIFFERENTIAL_SIGNS[j] * s * sg * v
        mats.append(M)
    return mats


def hodge_homotopies(data: StructureData) -> list[fmpq_mat]:
    """``[H0, H1, H2]`` with ``H_j: Lambda^{j+1} -> Lambda^j``."""
    d0, d1, d2 = trivial_differentials(data)
    lap1 = d0 * d0.transpose() + d1.transpose() * d1
    lap2 = d1 * d1.transpose() + d2.transpose() * d2
    if lap1.det() == 0 or lap2.det() == 0:
        raise StructureError("trivial-coefficient cohomology in degree 1 or 2 is nonzero")
    lap1i, lap2i = lap1.inv(), lap2.inv()
    return [d0.transpose() * lap1i, d1.transpose() * lap2i, lap2i * d2.transpose()]


# -- Casimir splitting ------------------------------------------------------------

def _poly_eval(coeffs: Sequence[fmpq], M: fmpq_mat) -> fmpq_mat:
    """Horner evaluation of ``sum coeffs[k] x^k`` at a square matrix."""
    N = M.nrows()
    I = identity(N)
    acc = zeros(N, N)
    for c in reversed(coeffs):
        acc = acc * M
        if c != 0:
            acc += c * I
    return acc


def casimir_split(G: fmpq_mat) -> tuple[fmpq_mat, fmpq_mat]:
    """Kernel projector ``P0`` and pseudo-inverse ``G^+`` (inverse on the image, 0 on the kernel).

    Uses the minimal polynomial ``p``: if ``p(0) != 0`` then ``G`` is invertible;
    otherwise ``p = x q`` with ``q(0) != 0`` (semisimple at 0), ``P0 = q(G)/q(0)``
    and ``G^+ = r(G)(I - P0)`` where ``r(x) = (1 - q(x)/q(0))/x``.
    """
    N = G.nrows()
    if N == 0:
        return zeros(0, 0), zeros(0, 0)
    p = G.minpoly()
    coeffs = [fmpq(c) for c in p.coeffs()]
    if coeffs[0] != 0:
        return zeros(N, N), G.inv()
    qc = coeffs[1:]
    if qc[0] == 0:
        raise StructureError("Casimir matrix is not semisimple on this component")
    q0 = qc[0]
    P0 = _poly_eval(qc, G) * (1 / q0)
    rc = [-c / q0 for c in qc[1:]]
    Gp = _poly_eval(rc, G) * (identity(N) - P0)
    return P0, Gp


@dataclass
class ComponentTables:
    P0: fmpq_mat
    Gplus: fmpq_mat
    K: list[fmpq_mat]          # Gamma^+ rho(xi^k)
    trivial_dim: int


class HomotopyTables:
    """Per-component homotopy data for one module.

    ``casimir_scale`` multiplies every ``Gamma^+`` and exists only for fault
    injection in tests; any value other than 1 breaks the homotopy identity.
    """

    def __init__(self, spec: ModuleSpec, casimir_scale=1):
        self.spec = spec
        data = spec.data
        self.element = casimir_element(data)
        self.hodge = hodge_homotopies(data)
        self.comps: list[ComponentTables] = []
        for comp in spec.components:
            G = casimir_operator(data, comp.generators, self.element, check=False)
            P0, Gp = casimir_split(G)
            for g in comp.generators:
                if not is_zero_matrix(g * P0):
                    raise StructureError(f"component {comp.key}: Casimir kernel is not g-invariant-trivial")
            if casimir_scale != 1:
                Gp = Gp * fmpq(casimir_scale)
            duals = self.element.dual_generators(comp.generators)
            K = [Gp * dk for dk in duals]
            self.comps.append(ComponentTables(P0, Gp, K, P0.rank()))

    # -- component-level operators -------------------------------------------

    def apply_component(self, ci: int, j: int, vecs: dict[tuple, fmpq_mat]) -> dict[tuple, fmpq_mat]:
        """``h`` on one component: ``vecs`` maps sorted ``(j+1)``-tuples to column vectors."""
        m = self.spec.data.m
        t = self.comps[ci]
        sign = DIFFERENTIAL_SIGNS[j]
        out: dict[tuple, fmpq_mat] = {}
        N = t.P0.nrows()
        src = subsets(m, j + 1)
        H = self.hodge[j]
        proj = {}
        if t.trivial_dim:
            proj = {J: t.P0 * v for J, v in vecs.items()}
        for r, I in enumerate(subsets(m, j)):
            acc = zeros(N, 1)
            touched = False
            for k in range(m):
                sg, key = sort_sign((k,) + I)
                if not sg or key not in vecs:
                    continue
                acc += (sign * sg) * (t.K[k] * vecs[key])
                touched = True
            if t.trivial_dim:
                for c, J in enumerate(src):
                    hv = H[r, c]
                    if hv != 0 and J in proj:
                        acc += hv * proj[J]
                        touched = True
            if touched:
                out[I] = acc
        return out

    def homotopy(self, w: Cochain) -> Cochain:
        """``h_{j-1}`` applied to a jet cochain of degree ``j``."""
        if w.degree == 0:
            raise ValueError("no homotopy out of cochain degree 0")
        spec = self.spec
        j = w.degree - 1
        per_comp: dict[int, dict[tuple, fmpq_mat]] = {}
        for I, entry in w.values.items():
            for ci, vec in spec.decompose(entry).items():
                per_comp.setdefault(ci, {})[I] = fmpq_mat(len(vec), 1, vec)
        results: dict[tuple, dict[int, list]] = {}
        for ci, vecs in per_comp.items():
            for I, v in self.apply_component(ci, j, vecs).items():
                results.setdefault(I, {})[ci] = v.entries()
        values = {I: spec.assemble(parts) for I, parts in results.items()}
        return Cochain(j, spec.data.m, values, spec.zero_entry())


def homotopy(tables: HomotopyTables, w: Cochain) -> Cochain:
    return tables.homotopy(w)


# -- full-matrix verification ------------------------------------------------------

def _block_matrix(rows: int, cols: int, N: int, blocks: dict) -> fmpq_mat:
    """Assemble ``(rows*N) x (cols*N)`` from ``{(r, c): [(coeff, N x N matrix or None)]}``.

    ``None`` stands for the identity block.
    """
    width = cols * N
    flat = [ZERO] * (rows * N * width)
    for (r, c), parts in blocks.items():
        for coeff, B in parts:
            if B is None:
                for e in range(N):
                    pos = (r * N + e) * width + c * N + e
                    flat[pos] += coeff
                continue
            ent = B.entries()
            for a in range(N):
                base = (r * N + a) * width + c * N
                row = ent[a * N:(a + 1) * N]
                for b, v in enumerate(row):
                    if v != 0:
                        flat[base + b] += coeff * v
    return fmpq_mat(rows * N, width, flat)


def component_differential(spec: ModuleSpec, ci: int, j: int) -> fmpq_mat:
    """Block matrix of the signed differential ``C^j -> C^{j+1}`` on one component."""
    data = spec.data
    comp = spec.components[ci]
    N, m = comp.size, data.m
    src, dst = subsets(m, j), subsets(m, j + 1)
    col = {I: i for i, I in enumerate(src)}
    sgn = DIFFERENTIAL_SIGNS[j]
    blocks: dict = {}
    for r, I in enumerate(dst):
        for a in range(j + 1):
            rest = I[:a] + I[a + 1:]
            blocks.setdefault((r, col[rest]), []).append((sgn * (-1 if a % 2 else 1), comp.generators[I[a]]))
        for a in range(j + 1):
            for b in range(a + 1, j + 1):
                rest = I[:a] + I[a + 1:b] + I[b + 1:]
                s = -1 if (a + b) % 2 else 1
                for k, v in data.bracket(I[a], I[b]).items():
                    sg, key = sort_sign((k,) + rest)
                    if sg:
                        blocks.setdefault((r, col[key]), []).append((sgn * s * sg * v, None))
    return _block_matrix(len(dst), len(src), N, blocks)


def component_homotopy(tables: HomotopyTables, ci: int, j: int) -> fmpq_mat:
    """Block matrix of ``h_j: C^{j+1} -> C^j`` on one component."""
    m = tables.spec.data.m
    N = tables.spec.components[ci].size
    t = tables.comps[ci]
    src, dst = subsets(m, j + 1), subsets(m, j)
    col = {J: i for i, J in enumerate(src)}
    sign = DIFFERENTIAL_SIGNS[j]
    H = tables.hodge[j]
    blocks: dict = {}
    for r, I in enumerate(dst):
        for k in range(m):
            sg, key = sort_sign((k,) + I)
            if sg:
                blocks.setdefault((r, col[key]), []).append((sign * sg, t.K[k]))
        if t.trivial_dim:
            for c in range(len(src)):
                if H[r, c] != 0:
                    blocks.setdefault((r, c), []).append((H[r, c], t.P0))
    return _block_matrix(len(dst), len(src), N, blocks)


@dataclass
class HomotopyCheck:
    component: tuple
    degree: int
    cochain_degree: int
    passed: bool
    witness: object = None


@dataclass
class HomotopyReport:
    checks: list[HomotopyCheck] = field(default_factory=list)
    sample_checks: list[HomotopyCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks) and all(c.passed for c in self.sample_checks)

    def failures(self):
        return [c for c in self.checks + self.sample_checks if not c.passed]

    def by_degree(self) -> dict[int, dict[int, bool]]:
        """``{polynomial degree: {cochain degree: passed}}``."""
        out: dict[int, dict[int, bool]] = {}
        for c in self.checks:
            row = out.setdefault(c.degree, {})
            row[c.cochain_degree] = row.get(c.cochain_degree, True) and c.passed
        return out


def random_entry(spec: ModuleSpec, rng: random.Random, lo: int = 0, density: float = 0.5, size: int = 3):
    """Random jet in the module with terms of degree ``>= lo``."""
    parts = {}
    for ci, comp in enumerate(spec.components):
        if comp.degree < lo:
            continue
        vec = [fmpq(rng.randint(-size, size)) if rng.random() < density else ZERO for _ in comp.basis]
        parts[ci] = vec
    return spec.assemble(parts)


def random_cochain(spec: ModuleSpec, degree: int, rng: random.Random, lo: int = 0,
                   density: float = 0.5) -> Cochain:
    vals = {I: random_entry(spec, rng, lo, density) for I in subsets(spec.data.m, degree)}
    return Cochain(degree, spec.data.m, vals, spec.zero_entry())


def verify_homotopy_identity(tables: HomotopyTables, spec: ModuleSpec | None = None,
                             samples: int = 0, seed: int = 0) -> HomotopyReport:
    """Exact check of ``delta h + h delta = Id`` in cochain degrees 1 and 2.

    Matrix route: the identity on the full basis of every component.
    Jet route: ``samples`` random cochains pushed through the jet-level
    differential and homotopy.
    """
    spec = spec or tables.spec
    report = HomotopyReport()
    for ci, comp in enumerate(spec.components):
        d = [component_differential(spec, ci, j) for j in range(3)]
        h = [component_homotopy(tables, ci, j) for j in range(3)]
        for j in (1, 2):
            lhs = d[j - 1] * h[j - 1] + h[j] * d[j]
            size = lhs.nrows()
            ok = mat_equal(lhs, identity(size))
            witness = None
            if not ok:
                diff = lhs - identity(size)
                bad = next(c for c in range(size) for r in range(size) if diff[r, c] != 0)
                I = subsets(spec.data.m, j)[bad // comp.size]
                witness = {"index": I, "basis": comp.basis[bad % comp.size]}
            report.checks.append(HomotopyCheck(comp.key, comp.degree, j, ok, witness))
    rng = random.Random(seed)
    for s in range(samples):
        for j in (1, 2):
            u = random_cochain(spec, j, rng)
            lhs = ce_differential(spec, tables.homotopy(u)) + tables.homotopy(ce_differential(spec, u))
            ok = lhs == u
            report.sample_checks.append(HomotopyCheck(("sample", s), -1, j, ok, None if ok else u))
    return report


@dataclass
class CohomologyRow:
    degree: int
    dims: list[int]        # dim C^j restricted to this degree
    ranks: list[int]       # rank of delta_j
    invariants: int

    @property
    def cohomology(self) -> list[int]:
        out = []
        for j in range(4):
            ker = self.dims[j] - (self.ranks[j] if j < 3 else 0)
            im = self.ranks[j - 1] if j else 0
            out.append(ker - im)
        return out


def cohomology_table(spec: ModuleSpec, tables: HomotopyTables | None = None) -> list[CohomologyRow]:
    """Dimensions of cochains, ranks of ``delta`` and cohomology per polynomial degree."""
    rows: dict[int, CohomologyRow] = {}
    m = spec.data.m
    for ci, comp in enumerate(spec.components):
        row = rows.setdefault(comp.degree, CohomologyRow(comp.degree, [0] * 4, [0] * 3, 0))
        for j in range(4):
            row.dims[j] += comp.size * comb(m, j)
        for j in range(3):
            row.ranks[j] += component_differential(spec, ci, j).rank()
        if tables is not None:
            row.invariants += tables.comps[ci].trivial_dim
    return [rows[d] for d in sorted(rows)]
