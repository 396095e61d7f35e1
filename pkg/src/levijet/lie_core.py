"""Structure constants of a Lie algebra with a compact semisimple part.

Index conventions (0-based in code, 1-based in report witnesses):

* ``c[i][j][k]``: ``[x_i, x_j] = sum_k c[i][j][k] x_k`` for the semisimple part
  ``g`` of dimension ``m``.
* ``a[i][al][be]``: ``[x_i, y_al] = sum_be a[i][al][be] y_be`` for the action
  of ``g`` on the invariant complement of dimension ``n - m``.

Generator matrices follow the column convention: the matrix of ``ad x_i`` on
``g`` has entry ``[k, j] = c[i][j][k]``.  With that convention the matrices
form a representation, ``[M_i, M_j] = sum_k c[i][j][k] M_k``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from flint import fmpq, fmpq_mat

from .rational import ZERO, is_negative_definite, mat_equal, q, zeros


class StructureError(ValueError):
    pass


@dataclass(frozen=True)
class StructureData:
    n: int
    m: int
    c: tuple
    a: tuple

    def __post_init__(self):
        if not 1 <= self.m <= self.n:
            raise StructureError(f"need 1 <= m <= n, got n={self.n}, m={self.m}")
        m, r = self.m, self.n - self.m
        c = _freeze3(self.c, "c")
        a = _freeze3(self.a, "a")
        if len(c) != m or any(len(row) != m or any(len(v) != m for v in row) for row in c):
            raise StructureError(f"c must have shape ({m},{m},{m})")
        if len(a) != m or any(len(row) != r or any(len(v) != r for v in row) for row in a):
            raise StructureError(f"a must have shape ({m},{r},{r})")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "a", a)

    @property
    def r(self) -> int:
        return self.n - self.m

    def bracket(self, i: int, j: int) -> dict[int, fmpq]:
        """``[xi_i, xi_j]`` as a sparse coefficient map."""
        return {k: v for k, v in enumerate(self.c[i][j]) if v != 0}

    def adjoint_matrices(self) -> list[fmpq_mat]:
        m = self.m
        out = []
        for i in range(m):
            M = zeros(m, m)
            for j in range(m):
                for k in range(m):
                    M[k, j] = self.c[i][j][k]
            out.append(M)
        return out

    def complement_matrices(self) -> list[fmpq_mat]:
        r = self.r
        out = []
        for i in range(self.m):
            M = zeros(r, r)
            for al in range(r):
                for be in range(r):
                    M[be, al] = self.a[i][al][be]
            out.append(M)
        return out

    def linear_action(self) -> list[list[list[fmpq]]]:
        """Coefficients ``L[i][j][k]`` of ``X_i = sum_jk L[i][j][k] z_k d/dz_j``.

        ``X_i`` is the Hamiltonian vector field of ``x_i`` for the linear
        Poisson structure; it generates the coadjoint action of ``g`` on all
        ``n`` coordinates.
        """
        n, m = self.n, self.m
        out = []
        for i in range(m):
            L = [[ZERO] * n for _ in range(n)]
            for j in range(m):
                for k in range(m):
                    L[j][k] = self.c[i][j][k]
            for al in range(self.r):
                for be in range(self.r):
                    L[m + al][m + be] = self.a[i][al][be]
            out.append(L)
        return out


def _freeze3(arr, name):
    try:
        return tuple(tuple(tuple(q(v) for v in row) for row in plane) for plane in arr)
    except TypeError as exc:
        raise StructureError(f"{name}: {exc}") from None


@dataclass
class Check:
    name: str
    passed: bool
    witness: tuple | None = None
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


ANTISYMMETRY = "antisymmetry"
JACOBI = "jacobi"
REPRESENTATION = "complement representation"
KILLING = "Killing form negative definite"


def validate_structure(data: StructureData) -> ValidationReport:
    m, r = data.m, data.r
    c, a = data.c, data.a
    report = ValidationReport()

    witness = None
    for i, j, k in itertools.product(range(m), repeat=3):
        if c[i][j][k] != -c[j][i][k]:
            witness = (i + 1, j + 1, k + 1)
            break
    report.checks.append(Check(ANTISYMMETRY, witness is None, witness))

    witness = None
    for i, j, k, v in itertools.product(range(m), repeat=4):
        s = sum(
            (c[i][j][u] * c[u][k][v] + c[j][k][u] * c[u][i][v] + c[k][i][u] * c[u][j][v]
             for u in range(m)),
            ZERO,
        )
        if s != 0:
            witness = (i + 1, j + 1, k + 1, v + 1)
            break
    report.checks.append(Check(JACOBI, witness is None, witness))

    witness = None
    if r:
        mats = data.complement_matrices()
        for i in range(m):
            for j in range(i + 1, m):
                lhs = mats[i] * mats[j] - mats[j] * mats[i]
                rhs = zeros(r, r)
                for k in range(m):
                    if c[i][j][k] != 0:
                        rhs += c[i][j][k] * mats[k]
                if not mat_equal(lhs, rhs):
                    bad = next((be, al) for be in range(r) for al in range(r) if lhs[be, al] != rhs[be, al])
                    witness = (i + 1, j + 1, bad[1] + 1, bad[0] + 1)
                    break
            if witness:
                break
    report.checks.append(Check(REPRESENTATION, witness is None, witness))

    B = killing_form(data)
    neg = is_negative_definite(B)
    report.checks.append(Check(KILLING, neg, None if neg else (), "" if neg else "not negative definite"))
    return report


def killing_form(data: StructureData) -> fmpq_mat:
    m, c = data.m, data.c
    B = zeros(m, m)
    for i in range(m):
        for j in range(m):
            B[i, j] = sum((c[i][k][l] * c[j][l][k] for k in range(m) for l in range(m)), ZERO)
    return B


@dataclass(frozen=True)
class CasimirElement:
    gram: fmpq_mat
    dual_coeffs: fmpq_mat

    def dual_generators(self, generators: Sequence[fmpq_mat]) -> list[fmpq_mat]:
        """``rho(xi^i) = sum_j dual_coeffs[i, j] rho(xi_j)``."""
        m = len(generators)
        size = generators[0].nrows()
        out = []
        for i in range(m):
            acc = zeros(size, size)
            for j in range(m):
                d = self.dual_coeffs[i, j]
                if d != 0:
                    acc += d * generators[j]
            out.append(acc)
        return out


def casimir_element(data: StructureData) -> CasimirElement:
    B = killing_form(data)
    if B.det() == 0:
        raise StructureError("Killing form is singular; g is not semisimple")
    # B is symmetric, so the inverse gives the B-dual basis directly.
    return CasimirElement(B, B.inv())


def check_representation(data: StructureData, generators: Sequence[fmpq_mat]) -> tuple | None:
    """Return a failing ``(i, j)`` (1-based) or None if the bracket relation holds."""
    m = data.m
    for i in range(m):
        for j in range(i + 1, m):
            lhs = generators[i] * generators[j] - generators[j] * generators[i]
            size = lhs.nrows()
            rhs = zeros(size, size)
            for k, v in data.bracket(i, j).items():
                rhs += v * generators[k]
            if not mat_equal(lhs, rhs):
                return (i + 1, j + 1)
    return None


def casimir_operator(data: StructureData, generators: Sequence[fmpq_mat],
                     element: CasimirElement | None = None, check: bool = True) -> fmpq_mat:
    """Matrix of ``sum_i rho(xi_i) rho(xi^i)`` on the module given by ``generators``."""
    if len(generators) != data.m:
        raise StructureError(f"expected {data.m} generator matrices, got {len(generators)}")
    element = element or casimir_element(data)
    if check:
        bad = check_representation(data, generators)
        if bad is not None:
            raise StructureError(f"generators are not a representation; witness {bad}")
    size = generators[0].nrows()
    duals = element.dual_generators(generators)
    G = zeros(size, size)
    for g, d in zip(generators, duals):
        G += g * d
    return G


# -- standard examples -------------------------------------------------------

def levi_civita(i: int, j: int, k: int) -> int:
    if len({i, j, k}) < 3:
        return 0
    return 1 if (i, j, k) in ((0, 1, 2), (1, 2, 0), (2, 0, 1)) else -1


def so3() -> StructureData:
    c = [[[levi_civita(i, j, k) for k in range(3)] for j in range(3)] for i in range(3)]
    return StructureData(3, 3, c, [[] for _ in range(3)])


def so3_semidirect_r3() -> StructureData:
    """``so(3) x| R^3`` with the complement carrying the vector representation."""
    eps = [[[levi_civita(i, j, k) for k in range(3)] for j in range(3)] for i in range(3)]
    return StructureData(6, 3, eps, eps)


def direct_sum(first: StructureData, second: StructureData) -> StructureData:
    """Semisimple parts summed; complements summed with each factor acting on its own."""
    m1, m2 = first.m, second.m
    r1, r2 = first.r, second.r
    m, r = m1 + m2, r1 + r2
    c = [[[ZERO] * m for _ in range(m)] for _ in range(m)]
    a = [[[ZERO] * r for _ in range(r)] for _ in range(m)]
    for i, j, k in itertools.product(range(m1), repeat=3):
        c[i][j][k] = first.c[i][j][k]
    for i, j, k in itertools.product(range(m2), repeat=3):
        c[m1 + i][m1 + j][m1 + k] = second.c[i][j][k]
    for i in range(m1):
        for al, be in itertools.product(range(r1), repeat=2):
            a[i][al][be] = first.a[i][al][be]
    for i in range(m2):
        for al, be in itertools.product(range(r2), repeat=2):
            a[m1 + i][r1 + al][r1 + be] = second.a[i][al][be]
    return StructureData(m + r, m, c, a)


def trivial_generators(data: StructureData, size: int = 1) -> list[fmpq_mat]:
    return [zeros(size, size) for _ in range(data.m)]

