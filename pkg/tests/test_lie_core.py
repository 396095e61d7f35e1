import itertools

import pytest
from flint import fmpq, fmpq_mat

from levijet.ce_complex import ModuleKind, ModuleSpec
from levijet.lie_core import (ANTISYMMETRY, JACOBI, KILLING, REPRESENTATION, StructureData,
                              StructureError, casimir_element, casimir_operator, direct_sum,
                              killing_form, so3, so3_semidirect_r3, trivial_generators,
                              validate_structure)
from levijet.rational import identity, is_zero_matrix, mat_equal, nullspace, zeros


def test_so3_passes_every_check():
    rep = validate_structure(so3())
    assert rep.passed
    assert [c.name for c in rep.checks] == [ANTISYMMETRY, JACOBI, REPRESENTATION, KILLING]


def test_abelian_fails_killing():
    zero = [[[0] * 3 for _ in range(3)] for _ in range(3)]
    rep = validate_structure(StructureData(3, 3, zero, [[] for _ in range(3)]))
    assert not rep[KILLING].passed
    assert rep[ANTISYMMETRY].passed and rep[JACOBI].passed


def test_one_sided_flip_breaks_antisymmetry():
    c = [[list(row) for row in plane] for plane in so3().c]
    c[0][1][2] = -1      # c_21^3 still -1
    rep = validate_structure(StructureData(3, 3, c, [[] for _ in range(3)]))
    assert not rep[ANTISYMMETRY].passed
    assert rep[ANTISYMMETRY].witness == (1, 2, 3)


@pytest.mark.parametrize("idx", list(itertools.product(range(3), repeat=3)))
def test_any_single_flip_is_caught(idx):
    c = [[list(row) for row in plane] for plane in so3().c]
    i, j, k = idx
    c[i][j][k] = c[i][j][k] + 1
    assert not validate_structure(StructureData(3, 3, c, [[] for _ in range(3)])).passed


def test_broken_complement_representation():
    data = so3_semidirect_r3()
    a = [[list(row) for row in plane] for plane in data.a]
    a[0][1][2] += 1
    rep = validate_structure(StructureData(6, 3, data.c, a))
    assert not rep[REPRESENTATION].passed and rep[REPRESENTATION].witness is not None


def test_shape_errors():
    with pytest.raises(StructureError):
        StructureData(3, 3, [[[0]]], [[] for _ in range(3)])
    with pytest.raises(StructureError):
        StructureData(2, 3, so3().c, [])


def test_killing_so3_is_minus_two():
    assert mat_equal(killing_form(so3()), -2 * identity(3))


def test_killing_abelian_line():
    B = killing_form(StructureData(1, 1, [[[0]]], [[]]))
    assert B.nrows() == 1 and B[0, 0] == 0


def test_killing_scales_quadratically():
    # xi_i -> 2 xi_i rescales c by 2 in the new basis
    c = [[[2 * v for v in row] for row in plane] for plane in so3().c]
    B = killing_form(StructureData(3, 3, c, [[] for _ in range(3)]))
    assert mat_equal(B, 4 * killing_form(so3()))


def test_casimir_adjoint_is_identity():
    data = so3()
    G = casimir_operator(data, data.adjoint_matrices())
    assert mat_equal(G, identity(3))


def test_casimir_trivial_module_is_zero():
    data = so3()
    assert is_zero_matrix(casimir_operator(data, trivial_generators(data, 2)))


def test_casimir_degree_two_kernel_is_radial():
    spec = ModuleSpec(so3(), ModuleKind.FUNCTIONS, 2)
    comp = next(c for c in spec.components if c.degree == 2)
    G = casimir_operator(spec.data, comp.generators)
    ker = nullspace(G)
    assert len(ker) == 1
    vec = dict(zip(comp.basis, ker[0]))
    squares = {(2, 0, 0), (0, 2, 0), (0, 0, 2)}
    nonzero = {b for b, v in vec.items() if v != 0}
    assert nonzero == squares
    assert len({vec[b] for b in squares}) == 1


def test_casimir_commutes_and_is_invertible_off_kernel():
    data = so3_semidirect_r3()
    spec = ModuleSpec(data, ModuleKind.YFIELDS, 3)
    for comp in spec.components:
        G = casimir_operator(data, comp.generators)
        for A in comp.generators:
            assert mat_equal(G * A, A * G)
        # G restricted to its image is invertible: rank(G) == rank(G^2)
        assert (G * G).rank() == G.rank()


def test_casimir_requires_semisimple():
    zero = [[[0] * 2 for _ in range(2)] for _ in range(2)]
    with pytest.raises(StructureError):
        casimir_element(StructureData(2, 2, zero, [[], []]))


def test_casimir_rejects_non_representation():
    data = so3()
    gens = [m for m in data.adjoint_matrices()]
    gens[0] = gens[0] * 2
    with pytest.raises(StructureError):
        casimir_operator(data, gens)


def test_direct_sum_is_valid():
    data = direct_sum(so3(), so3_semidirect_r3())
    assert data.n == 9 and data.m == 6
    assert validate_structure(data).passed
