from fractions import Fraction

import numpy as np
import pytest

from g2forge import family
from g2forge.exterior import KForm, blades, e, wedge
from g2forge.liealg import (
    LieAlgebra, abelian, ce_differential, center, derivation_residual, derivation_space,
    is_subalgebra, is_unimodular, jacobi_residual, matrix_bracket_residual,
)

HEIS = LieAlgebra([(1, 2, 3, 1)])


def test_bracket_antisymmetry_and_ad():
    g = LieAlgebra([(2, 1, 3, 5)])
    assert g.bracket(1, 2) == {3: -5}
    assert g.ad(1)[2][1] == -5
    assert g.bracket_vectors([1, 0, 0, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0, 0])[2] == -5


def test_constructor_validation():
    with pytest.raises(ValueError):
        LieAlgebra([(1, 8, 2, 1)])
    with pytest.raises(ValueError):
        LieAlgebra([(1, 1, 2, 1)])
    with pytest.raises(ValueError):
        LieAlgebra.from_ad_matrices({1: [[0] * 7 for _ in range(7)],
                                     2: [[0] * 7 for _ in range(7)]} | _clash())


def _clash():
    A = [[0] * 7 for _ in range(7)]
    B = [[0] * 7 for _ in range(7)]
    A[2][1] = 1  # [e1, e2] = e3
    B[2][0] = 1  # [e2, e1] = e3, inconsistent with the above
    return {1: A, 2: B}


def test_from_ad_matrices_roundtrip():
    g = family.gs(Fraction(1, 3)).algebra
    assert LieAlgebra.from_ad_matrices({i: g.ad(i) for i in range(1, 8)}) == g


def test_differential_sign_convention():
    # d e^3 (e1, e2) = -e^3([e1, e2]) = -1
    assert ce_differential(HEIS, e(3)) == -e(1, 2)


@pytest.mark.parametrize("spec", [family.gs(Fraction(1, 4)), family.sa(Fraction(3, 4)), family.fr()],
                         ids=["gs", "sa", "fr"])
def test_d_squared_and_jacobi(spec):
    g = spec.algebra
    assert jacobi_residual(g) == 0
    for k in range(1, 6):
        for b in blades(k):
            assert ce_differential(g, ce_differential(g, KForm(k, {b: 1}))).is_zero(0)


def test_leibniz_rule():
    g = family.gs(Fraction(1, 2)).algebra
    a, b = e(1) + 2 * e(3), e(4, 7) - e(2, 5)
    lhs = ce_differential(g, a ^ b)
    rhs = wedge(ce_differential(g, a), b) - wedge(a, ce_differential(g, b))
    assert lhs == rhs


def test_jacobi_failure_detected():
    bad = LieAlgebra([(1, 2, 3, 1), (3, 4, 5, 1)])
    assert jacobi_residual(bad) > 0


def _dense_derivation_dim(g):
    # D[x,y] - [Dx,y] - [x,Dy] as a linear map on 7x7 matrices, built from c[k,i,j]
    c = g.structure_array()
    rows = []
    for r in range(7):
        for s in range(7):
            D = np.zeros((7, 7))
            D[r, s] = 1.0
            rows.append((np.einsum("mk,kij->mij", D, c) - np.einsum("lj,mil->mij", D, c)
                         - np.einsum("li,mlj->mij", D, c)).ravel())
    return 49 - np.linalg.matrix_rank(np.array(rows).T)


def test_derivation_space_dimensions():
    assert derivation_space(abelian()).dim == 49
    for g in (HEIS, family.gs(Fraction(1, 4)).algebra, family.fr().algebra):
        space = derivation_space(g)
        assert space.exact and space.dim == _dense_derivation_dim(g)
        for D in space.basis:
            assert derivation_residual(g, D) == 0


def test_derivation_space_float_matches_exact():
    spec = family.gs(Fraction(1, 4))
    exact = derivation_space(spec.algebra)
    fl = derivation_space(spec.to_float().algebra)
    assert fl.dim == exact.dim and not fl.exact


def test_soliton_derivations_are_derivations():
    for s in (Fraction(0), Fraction(1, 3)):
        _, D = family.gs_soliton_data(s)
        assert derivation_residual(family.gs(s).algebra, D) == 0


def test_subalgebra_unimodular_center():
    g = family.gs(Fraction(1, 4)).algebra
    h = (1, 2, 3, 4, 5, 6)
    assert is_subalgebra(g, h)
    assert is_unimodular(g, h)
    assert not is_unimodular(g)
    with pytest.raises(ValueError):
        is_unimodular(g, (1, 3))
    zs = center(g, h)
    assert len(zs) == 2  # span{e5, e6}


def test_matrix_bracket_residual_identity():
    g = family.sa(Fraction(1, 2)).algebra
    I = [[int(i == j) for j in range(7)] for i in range(7)]
    assert matrix_bracket_residual(g, g, I) == 0
