from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import rationals
from g2forge import family
from g2forge.exterior import OMEGA1, OMEGA2, OMEGA7, PHI, e, hodge_star, theta_action
from g2forge.g2core import compute_torsion, hodge_laplacian, ricci_generic
from g2forge.liealg import LieAlgebra, jacobi_residual

Z4 = [[0] * 4 for _ in range(4)]
matrices4 = st.lists(st.lists(rationals, min_size=4, max_size=4), min_size=4, max_size=4)
seeds = st.integers(0, 2**32 - 1)


def _generic_forms(spec):
    s = spec.structure()
    dphi = s.d(PHI)
    sdphi = hodge_star(dphi)
    dsdphi = s.d(sdphi)
    sphi = hodge_star(PHI)
    dsphi = s.d(sphi)
    sdsphi = hodge_star(dsphi)
    return {"dphi": dphi, "star_dphi": sdphi, "d_star_dphi": dsdphi,
            "star_d_star_dphi": hodge_star(dsdphi), "star_phi": sphi, "d_star_phi": dsphi,
            "star_d_star_phi": sdsphi, "d_star_d_star_phi": s.d(sdsphi)}


# -- construction and validation ---------------------------------------------

def test_builtins_are_valid_and_closed():
    for spec in (family.gs(Fraction(1, 3)), family.sa(Fraction(1, 2)), family.fr(), family.abelian_spec()):
        assert all(v == 0 for v in family.constraint_residuals(spec).values())
        assert spec.structure().is_closed(0)
        assert family.is_closed(spec, 0)


def test_builtin_lookup():
    assert family.builtin("gs", Fraction(1, 4)) == family.gs(Fraction(1, 4))
    assert family.builtin("flat").algebra == LieAlgebra()
    with pytest.raises(ValueError):
        family.builtin("nope")


def test_gs_brackets():
    g = family.gs(Fraction(1, 4)).algebra
    assert g.bracket(1, 3) == {6: -1} and g.bracket(1, 4) == {5: -1} and g.bracket(2, 3) == {5: -1}
    assert g.bracket(7, 1) == {1: Fraction(5, 8)} and g.bracket(7, 6) == {6: Fraction(3, 4)}


def test_printed_fr_signs_are_not_closed():
    # the literal bracket signs give a non-closed phi; the builtin uses the closed reading
    A = [[1, 0, 0, 0], [0, -1, 0, 0], [0, 0, -1, 0], [0, 0, 0, -1]]
    B = [row[:] for row in Z4]
    C = [row[:] for row in Z4]
    B[2][1] = -2   # [e1, e4] = -2 e5
    C[3][1] = 2    # [e2, e4] = 2 e6
    literal = family.FamilySpec(((0, 0), (0, 0)), tuple(map(tuple, A)), tuple(map(tuple, B)),
                                tuple(map(tuple, C)))
    assert jacobi_residual(literal.algebra) == 0
    assert not literal.structure().is_closed()
    fr = family.fr().algebra
    assert fr.bracket(1, 4) == {5: 2} and fr.bracket(2, 4) == {6: -2}


def test_constraint_errors():
    A = [[1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]
    B = [[1, 0, 0, 0], [0, -1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]
    with pytest.raises(family.TraceError):
        family.build_family_instance([[0, 0], [0, 0]], Z4, A, Z4)
    with pytest.raises(family.CommutatorError):
        family.build_family_instance([[0, 0], [0, 0]], [[0, 1, 0, 0]] + Z4[1:], B, Z4)
    with pytest.raises(family.FamilyError):
        family.build_family_instance([[0, 0], [0, 0]], Z4, B, [[0, 1, 0, 0]] + Z4[1:])


def test_float_specs_validate_with_tolerance():
    spec = family.gs(0.3)
    f = family.build_family_instance(spec.A1, spec.A, spec.B, spec.C)
    assert not f.is_exact()


def test_accessors_use_basis_labels():
    spec = family.gs(Fraction(1, 4))
    assert spec.x == Fraction(5, 8) and spec.a(3, 3) == Fraction(1, 8) and spec.a(6, 6) == Fraction(3, 4)
    assert spec.b(6, 3) == -1 and spec.c(5, 3) == -1


# -- theta on two-forms -------------------------------------------------------

@given(matrices4)
def test_theta_table_matches_action(M):
    for which, om in ((7, OMEGA7), (1, OMEGA1), (2, OMEGA2)):
        assert family.theta_omega(M, which) == theta_action(M, om)


@given(matrices4)
def test_upsilon_block_form(M):
    blk = family.upsilon_blocks(M)
    for name in ("M1", "M4"):
        X = blk[name]
        assert all(X[i][j] == -X[j][i] for i in range(3) for j in range(3))
    assert all(blk["M2t_block"][i][j] == blk["M2"][j][i] for i in range(3) for j in range(3))


def test_upsilon_coordinates_roundtrip():
    a = 3 * e(3, 4) - e(4, 6) + Fraction(1, 2) * e(5, 6)
    assert family.from_upsilon(family.upsilon_coordinates(a)) == a


def test_theta_upsilon_matrix_trace():
    M = [[1, 2, 0, 0], [0, 3, 0, 1], [0, 0, -1, 0], [5, 0, 0, 2]]
    T = family.theta_upsilon_matrix(M)
    assert sum(T[i][i] for i in range(6)) == -3 * 5


# -- closed forms vs the generic pipeline --------------------------------------

@given(seeds)
def test_derivative_forms_oracle(seed):
    spec = family.random_family_spec(np.random.default_rng(seed))
    generic = _generic_forms(spec)
    for name, form in family.specialized_derivative_forms(spec).as_dict().items():
        assert form == generic[name], name


@given(seeds)
def test_torsion_oracle(seed):
    spec = family.random_family_spec(np.random.default_rng(seed))
    gen = compute_torsion(spec.structure())
    fam = family.specialized_torsion(spec)
    assert (gen.tau0, gen.tau1, gen.tau2, gen.tau3) == (fam.tau0, fam.tau1, fam.tau2, fam.tau3)


@given(seeds)
def test_ricci_oracle(seed):
    spec = family.random_family_spec(np.random.default_rng(seed))
    fam = family.ricci_operator(spec).ricci_operator
    gen = ricci_generic(spec.algebra)
    assert all(fam[i][j] == gen[i][j] for i in range(7) for j in range(7))
    # no mixing between g0 = span{e1, e2, e7} and g1
    assert all(fam[i][j] == 0 for i in (0, 1, 6) for j in range(2, 6))


@given(seeds)
def test_closedness_predicates_oracle(seed):
    rng = np.random.default_rng(seed)
    spec = family.random_family_spec(rng) if seed % 2 else family.random_closed_diagonal_spec(rng).to_float()
    st = spec.structure()
    assert family.is_closed(spec) == st.is_closed()
    assert family.is_coclosed(spec) == st.is_coclosed()


def test_laplacian_oracle_on_builtins():
    for spec in (family.gs(Fraction(3, 7)), family.sa(Fraction(2, 3)), family.fr()):
        assert family.specialized_laplacian(spec) == hodge_laplacian(spec.structure(), PHI)


def test_tau0_includes_a1_terms():
    # x, y, z, w enter tau0 only through z - y
    A1 = [[0, 1], [-1, 0]]
    spec = family.build_family_instance(A1, Z4, Z4, Z4)
    assert family.specialized_torsion(spec).tau0 == compute_torsion(spec.structure()).tau0 != 0


# -- G_s and s_a ---------------------------------------------------------------

@given(rationals)
def test_gs_laplacian_closed_form(s):
    lap = hodge_laplacian(family.gs(s).structure(), PHI)
    expected = ((64 * s * s - 32 * s - 5) / 16 * e(1, 2, 7) + (64 * s * s + 32 * s - 5) / 16 * e(3, 4, 7)
                + Fraction(5, 2) * (e(1, 3, 5) - e(1, 4, 6) - e(2, 3, 6) + e(5, 6, 7)))
    assert lap == expected


@given(rationals)
def test_gs_ricci_diagonal(s):
    ric = family.ricci_operator(family.gs(s)).ricci_operator
    diag = [-25 - 24 * s, -5 - 24 * s, -25 + 24 * s, -5 + 24 * s, 10, -10, -15 - 64 * s * s]
    assert [ric[i][i] for i in range(7)] == [Fraction(d) / 16 for d in diag]


@given(rationals)
def test_pinching_closed_forms(p):
    assert family.pinching_functional(family.gs(p)) == family.F_gs(p)
    assert family.pinching_functional(family.sa(p)) == family.F_sa(p)


def test_pinching_values_and_flat():
    assert family.F_gs(0) == Fraction(75, 23)
    assert family.F_gs(Fraction(5, 8)) == Fraction(5, 2)
    assert family.F_sa(0) == Fraction(81, 17)
    assert family.F_gs(np.sqrt(15) / 8) == pytest.approx(135 / 49, abs=1e-12)
    with pytest.raises(family.FlatMetricError):
        family.pinching_functional(family.abelian_spec())
    assert family.ricci_operator(family.abelian_spec()).F_value is None


def test_pinching_bounded_and_decreasing_on_gs():
    vals = [family.F_gs(Fraction(k, 20)) for k in range(61)]
    assert all(v <= 7 for v in vals)
    assert all(a > b for a, b in zip(vals, vals[1:]))


@given(rationals)
def test_gs_isomorphism(s):
    br, moved = family.gs_isomorphism_residuals(s)
    assert br == 0 and moved == 0


def test_soliton_data_satisfy_equation():
    for spec, (c, D) in ((family.gs(Fraction(1, 4)), family.gs_soliton_data(Fraction(1, 4))),
                         (family.sa(Fraction(1, 3)), family.sa_soliton_data(Fraction(1, 3))),
                         (family.fr(), family.fr_soliton_data())):
        st = spec.structure()
        assert hodge_laplacian(st, PHI) == c * PHI - theta_action(D, PHI)


def test_center_spectrum_separates_gs_and_sa():
    gs_eigs = family.h_center_spectrum(family.gs(Fraction(1, 4)))
    sa_eigs = family.h_center_spectrum(family.sa(Fraction(1, 4)))
    assert len(gs_eigs) == len(sa_eigs) == 2
    assert not np.isclose(gs_eigs[0], gs_eigs[1])
    assert np.isclose(sa_eigs[0], sa_eigs[1])


# -- random generators and the eigenform scan --------------------------------

@given(seeds)
def test_random_family_spec_is_valid(seed):
    spec = family.random_family_spec(np.random.default_rng(seed))
    assert spec.is_exact()
    assert all(v == 0 for v in family.constraint_residuals(spec).values())


@given(seeds)
def test_closed_diagonal_sampler(seed):
    spec = family.random_closed_diagonal_spec(np.random.default_rng(seed))
    st = spec.structure()
    assert st.is_closed(1e-9)
    tau = compute_torsion(st).tau2
    assert {b for b, v in tau.items() if abs(v) > 1e-9} <= {(1, 2), (3, 4), (5, 6)}


def test_eigenform_scan_small():
    samples = family.eigenform_scan(20, seed=1)
    assert len(samples) == 20
    for x in samples:
        assert x.residual >= 0 and x.tau_norm >= 0
        if x.residual < 1e-8:
            assert x.tau_norm < 1e-8
