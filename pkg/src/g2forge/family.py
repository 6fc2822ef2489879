"""The G_{A1,A,B,C} family of solvable Lie algebras with the standard G2 form.

Brackets: ``A1 = ad e7 | span{e1,e2}``, ``A = ad e7 | g1``, ``B = ad e1 | g1``,
``C = ad e2 | g1`` with g1 = span{e3..e6} an abelian ideal.  4x4 matrices use
rows/columns 1..4 for the basis vectors e3..e6; the ``m(i, j)`` accessors
below take the 3..6 labels instead.

The closed-form expressions here are written against the 2-forms of g1 and
the theta representation only; :mod:`g2forge.g2core` recomputes everything
from the bracket and is used as the oracle in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

from . import _linalg
from .exterior import (
    OMEGA1,
    OMEGA2,
    OMEGA7,
    PHI,
    UPSILON,
    KForm,
    e,
    pullback,
    star_g1,
    wedge,
)
from .g2core import G2Structure, TorsionForms
from .liealg import LieAlgebra, center, jacobi_residual, matrix_bracket_residual


class FamilyError(ValueError):
    """A FamilySpec violates one of its defining constraints."""


class TraceError(FamilyError):
    pass


class CommutatorError(FamilyError):
    pass


class JacobiError(FamilyError):
    pass


class FlatMetricError(ValueError):
    """The pinching functional is undefined because Ric = 0."""


Matrix = tuple


def _mat(M, n: int) -> Matrix:
    rows = tuple(tuple(M[i][j] for j in range(n)) for i in range(n))
    if len(M) != n or any(len(r) != n for r in M):
        raise ValueError(f"expected a {n}x{n} matrix")
    return rows


def _mul(X, Y):
    n = len(X)
    return [[sum(X[i][k] * Y[k][j] for k in range(n)) for j in range(n)] for i in range(n)]


def _add(X, Y, a=1, b=1):
    return [[a * x + b * y for x, y in zip(rx, ry)] for rx, ry in zip(X, Y)]


def _t(X):
    return [list(r) for r in zip(*X)]


def _tr(X):
    return sum((X[i][i] for i in range(len(X))), 0)


def _comm(X, Y):
    return _add(_mul(X, Y), _mul(Y, X), 1, -1)


def _sym(X):
    return [[Fraction(1, 2) * (X[i][j] + X[j][i]) for j in range(len(X))] for i in range(len(X))]


def _max_abs(X) -> float:
    return max((abs(float(v)) for r in X for v in r), default=0.0)


@dataclass(frozen=True)
class FamilySpec:
    A1: Matrix
    A: Matrix
    B: Matrix
    C: Matrix
    label: str = ""

    @property
    def x(self):
        return self.A1[0][0]

    @property
    def z(self):
        return self.A1[0][1]

    @property
    def y(self):
        return self.A1[1][0]

    @property
    def w(self):
        return self.A1[1][1]

    def entries(self):
        for M in (self.A1, self.A, self.B, self.C):
            for r in M:
                yield from r

    def is_exact(self) -> bool:
        return _linalg.all_exact(self.entries())

    def to_float(self) -> "FamilySpec":
        f = lambda M: tuple(tuple(float(v) for v in r) for r in M)
        return FamilySpec(f(self.A1), f(self.A), f(self.B), f(self.C), self.label)

    @cached_property
    def algebra(self) -> LieAlgebra:
        consts = []
        x, y, z, w = self.x, self.y, self.z, self.w
        consts += [(7, 1, 1, x), (7, 1, 2, y), (7, 2, 1, z), (7, 2, 2, w)]
        for src, M in ((7, self.A), (1, self.B), (2, self.C)):
            for i in range(4):
                for j in range(4):
                    if M[j][i] != 0:
                        consts.append((src, i + 3, j + 3, M[j][i]))
        return LieAlgebra(consts)

    def structure(self) -> G2Structure:
        return G2Structure(self.algebra)

    def a(self, i: int, j: int):
        return self.A[i - 3][j - 3]

    def b(self, i: int, j: int):
        return self.B[i - 3][j - 3]

    def c(self, i: int, j: int):
        return self.C[i - 3][j - 3]


def constraint_residuals(spec: FamilySpec) -> dict[str, float]:
    A, B, C = spec.A, spec.B, spec.C
    return {
        "trace B": abs(float(_tr(B))),
        "trace C": abs(float(_tr(C))),
        "[A,B] = xB + yC": _max_abs(_add(_comm(A, B), _add(B, C, spec.x, spec.y), 1, -1)),
        "[A,C] = zB + wC": _max_abs(_add(_comm(A, C), _add(B, C, spec.z, spec.w), 1, -1)),
        "[B,C] = 0": _max_abs(_comm(B, C)),
        "jacobi": float(jacobi_residual(spec.algebra)),
    }


def build_family_instance(A1, A, B, C, label: str = "", tol: float = 1e-9) -> FamilySpec:
    """Validated FamilySpec; raises a named FamilyError subclass on violation."""
    spec = FamilySpec(_mat(A1, 2), _mat(A, 4), _mat(B, 4), _mat(C, 4), label)
    exact = spec.is_exact()
    bad = lambda r: r != 0 if exact else r > tol
    res = constraint_residuals(spec)
    for name in ("trace B", "trace C"):
        if bad(res[name]):
            raise TraceError(f"{name} = {res[name]:g}, must vanish for h to be unimodular")
    for name in ("[A,B] = xB + yC", "[A,C] = zB + wC", "[B,C] = 0"):
        if bad(res[name]):
            raise CommutatorError(f"constraint {name} violated (residual {res[name]:g})")
    if bad(res["jacobi"]):
        raise JacobiError(f"Jacobi identity fails (residual {res['jacobi']:g})")
    return spec


# -- built-in instances -------------------------------------------------------

def _diag(*vals):
    n = len(vals)
    return [[vals[i] if i == j else 0 for j in range(n)] for i in range(n)]


def _q(v):
    return Fraction(v) if isinstance(v, (int, Fraction)) else v


def gs(s) -> FamilySpec:
    """The shrinking-soliton family G_s."""
    s = _q(s)
    h = Fraction(1, 8)
    A1 = _diag(3 * h + s, -h + s)
    A = _diag(3 * h - s, -h - s, Fraction(1, 4), Fraction(3, 4))
    B = [[0, 0, 0, 0], [0, 0, 0, 0], [0, -1, 0, 0], [-1, 0, 0, 0]]
    C = [[0, 0, 0, 0], [0, 0, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 0]]
    return build_family_instance(A1, A, B, C, label=f"gs:{s}")


def sa(a) -> FamilySpec:
    """Lauret's family s_a."""
    a = _q(a)
    q = Fraction(1, 4)
    A1 = _diag(q * (1 + 4 * a), q * (1 + 4 * a))
    A = _diag(q * (1 - 4 * a), q * (1 - 4 * a), Fraction(1, 2), Fraction(1, 2))
    B = [[0, 0, 0, 0], [0, 0, 0, 0], [0, -1, 0, 0], [-1, 0, 0, 0]]
    C = [[0, 0, 0, 0], [0, 0, 0, 0], [-1, 0, 0, 0], [0, 1, 0, 0]]
    return build_family_instance(A1, A, B, C, label=f"sa:{a}")


def fr() -> FamilySpec:
    """The Fino-Raffero steady soliton g_FR: [e1,e4] = 2e5, [e2,e4] = -2e6.

    These bracket signs are the ones for which phi is closed with
    A = Diag(1, -1, -1, -1); flipping them instead forces A -> -A.
    """
    A1 = _diag(0, 0)
    A = _diag(1, -1, -1, -1)
    B = [[0, 0, 0, 0], [0, 0, 0, 0], [0, 2, 0, 0], [0, 0, 0, 0]]
    C = [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, -2, 0, 0]]
    return build_family_instance(A1, A, B, C, label="fr")


def abelian_spec() -> FamilySpec:
    Z2, Z4 = _diag(0, 0), _diag(0, 0, 0, 0)
    return build_family_instance(Z2, Z4, Z4, Z4, label="flat")


def builtin(name: str, param=None) -> FamilySpec:
    name = name.lower()
    if name == "gs":
        return gs(param)
    if name == "sa":
        return sa(param)
    if name == "fr":
        return fr()
    if name in ("flat", "abelian"):
        return abelian_spec()
    raise ValueError(f"unknown built-in instance {name!r}")


def gs_isomorphism() -> list[list[int]]:
    """h_s: g_s -> g_{-s}, swapping e1e2 with e3e4, negating e5, e6, fixing e7."""
    h = [[0] * 7 for _ in range(7)]
    h[2][0] = h[3][1] = h[0][2] = h[1][3] = 1
    h[4][4] = h[5][5] = -1
    h[6][6] = 1
    return h


def gs_isomorphism_residuals(s) -> tuple[object, object]:
    """(bracket intertwining residual, max |h.phi - phi|) for h_s."""
    h = gs_isomorphism()
    bracket = matrix_bracket_residual(gs(s).algebra, gs(-_q(s)).algebra, h)
    # h is an involution, so h.phi = (h^{-1})^* phi = h^* phi
    moved = pullback(h, PHI) - PHI
    return bracket, moved.max_abs()


# -- theta on the 2-forms of g1 -----------------------------------------------

def theta_omega(M, which: int) -> KForm:
    """theta(M) omega_i for i in {7, 1, 2}, written out coefficient by coefficient."""
    m = lambda i, j: M[i - 3][j - 3]
    if which == 7:
        c = {
            (3, 4): -(m(3, 3) + m(4, 4)),
            (3, 5): m(6, 3) - m(4, 5),
            (3, 6): -(m(4, 6) + m(5, 3)),
            (4, 5): m(6, 4) + m(3, 5),
            (4, 6): m(3, 6) - m(5, 4),
            (5, 6): -(m(5, 5) + m(6, 6)),
        }
    elif which == 1:
        c = {
            (3, 4): -(m(5, 4) + m(6, 3)),
            (3, 5): -(m(3, 3) + m(5, 5)),
            (3, 6): m(4, 3) - m(5, 6),
            (4, 5): m(6, 5) - m(3, 4),
            (4, 6): m(4, 4) + m(6, 6),
            (5, 6): m(4, 5) + m(3, 6),
        }
    elif which == 2:
        c = {
            (3, 4): m(6, 4) - m(5, 3),
            (3, 5): m(4, 3) + m(6, 5),
            (3, 6): m(3, 3) + m(6, 6),
            (4, 5): m(4, 4) + m(5, 5),
            (4, 6): m(5, 6) + m(3, 4),
            (5, 6): m(3, 5) - m(4, 6),
        }
    else:
        raise ValueError(f"no omega_{which}")
    return KForm(2, c)


def _theta_g1_two_form(M, a: KForm) -> KForm:
    """theta(M) on 2-forms of g1 from theta(M) e^{i+2} = -sum_j M_ij e^{j+2}."""
    one = lambda i: KForm(1, {(j + 3,): -M[i - 3][j] for j in range(4)})
    out = KForm.zero(2)
    for (p, q), v in a.items():
        out = out + v * (wedge(one(p), e(q)) + wedge(e(p), one(q)))
    return out


_G1_BLADES = ((3, 4), (3, 5), (3, 6), (4, 5), (4, 6), (5, 6))


@lru_cache(maxsize=None)
def _upsilon_rows() -> tuple:
    """Row i holds the coefficients of Upsilon[i] on the g1 blades."""
    return tuple(tuple(u[b] for b in _G1_BLADES) for u in UPSILON)


def upsilon_coordinates(a: KForm) -> list:
    """Coordinates of a 2-form on g1 in the orthogonal basis Upsilon (|u|^2 = 2)."""
    vals = [a[b] for b in _G1_BLADES]
    half = Fraction(1, 2)
    return [half * sum(r * v for r, v in zip(row, vals) if r) for row in _upsilon_rows()]


def from_upsilon(coords: Sequence) -> KForm:
    rows = _upsilon_rows()
    return KForm(2, {b: sum(c * rows[i][k] for i, c in enumerate(coords) if rows[i][k])
                     for k, b in enumerate(_G1_BLADES)})


@lru_cache(maxsize=None)
def _theta_unit_images() -> tuple:
    """theta(E_pq) in the basis Upsilon for the 16 matrix units E_pq."""
    out = []
    for p in range(4):
        row = []
        for q in range(4):
            E = [[int((i, j) == (p, q)) for j in range(4)] for i in range(4)]
            cols = [upsilon_coordinates(_theta_g1_two_form(E, u)) for u in UPSILON]
            row.append(tuple(tuple(cols[j][i] for j in range(6)) for i in range(6)))
        out.append(tuple(row))
    return tuple(out)


def theta_upsilon_matrix(M) -> list[list]:
    """6x6 matrix of theta(M) on Lambda^2 g1* in the ordered basis Upsilon."""
    units = _theta_unit_images()
    T = [[0] * 6 for _ in range(6)]
    for p in range(4):
        for q in range(4):
            m = M[p][q]
            if m == 0:
                continue
            U = units[p][q]
            for i in range(6):
                for j in range(6):
                    if U[i][j]:
                        T[i][j] += m * U[i][j]
    return T


def upsilon_blocks(M) -> dict[str, list[list]]:
    """M1, M2, M4 of the block form, with the -tr(M)/2 shift removed."""
    T = theta_upsilon_matrix(M)
    half = Fraction(1, 2) * _tr(M)
    M1 = [[T[i][j] + (half if i == j else 0) for j in range(3)] for i in range(3)]
    M4 = [[T[i + 3][j + 3] + (half if i == j else 0) for j in range(3)] for i in range(3)]
    M2 = [[T[i][j + 3] for j in range(3)] for i in range(3)]
    M2t = [[T[i + 3][j] for j in range(3)] for i in range(3)]
    return {"M1": M1, "M2": M2, "M2t_block": M2t, "M4": M4}


class _Theta:
    """theta(M) on g1 2-forms through the Upsilon matrix, cached per matrix."""

    def __init__(self, M):
        self.M = M
        self.T = theta_upsilon_matrix(M)

    def __call__(self, a: KForm) -> KForm:
        v = upsilon_coordinates(a)
        return from_upsilon([sum(self.T[i][j] * v[j] for j in range(6)) for i in range(6)])


# -- closed-form derivatives --------------------------------------------------

@dataclass(frozen=True)
class DerivativeForms:
    dphi: KForm
    star_dphi: KForm
    d_star_dphi: KForm
    star_d_star_dphi: KForm
    star_phi: KForm
    d_star_phi: KForm
    star_d_star_phi: KForm
    d_star_d_star_phi: KForm

    def as_dict(self) -> dict[str, KForm]:
        return dict(self.__dict__)


def _thetas(spec: FamilySpec):
    th = {n: _Theta(M) for n, M in (("A", spec.A), ("B", spec.B), ("C", spec.C))}
    tht = {n: _Theta(_t(M)) for n, M in (("A", spec.A), ("B", spec.B), ("C", spec.C))}
    return th, tht


def _g1_triple_to_4form(g12: KForm, g17: KForm, g27: KForm) -> KForm:
    return wedge(g12, e(1, 2)) + wedge(g17, e(1, 7)) + wedge(g27, e(2, 7))


def specialized_derivative_forms(spec: FamilySpec) -> DerivativeForms:
    th, tht = _thetas(spec)
    A, B, C = th["A"], th["B"], th["C"]
    At, Bt, Ct = tht["A"], tht["B"], tht["C"]
    x, y, z, w = spec.x, spec.y, spec.z, spec.w
    trA, trA1 = _tr(spec.A), x + w
    w7, w1, w2 = OMEGA7, OMEGA1, OMEGA2

    # d phi = d12 ^ e12 + d17 ^ e17 + d27 ^ e27
    d12 = B(w2) - C(w1)
    d17 = B(w7) - A(w1) + x * w1 + y * w2
    d27 = C(w7) - A(w2) + z * w1 + w * w2
    dphi = _g1_triple_to_4form(d12, d17, d27)

    # *d phi = b7 ^ e7 + b2 ^ e2 + b1 ^ e1
    b7 = -Bt(w2) + Ct(w1)
    b2 = Bt(w7) - At(w1) - (trA + x) * w1 - y * w2
    b1 = -Ct(w7) + At(w2) + (trA + w) * w2 + z * w1
    star_dphi = wedge(b7, e(7)) + wedge(b2, e(2)) + wedge(b1, e(1))

    # d*d phi; the x, y, z, w terms come from d e1 and d e2
    g12 = B(b2) - C(b1)
    g17 = B(b7) - A(b1) + x * b1 + y * b2
    g27 = C(b7) - A(b2) + z * b1 + w * b2
    d_star_dphi = _g1_triple_to_4form(g12, g17, g27)

    # *d*d phi, with *_{g1} theta(M) = -theta(M^t) *_{g1} - tr M *_{g1}
    sb1, sb2, sb7 = d27, -d17, d12  # *_{g1} of b1, b2, b7
    star_d_star_dphi = (
        wedge(-Bt(sb2) + Ct(sb1), e(7))
        - wedge(-Bt(sb7) + At(sb1) + trA * sb1 + x * sb1 + y * sb2, e(2))
        + wedge(-Ct(sb7) + At(sb2) + trA * sb2 + z * sb1 + w * sb2, e(1))
    )

    star_phi = e(3, 4, 5, 6) + wedge(w7, e(1, 2)) + wedge(w1, e(2, 7)) - wedge(w2, e(1, 7))
    inner_term = A(w7) - trA1 * w7 + B(w1) + C(w2)
    d_star_phi = -trA * e(3, 4, 5, 6, 7) + wedge(inner_term, e(1, 2, 7))
    star_d_star_phi = -trA * e(1, 2) + star_g1(inner_term)
    alpha = (trA1 + trA) * w7 + At(w7) + Bt(w1) + Ct(w2)
    d_star_d_star_phi = (
        trA1 * trA * e(1, 2, 7)
        - wedge(A(alpha), e(7))
        - wedge(B(alpha), e(1))
        - wedge(C(alpha), e(2))
    )
    return DerivativeForms(
        dphi, star_dphi, d_star_dphi, star_d_star_dphi,
        star_phi, d_star_phi, star_d_star_phi, d_star_d_star_phi,
    )


def specialized_laplacian(spec: FamilySpec) -> KForm:
    f = specialized_derivative_forms(spec)
    return -f.d_star_d_star_phi + f.star_d_star_dphi


def closedness_conditions(spec: FamilySpec) -> tuple[KForm, KForm, KForm]:
    th, _ = _thetas(spec)
    A, B, C = th["A"], th["B"], th["C"]
    x, y, z, w = spec.x, spec.y, spec.z, spec.w
    return (
        A(OMEGA1) - B(OMEGA7) - x * OMEGA1 - y * OMEGA2,
        A(OMEGA2) - C(OMEGA7) - z * OMEGA1 - w * OMEGA2,
        B(OMEGA2) - C(OMEGA1),
    )


def coclosedness_conditions(spec: FamilySpec) -> tuple[object, KForm]:
    th, _ = _thetas(spec)
    trA1 = spec.x + spec.w
    return (
        _tr(spec.A),
        th["A"](OMEGA7) + th["B"](OMEGA1) + th["C"](OMEGA2) - trA1 * OMEGA7,
    )


def is_closed(spec: FamilySpec, tol: float = 1e-9) -> bool:
    return all(r.is_zero(tol) for r in closedness_conditions(spec))


def is_coclosed(spec: FamilySpec, tol: float = 1e-9) -> bool:
    tr, form = coclosedness_conditions(spec)
    return abs(float(tr)) <= tol and form.is_zero(tol)


# -- torsion from the coefficients --------------------------------------------

def specialized_torsion(spec: FamilySpec) -> TorsionForms:
    a, b, c = spec.a, spec.b, spec.c
    x, y, z, w = spec.x, spec.y, spec.z, spec.w
    trA, trA1 = _tr(spec.A), x + w
    F = Fraction

    tau0 = F(2, 7) * (
        a(3, 4) - a(4, 3) + a(5, 6) - a(6, 5) + b(3, 5) + b(6, 4) - b(5, 3) - b(4, 6)
        + c(5, 4) + c(6, 3) - c(4, 5) - c(3, 6) + z - y
    )
    l2 = F(-1, 12) * (a(6, 4) + a(3, 5) - a(4, 6) - a(5, 3) + b(4, 3) + b(6, 5) - b(3, 4) - b(5, 6))
    l1 = F(-1, 12) * (a(3, 6) + a(4, 5) - a(6, 3) - a(5, 4) + c(5, 6) + c(3, 4) - c(6, 5) - c(4, 3))
    l7 = F(-1, 12) * (
        b(6, 3) + b(5, 4) - b(3, 6) - b(4, 5) + c(4, 6) + c(5, 3) - c(6, 4) - c(3, 5)
        + 2 * (trA1 + trA)
    )
    tau1 = KForm(1, {(1,): l1, (2,): l2, (7,): l7})

    t = F(1, 3)
    tau2 = KForm(2, {
        (1, 2): t * (trA - 2 * trA1 + b(4, 5) + b(3, 6) - b(5, 4) - b(6, 3)
                     + c(3, 5) + c(6, 4) - c(5, 3) - c(4, 6)),
        (1, 7): t * (a(6, 4) + a(3, 5) - a(4, 6) - a(5, 3) + b(6, 5) + b(4, 3) - b(5, 6) - b(3, 4)),
        (2, 7): t * (a(5, 4) + a(6, 3) - a(4, 5) - a(3, 6) + c(6, 5) + c(4, 3) - c(5, 6) - c(3, 4)),
        (3, 4): t * (trA1 - 2 * a(3, 3) - 2 * a(4, 4) + a(5, 5) + a(6, 6) + 2 * c(4, 6)
                     - 2 * c(3, 5) - 2 * b(4, 5) - 2 * b(3, 6) - c(5, 3) + c(6, 4) - b(6, 3) - b(5, 4)),
        (3, 5): t * (-2 * a(5, 4) + 2 * a(3, 6) + 2 * c(5, 6) + 2 * c(3, 4) + a(6, 3) - a(4, 5)
                     + c(6, 5) + c(4, 3) - 3 * b(5, 5) - 3 * b(3, 3)),
        (3, 6): t * (-2 * a(6, 4) - 2 * a(3, 5) - 2 * b(6, 5) + 2 * b(3, 4) - a(4, 6) - a(5, 3)
                     - b(5, 6) + b(4, 3) + 3 * c(6, 6) + 3 * c(3, 3)),
        (4, 5): t * (a(6, 4) + a(3, 5) + b(6, 5) - b(3, 4) + 2 * a(4, 6) + 2 * a(5, 3)
                     + 2 * b(5, 6) - 2 * b(4, 3) + 3 * c(5, 5) + 3 * c(4, 4)),
        (4, 6): t * (-a(5, 4) + a(3, 6) + c(5, 6) + c(3, 4) + 2 * a(6, 3) - 2 * a(4, 5)
                     + 2 * c(6, 5) + 2 * c(4, 3) + 3 * b(6, 6) + 3 * b(4, 4)),
        (5, 6): t * (trA1 + a(3, 3) + a(4, 4) - 2 * a(5, 5) - 2 * a(6, 6) - c(4, 6) + c(3, 5)
                     + b(4, 5) + b(3, 6) + 2 * c(5, 3) - 2 * c(6, 4) + 2 * b(6, 3) + 2 * b(5, 4)),
    })

    _, tht = _thetas(spec)
    At, Bt, Ct = tht["A"], tht["B"], tht["C"]
    w7, w1, w2 = OMEGA7, OMEGA1, OMEGA2
    tau3 = (
        -tau0 * e(1, 2, 7)
        + wedge(-Bt(w2) + Ct(w1) - tau0 * w7 - 3 * l1 * w2 + 3 * l2 * w1, e(7))
        + wedge(Bt(w7) - At(w1) - (trA + x + 3 * l7) * w1 + (-y - tau0) * w2 + 3 * l1 * w7, e(2))
        + wedge(-Ct(w7) + At(w2) + (z - tau0) * w1 + (trA + w + 3 * l7) * w2 - 3 * l2 * w7, e(1))
    )
    return TorsionForms(tau0, tau1, tau2, tau3)


# -- Ricci operator -----------------------------------------------------------

G0_ORDER = (7, 1, 2)


@dataclass(frozen=True)
class RicciData:
    ricci_operator: tuple  # 7x7 rows, basis order e1..e7
    scalar_curvature: object
    ricci_norm2: object
    F_value: object | None  # None when the metric is flat

    @property
    def ricci_norm(self) -> float:
        return math.sqrt(float(self.ricci_norm2))

    def diagonal(self) -> list:
        return [self.ricci_operator[i][i] for i in range(7)]


def ricci_blocks(spec: FamilySpec) -> tuple[list[list], list[list]]:
    """(Ric on g1 in e3..e6, Ric on g0 in the order e7, e1, e2)."""
    A, B, C, A1 = spec.A, spec.B, spec.C, spec.A1
    trA1, trA = _tr(A1), _tr(A)
    SA, SB, SC, SA1 = _sym(A), _sym(B), _sym(C), _sym(A1)
    half = Fraction(1, 2)
    g1 = _add(
        [[half * v for v in r] for r in _add(_add(_comm(A, _t(A)), _comm(B, _t(B))), _comm(C, _t(C)))],
        SA, 1, -(trA1 + trA),
    )
    low = _add(
        [[-_tr(_mul(SB, SB)), -_tr(_mul(SB, C))], [-_tr(_mul(SB, C)), -_tr(_mul(SC, SC))]],
        _add([[half * v for v in r] for r in _comm(A1, _t(A1))], SA1, 1, -(trA1 + trA)),
    )
    r77 = -_tr(_mul(SA, SA)) - _tr(_mul(SA1, SA1))
    r71, r72 = -_tr(_mul(SA, B)), -_tr(_mul(SA, C))
    g0 = [[r77, r71, r72], [r71, low[0][0], low[0][1]], [r72, low[1][0], low[1][1]]]
    return g1, g0


def ricci_operator(spec: FamilySpec) -> RicciData:
    g1, g0 = ricci_blocks(spec)
    ric = [[Fraction(0)] * 7 for _ in range(7)]
    for i in range(4):
        for j in range(4):
            ric[i + 2][j + 2] = g1[i][j]
    for p, ip in enumerate(G0_ORDER):
        for q, iq in enumerate(G0_ORDER):
            ric[ip - 1][iq - 1] = g0[p][q]
    scal = _tr(ric)
    norm2 = sum(v * v for r in ric for v in r)
    F = scal * scal / norm2 if norm2 != 0 else None
    return RicciData(tuple(tuple(r) for r in ric), scal, norm2, F)


def pinching_functional(spec: FamilySpec):
    data = ricci_operator(spec)
    if data.F_value is None:
        raise FlatMetricError("Ric = 0: the pinching functional is undefined")
    return data.F_value


def F_gs(s):
    """Closed form of F along G_s."""
    s = _q(s)
    return (75 + 64 * s**2) ** 2 / (1725 + 4224 * s**2 + 4096 * s**4)


def F_sa(a):
    """Closed form of F along s_a."""
    a = _q(a)
    return (27 + 16 * a**2) ** 2 / (153 + 352 * a**2 + 256 * a**4)


def gs_soliton_data(s) -> tuple[object, list[list]]:
    """Closed-form (c_s, D_s) of the Laplacian soliton on G_s (7x7, e1..e7)."""
    s = _q(s)
    c = Fraction(-15, 8) + 8 * s * s
    q = Fraction(1, 32)
    d = [45 - 32 * s - 64 * s * s, 5 - 32 * s - 64 * s * s, 45 + 32 * s - 64 * s * s,
         5 + 32 * s - 64 * s * s, 50 - 128 * s * s, 90 - 128 * s * s, 0]
    return c, _diag(*(q * v for v in d))


def sa_soliton_data(a) -> tuple[object, list[list]]:
    """Closed-form (c_a, D_a) of the Laplacian soliton on s_a."""
    a = _q(a)
    c = Fraction(-9, 2) + 8 * a * a
    q = Fraction(1, 8)
    d = [15 - 8 * a - 16 * a * a, 15 - 8 * a - 16 * a * a, 15 + 8 * a - 16 * a * a,
         15 + 8 * a - 16 * a * a, 30 - 32 * a * a, 30 - 32 * a * a, 0]
    return c, _diag(*(q * v for v in d))


def fr_soliton_data() -> tuple[object, list[list]]:
    return Fraction(0), _diag(0, 0, -4, 4, 4, 4, 0)


def h_center_spectrum(spec: FamilySpec) -> list[complex]:
    """Eigenvalues of ad e7 on the center of h = span{e1..e6}."""
    g = spec.algebra
    basis = center(g, (1, 2, 3, 4, 5, 6))
    if not basis:
        return []
    V = np.array([[float(v) for v in b] + [0.0] for b in basis]).T  # 7 x m
    ad7 = np.array(g.ad(7), dtype=float)
    coords, *_ = np.linalg.lstsq(V, ad7 @ V, rcond=None)
    return sorted(np.linalg.eigvals(coords).tolist(), key=lambda v: (v.real, v.imag))


# -- random instances ---------------------------------------------------------

def _rand_q(rng, lo=-3, hi=3, den=(1, 2, 4)) -> Fraction:
    return Fraction(int(rng.integers(lo, hi + 1)), int(rng.choice(den)))


def _unimodular(rng, n: int):
    """Random integer matrix with determinant 1 and its exact inverse."""
    P = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for _ in range(3 * n):
        i, j = rng.choice(n, size=2, replace=False)
        f = int(rng.integers(-1, 2))
        P = [[P[r][c] + (f * P[j][c] if r == i else 0) for c in range(n)] for r in range(n)]
    rows = [list(r) + [Fraction(int(i == k)) for k in range(n)] for i, r in enumerate(P)]
    red, _ = _linalg.rref(rows, 2 * n)
    Pinv = [r[n:] for r in red]
    return P, Pinv


def random_family_spec(rng: np.random.Generator, exact: bool = True) -> FamilySpec:
    """A random valid FamilySpec, generic enough to exercise every coefficient.

    Brackets are first chosen in an eigenbasis of A (where the Jacobi
    constraints reduce to eigenvalue differences) and then moved by random
    unimodular changes of basis of g1 and of span{e1, e2}.
    """
    while True:
        if rng.random() < 0.25:
            A = [[_rand_q(rng) for _ in range(4)] for _ in range(4)]
            A1 = [[_rand_q(rng) for _ in range(2)] for _ in range(2)]
            Z = [[0] * 4 for _ in range(4)]
            spec = build_family_instance(A1, A, Z, Z)
            break
        diag = [_rand_q(rng, -2, 2, (1, 2)) for _ in range(4)]
        pairs = [(p, q) for p in range(4) for q in range(4) if p != q]
        p, q = pairs[rng.integers(len(pairs))]
        x = diag[p] - diag[q]
        p, q = pairs[rng.integers(len(pairs))]
        w = diag[p] - diag[q]
        B = [[_rand_q(rng) if i != j and diag[i] - diag[j] == x and rng.random() < 0.8 else 0
              for j in range(4)] for i in range(4)]
        C = [[_rand_q(rng) if i != j and diag[i] - diag[j] == w and rng.random() < 0.8 else 0
              for j in range(4)] for i in range(4)]
        if _max_abs(_comm(B, C)) != 0:
            continue
        if not any(v for r in B for v in r) and not any(v for r in C for v in r):
            continue
        A = _diag(*diag)
        P, Pi = _unimodular(rng, 4)
        conj = lambda M: _mul(_mul(P, M), Pi)
        A, B, C = conj(A), conj(B), conj(C)
        Q, Qi = _unimodular(rng, 2)
        B2 = _add(B, C, Q[0][0], Q[1][0])
        C2 = _add(B, C, Q[0][1], Q[1][1])
        A1 = _mul(_mul(Qi, _diag(x, w)), Q)
        spec = build_family_instance(A1, A, B2, C2)
        break
    return spec if exact else spec.to_float()


# -- closed instances with diagonal-type torsion ------------------------------

# tau2 components that must vanish for tau2 = a e12 + b e34 + c e56
_OFF_DIAGONAL_TAU2 = ((1, 7), (2, 7), (3, 5), (3, 6), (4, 5), (4, 6))
# With A, A1 diagonal, closedness confines ad e1 to e3 -> e6, e4 -> e5 and
# ad e2 to e3 -> e5, e4 -> e6 (0-based (row, col) in the 4x4 blocks).
_B_SUPPORT = ((3, 0), (2, 1))
_C_SUPPORT = ((2, 0), (3, 1))


def _closed_diag_spec(u, bvals, cvals) -> FamilySpec:
    a3, a4, a5, a6, x, w = (float(v) for v in u)
    B = [[0.0] * 4 for _ in range(4)]
    C = [[0.0] * 4 for _ in range(4)]
    for (r, c), v in zip(_B_SUPPORT, bvals):
        B[r][c] = float(v)
    for (r, c), v in zip(_C_SUPPORT, cvals):
        C[r][c] = float(v)
    return FamilySpec(_mat(_diag(x, w), 2), _mat(_diag(a3, a4, a5, a6), 4), _mat(B, 4), _mat(C, 4))


def _closed_diag_constraints(v, mask) -> np.ndarray:
    """Closedness, masked Jacobi and off-diagonal tau2 conditions at v.

    v = (a3, a4, a5, a6, x, w, b63, b54, c53, c64); every condition is
    linear and homogeneous in v, so the admissible set is a subspace.
    """
    u, bvals, cvals = v[:6], v[6:8], v[8:10]
    spec = _closed_diag_spec(u, bvals, cvals)
    rows = []
    # [A, B] = xB and [A, C] = wC entry by entry on the support
    for (r, c), on in zip(_B_SUPPORT, mask[:2]):
        if on:
            rows.append(u[r] - u[c] - u[4])
    for (r, c), on in zip(_C_SUPPORT, mask[2:]):
        if on:
            rows.append(u[r] - u[c] - u[5])
    for form in closedness_conditions(spec):
        rows.extend(float(val) for val in form.to_vector())
    tau2 = specialized_torsion(spec).tau2
    rows.extend(float(tau2[b]) for b in _OFF_DIAGONAL_TAU2)
    return np.array(rows)


@lru_cache(maxsize=None)
def _closed_diag_subspace(mask: tuple) -> np.ndarray:
    """Orthonormal basis (rows) of admissible v for a given B/C support mask."""
    free = [i for i in range(10) if i < 6 or mask[i - 6]]
    cols = []
    for i in free:
        v = np.zeros(10)
        v[i] = 1.0
        cols.append(_closed_diag_constraints(v, mask))
    kernel = _linalg.svd_nullspace(np.column_stack(cols)).basis
    out = np.zeros((len(kernel), 10))
    out[:, free] = kernel
    return out


def random_closed_diagonal_spec(rng: np.random.Generator, max_tries: int = 1000) -> FamilySpec:
    """Random float FamilySpec with phi closed and tau2 in span{e12, e34, e56}.

    A and A1 are diagonal and B, C are supported on their admissible
    entries; a random support pattern is drawn, then a random point of the
    (linear) solution space with every supported entry nonzero.
    """
    for _ in range(max_tries):
        mask = tuple(bool(m) for m in rng.random(4) < 0.6)
        basis = _closed_diag_subspace(mask)
        if not len(basis):
            continue
        v = rng.standard_normal(len(basis)) @ basis
        v = v / max(np.abs(v).max(), 1e-300)
        if any(on and abs(v[6 + k]) < 1e-3 for k, on in enumerate(mask)):
            continue
        spec = _closed_diag_spec(v[:6], v[6:8], v[8:10])
        try:
            return build_family_instance(spec.A1, spec.A, spec.B, spec.C, label="closed-diag")
        except FamilyError:
            continue
    raise RuntimeError("no consistent closed instance found")


@dataclass(frozen=True)
class EigenformSample:
    spec: FamilySpec
    eigenvalue: float
    residual: float
    tau_norm: float


def eigenform_scan(n: int = 1000, seed: int = 0) -> list[EigenformSample]:
    """Sample closed instances with diagonal-type tau2 and measure |Delta phi - lambda phi|."""
    from .g2core import compute_torsion, eigenform_residual

    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        spec = random_closed_diagonal_spec(rng)
        s = spec.structure()
        lam, res = eigenform_residual(s, tol=1e-8)
        out.append(EigenformSample(spec, float(lam), float(res), compute_torsion(s).tau2.norm()))
    return out
