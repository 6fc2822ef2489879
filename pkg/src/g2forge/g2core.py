"""Formula-agnostic G2 computations on a Lie algebra.

Everything here is assembled from the Chevalley-Eilenberg differential and a
Hodge star, never from the closed-form expressions of the
``G_{A1,A,B,C}`` family, so it can serve as an independent check on
:mod:`g2forge.family`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import _linalg
from .exterior import (
    DEFAULT_TOL,
    DIM,
    INDICES,
    PHI,
    KForm,
    blade_index,
    blades,
    compound_matrix,
    e,
    hodge_star,
    inner,
    interior,
    interior_matrices,
    star_matrix,
    wedge,
    wedge_tensor,
)
from .liealg import LieAlgebra, ce_differential

STANDARD = "standard-orthonormal"
GENERAL = "general"


class PositivityError(ValueError):
    """The 3-form does not induce a positive-definite metric."""


class NotClosedError(ValueError):
    """An operation that needs d(phi) = 0 got a non-closed structure."""


# -- induced metric -----------------------------------------------------------

@dataclass(frozen=True)
class MetricTensor:
    g: tuple  # 7x7 rows
    orientation: int  # +1 when e^{1..7} is positively oriented
    volume: object  # sqrt(det g), coefficient of the volume form on e^{1..7}

    def array(self) -> np.ndarray:
        return np.array(self.g, dtype=float)

    @property
    def margin(self) -> float:
        """Smallest eigenvalue of the metric."""
        return float(np.linalg.eigvalsh(self.array()).min())

    def is_identity(self, tol: float = DEFAULT_TOL) -> bool:
        return float(np.abs(self.array() - np.eye(DIM)).max()) <= tol


def _exact_root(q: Fraction, n: int) -> Fraction | None:
    def iroot(m: int) -> int | None:
        if m == 0:
            return 0
        try:
            r = round(m ** (1.0 / n))
        except OverflowError:
            return None
        for cand in (r - 1, r, r + 1):
            if cand >= 0 and cand**n == m:
                return cand
        return None

    sign = -1 if q < 0 else 1
    num, den = iroot(abs(q.numerator)), iroot(q.denominator)
    if num is None or den is None:
        return None
    return sign * Fraction(num, den)


def _bilinear_form(phi: KForm) -> list[list]:
    """B(e_i, e_j) with B(X, Y) vol = (1/6) iota_X phi ^ iota_Y phi ^ phi."""
    contractions = [interior(i, phi) for i in INDICES]
    B = [[0] * DIM for _ in range(DIM)]
    for i in range(DIM):
        for j in range(i, DIM):
            top = wedge(wedge(contractions[i], contractions[j]), phi)
            B[i][j] = B[j][i] = Fraction(1, 6) * top[tuple(INDICES)]
    return B


def metric_from_positive_3form(phi: KForm) -> MetricTensor:
    """Metric and orientation induced by a positive 3-form.

    The candidate bilinear form B is rescaled to ``g = B / det(B)^(1/9)``;
    a definite B of either sign yields a metric, with the sign fixing the
    orientation.  Exact when phi is rational and det(B) is a ninth power.
    """
    if phi.degree != 3:
        raise ValueError("metric needs a 3-form")
    B = _bilinear_form(phi)
    Bf = np.array(B, dtype=float)
    det = np.linalg.det(Bf)
    if det == 0 or not np.isfinite(det):
        raise PositivityError("degenerate bilinear form: phi is not positive")
    sigma = 1 if det > 0 else -1
    root = None
    if phi.is_exact():
        root = _exact_root(Fraction(_linalg_det_exact(B)), 9)
    if root is not None:
        g = [[v / root for v in row] for row in B]
    else:
        scale = sigma * abs(det) ** (1.0 / 9.0)
        g = (Bf / scale).tolist()
    gf = np.array(g, dtype=float)
    minors = [np.linalg.det(gf[:k, :k]) for k in range(1, DIM + 1)]
    if min(minors) <= 0:
        raise PositivityError(
            "induced bilinear form is not definite: phi is not positive"
            f" (leading minors {['%.3g' % m for m in minors]})"
        )
    if root is not None:
        det_g = _linalg_det_exact(g)
        vol = _exact_root(Fraction(det_g), 2)
        vol = vol if vol is not None else math.sqrt(float(det_g))
    else:
        vol = math.sqrt(float(np.linalg.det(gf)))
    return MetricTensor(tuple(tuple(r) for r in g), sigma, vol)


def _linalg_det_exact(M) -> Fraction:
    m = [[Fraction(v) for v in row] for row in M]
    n = len(m)
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if m[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            det = -det
        det *= m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            if f:
                m[r] = [a - f * b for a, b in zip(m[r], m[c])]
    return det


# -- general-metric Hodge star ------------------------------------------------

def _frame(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    L = np.linalg.cholesky(g)
    P = L.T  # theta^a = sum_i P[a, i] e^i is g-orthonormal
    return P, np.linalg.inv(P)


def metric_star_matrix(g: np.ndarray, orientation: int, k: int) -> np.ndarray:
    """Matrix of the Hodge star of (g, orientation) from degree k to 7 - k.

    Forms are pulled to a Cholesky orthonormal coframe, starred there with
    the standard star, and pushed back.
    """
    P, Q = _frame(np.asarray(g, dtype=float))
    to_frame = compound_matrix(Q, k).T
    from_frame = compound_matrix(P, DIM - k).T
    return orientation * from_frame @ star_matrix(k) @ to_frame


def metric_inner_matrix(g: np.ndarray, k: int) -> np.ndarray:
    """Gram matrix of the k-blades under the metric induced on forms."""
    _, Q = _frame(np.asarray(g, dtype=float))
    C = compound_matrix(Q, k).T
    return C.T @ C


# -- structures ---------------------------------------------------------------

@dataclass(frozen=True)
class G2Structure:
    algebra: LieAlgebra
    phi: KForm = PHI
    frame_status: str = STANDARD

    def __post_init__(self):
        if self.phi.degree != 3:
            raise ValueError("phi must be a 3-form")
        if self.frame_status not in (STANDARD, GENERAL):
            raise ValueError(f"unknown frame status {self.frame_status!r}")
        if self.frame_status == STANDARD and self.phi != PHI:
            m = self.metric
            if not m.is_identity() or m.orientation != 1:
                raise ValueError(
                    "phi does not induce the standard metric; use frame_status='general'"
                )

    @cached_property
    def metric(self) -> MetricTensor:
        return metric_from_positive_3form(self.phi)

    @property
    def standard(self) -> bool:
        return self.frame_status == STANDARD

    def d(self, a: KForm) -> KForm:
        return ce_differential(self.algebra, a)

    def star(self, a: KForm) -> KForm:
        if self.standard:
            return hodge_star(a)
        m = self.metric
        S = metric_star_matrix(m.array(), m.orientation, a.degree)
        return KForm.from_vector(DIM - a.degree, S @ a.to_vector())

    def inner(self, a: KForm, b: KForm):
        if self.standard:
            return inner(a, b)
        if a.degree != b.degree:
            raise ValueError(f"inner product of degrees {a.degree} and {b.degree}")
        G = metric_inner_matrix(self.metric.array(), a.degree)
        return float(a.to_vector() @ G @ b.to_vector())

    def norm(self, a: KForm) -> float:
        return math.sqrt(max(float(self.inner(a, a)), 0.0))

    @cached_property
    def dphi(self) -> KForm:
        return self.d(self.phi)

    @cached_property
    def star_phi(self) -> KForm:
        return self.star(self.phi)

    def is_closed(self, tol: float = DEFAULT_TOL) -> bool:
        return self.dphi.is_zero(tol)

    def is_coclosed(self, tol: float = DEFAULT_TOL) -> bool:
        return self.d(self.star_phi).is_zero(tol)


@dataclass(frozen=True)
class TorsionForms:
    tau0: object
    tau1: KForm
    tau2: KForm
    tau3: KForm

    @property
    def lambdas(self) -> dict[int, object]:
        """Components lambda_i = <tau1, e^i> for i in (1, 2, 7)."""
        return {i: self.tau1[(i,)] for i in (1, 2, 7)}

    def is_zero(self, tol: float = DEFAULT_TOL) -> bool:
        return (
            abs(float(self.tau0)) <= tol
            and self.tau1.is_zero(tol)
            and self.tau2.is_zero(tol)
            and self.tau3.is_zero(tol)
        )

    def max_difference(self, other: "TorsionForms") -> float:
        return max(
            abs(float(self.tau0 - other.tau0)),
            (self.tau1 - other.tau1).max_abs(),
            (self.tau2 - other.tau2).max_abs(),
            (self.tau3 - other.tau3).max_abs(),
        )


def compute_torsion(s: G2Structure) -> TorsionForms:
    phi, dphi, sphi = s.phi, s.dphi, s.star_phi
    star_dphi = s.star(dphi)
    tau0 = Fraction(1, 7) * s.star(wedge(dphi, phi))[()]
    tau1 = Fraction(-1, 12) * s.star(wedge(star_dphi, phi))
    tau2 = -s.star(s.d(sphi)) + 4 * s.star(wedge(tau1, sphi))
    tau3 = star_dphi - tau0 * phi - 3 * s.star(wedge(tau1, phi))
    return TorsionForms(tau0, tau1, tau2, tau3)


def torsion_reconstruction_residual(s: G2Structure, t: TorsionForms) -> float:
    """Max-norm defect of dphi = t0 *phi + 3 t1^phi + *t3, d*phi = 4 t1^*phi + t2^phi."""
    r1 = s.dphi - (t.tau0 * s.star_phi + 3 * wedge(t.tau1, s.phi) + s.star(t.tau3))
    r2 = s.d(s.star_phi) - (4 * wedge(t.tau1, s.star_phi) + wedge(t.tau2, s.phi))
    return max(r1.max_abs(), r2.max_abs())


def hodge_laplacian(s: G2Structure, a: KForm) -> KForm:
    """(-1)^k (d*d* - *d*d) a, i.e. dd^* + d^*d."""
    d, st = s.d, s.star
    out = d(st(d(st(a)))) - st(d(st(d(a))))
    return out if a.degree % 2 == 0 else -out


def type_decompose(s: G2Structure, a: KForm) -> dict[str, KForm]:
    """Split a 2-form into {'7', '14'} or a 3-form into {'1', '7', '27'} parts."""
    phi = s.phi
    if a.degree == 2:
        T = s.star(wedge(phi, a))
        p7 = Fraction(1, 3) * (T + a)
        return {"7": p7, "14": a - p7}
    if a.degree == 3:
        p1 = (s.inner(a, phi) / s.inner(phi, phi)) * phi
        gens = [s.star(wedge(phi, e(i))) for i in INDICES]
        gram = [[s.inner(u, v) for v in gens] for u in gens]
        rhs = [s.inner(a, u) for u in gens]
        if a.is_exact() and phi.is_exact() and s.standard:
            coeffs = _linalg.exact_solve(gram, rhs, DIM)
        else:
            coeffs = np.linalg.solve(np.array(gram, float), np.array(rhs, float)).tolist()
        p7 = KForm.zero(3)
        for c, u in zip(coeffs, gens):
            p7 = p7 + c * u
        return {"1": p1, "7": p7, "27": a - p1 - p7}
    raise ValueError(f"type decomposition is defined for degrees 2 and 3, not {a.degree}")


@dataclass(frozen=True)
class ErpResult:
    lhs: KForm
    rhs: KForm
    residual: float


def _closed_torsion(s: G2Structure, tol: float) -> KForm:
    if not s.is_closed(tol):
        raise NotClosedError("phi is not closed")
    return compute_torsion(s).tau2


def erp_residual(s: G2Structure, tol: float = DEFAULT_TOL) -> ErpResult:
    """Compare d tau with (1/6)|tau|^2 phi + (1/6) *(tau ^ tau)."""
    tau = _closed_torsion(s, tol)
    lhs = s.d(tau)
    rhs = Fraction(1, 6) * s.inner(tau, tau) * s.phi + Fraction(1, 6) * s.star(wedge(tau, tau))
    return ErpResult(lhs, rhs, s.norm(lhs - rhs))


def eigenform_residual(s: G2Structure, tol: float = DEFAULT_TOL) -> tuple[object, float]:
    """(lambda, |Delta phi - lambda phi|) with lambda = |tau|^2 / 7."""
    tau = _closed_torsion(s, tol)
    lam = s.inner(tau, tau) / 7
    lap = hodge_laplacian(s, s.phi)
    return lam, s.norm(lap - lam * s.phi)


# -- Ricci curvature of the orthonormal basis --------------------------------

def ricci_generic(g: LieAlgebra) -> list[list]:
    """Ricci operator of the metric making e1..e7 orthonormal.

    Uses Ric = M - B/2 - S(ad H): M from the bracket, B the Killing form and
    H the mean curvature vector (tr ad X = <H, X>).
    """
    c = [[[0] * DIM for _ in range(DIM)] for _ in range(DIM)]  # c[k][i][j]
    for i, j, k, v in g.constants:
        c[k - 1][i - 1][j - 1] = v
        c[k - 1][j - 1][i - 1] = -v
    n = range(DIM)
    ric = [[0] * DIM for _ in n]
    H = [sum(c[j][a][j] for j in n) for a in n]
    adH = [[sum(H[a] * c[k][a][j] for a in n) for j in n] for k in n]
    for a in n:
        for b in n:
            m = Fraction(-1, 2) * sum(c[j][a][i] * c[j][b][i] for i in n for j in n)
            m += Fraction(1, 4) * sum(c[a][i][j] * c[b][i][j] for i in n for j in n)
            kill = sum(c[i][a][j] * c[j][b][i] for i in n for j in n)
            ric[a][b] = m - Fraction(1, 2) * kill - Fraction(1, 2) * (adH[a][b] + adH[b][a])
    return ric


# -- dense float pipeline for the flow ----------------------------------------

class DenseLaplacian:
    """Delta_phi phi for arbitrary positive phi on a fixed Lie algebra, in floats."""

    def __init__(self, algebra: LieAlgebra):
        self.algebra = algebra
        self.d = {k: self._d_matrix(k) for k in (2, 3, 4)}
        self._iota = interior_matrices()
        self._w22 = wedge_tensor(2, 2)
        self._w43 = wedge_tensor(4, 3)[0]

    def _d_matrix(self, k: int) -> np.ndarray:
        idx = blade_index(k + 1)
        D = np.zeros((len(idx), len(blades(k))))
        for j, b in enumerate(blades(k)):
            for key, v in ce_differential(self.algebra, KForm(k, {b: 1})).items():
                D[idx[key], j] = float(v)
        return D

    def metric(self, phi: np.ndarray) -> tuple[np.ndarray, int]:
        # B(X, Y) vol = (1/6) i_X phi ^ i_Y phi ^ phi, i.e. B = u M u^t / 6 with
        # M_ab = <e^a ^ e^b ^ phi, vol> over 2-blades a, b
        u = self._iota @ phi  # (7, 21)
        M = np.tensordot(self._w43 @ phi, self._w22, axes=(0, 0))
        B = u @ M @ u.T / 6.0
        det = np.linalg.det(B)
        if det == 0 or not np.isfinite(det):
            raise PositivityError("degenerate bilinear form")
        sigma = 1 if det > 0 else -1
        g = B / (sigma * abs(det) ** (1.0 / 9.0))
        return g, sigma

    def __call__(self, phi: np.ndarray) -> tuple[np.ndarray, float]:
        """Return (Delta phi, smallest metric eigenvalue)."""
        g, sigma = self.metric(phi)
        margin = float(np.linalg.eigvalsh(g).min())
        if margin <= 0:
            raise PositivityError(f"metric lost definiteness (min eigenvalue {margin:.3g})")
        # in dimension 7 the star is an involution, so *_4 = *_3^{-1}, *_5 = *_2^{-1}
        s3 = metric_star_matrix(g, sigma, 3)
        s4 = np.linalg.inv(s3)
        s5 = np.linalg.inv(metric_star_matrix(g, sigma, 2))
        d2, d3, d4 = self.d[2], self.d[3], self.d[4]
        lap = -d2 @ (s5 @ (d4 @ (s3 @ phi))) + s4 @ (d3 @ (s4 @ (d3 @ phi)))
        return lap, margin
