"""Exterior algebra on a fixed oriented orthonormal 7-dimensional coframe.

Forms are sparse maps from blades (strictly increasing index tuples drawn
from 1..7) to scalars.  Scalars are plain Python numbers: ``Fraction`` (or
``int``) for exact work, ``float`` otherwise.  Mixing the two promotes to
float through ordinary Python arithmetic.

The inner product makes distinct blades orthogonal and every blade a unit
vector, so that ``wedge(b, hodge_star(a)) == inner(b, a) * VOL``.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache
from numbers import Number
from typing import Iterable, Mapping

import numpy as np

DIM = 7
INDICES = tuple(range(1, DIM + 1))
G1 = (3, 4, 5, 6)
G0 = (1, 2, 7)
DEFAULT_TOL = 1e-9

Blade = tuple


def permutation_sign(seq: Iterable[int]) -> int:
    """Sign of the permutation sorting ``seq``; 0 if an index repeats."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def canonical(indices: Iterable[int]) -> tuple[int, Blade]:
    """Return ``(sign, blade)`` with ``e^{indices} == sign * e^{blade}``."""
    indices = tuple(indices)
    sign = permutation_sign(indices)
    return sign, tuple(sorted(indices))


@lru_cache(maxsize=None)
def blades(k: int, support: tuple = INDICES) -> tuple[Blade, ...]:
    """All degree-k blades on ``support`` in lexicographic order."""
    return tuple(itertools.combinations(sorted(support), k))


@lru_cache(maxsize=None)
def blade_index(k: int) -> dict:
    return {b: i for i, b in enumerate(blades(k))}


def is_zero(x, tol: float = DEFAULT_TOL) -> bool:
    if isinstance(x, (int, Fraction)):
        return x == 0
    return abs(x) <= tol


class KForm:
    """An immutable alternating k-form with sparse blade coefficients."""

    __slots__ = ("degree", "_coeffs")

    def __init__(self, degree: int, coeffs: Mapping | None = None):
        if not 0 <= degree <= DIM:
            raise ValueError(f"degree {degree} out of range 0..{DIM}")
        self.degree = degree
        clean = {}
        for blade, value in (coeffs or {}).items():
            blade = tuple(blade)
            if len(blade) != degree:
                raise ValueError(f"blade {blade} does not have degree {degree}")
            sign, key = canonical(blade)
            if sign == 0:
                continue
            if key[0:1] and (key[0] < 1 or key[-1] > DIM):
                raise ValueError(f"blade {blade} has indices outside 1..{DIM}")
            clean[key] = clean.get(key, 0) + sign * value
        self._coeffs = {b: v for b, v in clean.items() if v != 0}

    @classmethod
    def zero(cls, degree: int) -> "KForm":
        return cls(degree)

    @classmethod
    def scalar(cls, value) -> "KForm":
        return cls(0, {(): value})

    @property
    def coeffs(self) -> dict:
        return dict(self._coeffs)

    def items(self):
        return sorted(self._coeffs.items())

    def __getitem__(self, blade) -> Number:
        sign, key = canonical(blade)
        return sign * self._coeffs.get(key, 0)

    def support(self) -> set:
        return {i for b in self._coeffs for i in b}

    def __add__(self, other: "KForm") -> "KForm":
        if not isinstance(other, KForm):
            return NotImplemented
        if other.degree != self.degree:
            raise ValueError(f"cannot add forms of degree {self.degree} and {other.degree}")
        out = dict(self._coeffs)
        for b, v in other._coeffs.items():
            out[b] = out.get(b, 0) + v
        return KForm(self.degree, out)

    def __neg__(self) -> "KForm":
        return KForm(self.degree, {b: -v for b, v in self._coeffs.items()})

    def __sub__(self, other: "KForm") -> "KForm":
        return self + (-other)

    def __mul__(self, scalar) -> "KForm":
        if isinstance(scalar, KForm):
            return NotImplemented
        return KForm(self.degree, {b: scalar * v for b, v in self._coeffs.items()})

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "KForm":
        if isinstance(scalar, int):
            scalar = Fraction(scalar)
        return KForm(self.degree, {b: v / scalar for b, v in self._coeffs.items()})

    def __xor__(self, other: "KForm") -> "KForm":
        return wedge(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, KForm):
            return NotImplemented
        return self.degree == other.degree and self._coeffs == other._coeffs

    def __hash__(self):
        return hash((self.degree, tuple(self.items())))

    def is_exact(self) -> bool:
        return all(isinstance(v, (int, Fraction)) for v in self._coeffs.values())

    def norm2(self):
        return sum((v * v for v in self._coeffs.values()), Fraction(0))

    def norm(self) -> float:
        return math.sqrt(float(self.norm2()))

    def max_abs(self) -> float:
        return max((abs(float(v)) for v in self._coeffs.values()), default=0.0)

    def close_to(self, other: "KForm", tol: float = DEFAULT_TOL) -> bool:
        return (self - other).max_abs() <= tol

    def is_zero(self, tol: float = DEFAULT_TOL) -> bool:
        return self.max_abs() <= tol

    def to_float(self) -> "KForm":
        return KForm(self.degree, {b: float(v) for b, v in self._coeffs.items()})

    def to_vector(self) -> np.ndarray:
        """Dense float coefficients in the lexicographic blade basis."""
        idx = blade_index(self.degree)
        vec = np.zeros(len(idx))
        for b, v in self._coeffs.items():
            vec[idx[b]] = float(v)
        return vec

    @classmethod
    def from_vector(cls, degree: int, vec) -> "KForm":
        return cls(degree, dict(zip(blades(degree), (float(v) for v in vec))))

    def __repr__(self) -> str:
        if not self._coeffs:
            return f"KForm({self.degree}, 0)"
        terms = []
        for b, v in self.items():
            label = "e^" + "".join(map(str, b)) if b else "1"
            terms.append(f"{v}*{label}")
        return " + ".join(terms)


def e(*indices, coeff=1) -> KForm:
    """Basis monomial ``coeff * e^{i1...ik}``; ``e(1, 2, 7)`` or ``e(127)``."""
    if len(indices) == 1 and indices[0] > 9:
        indices = tuple(int(c) for c in str(indices[0]))
    return KForm(len(indices), {tuple(indices): coeff})


def wedge(a: KForm, b: KForm) -> KForm:
    k = a.degree + b.degree
    if k > DIM:
        return KForm.zero(min(k, DIM))
    out: dict = {}
    for ba, va in a._coeffs.items():
        sa = set(ba)
        for bb, vb in b._coeffs.items():
            if sa.intersection(bb):
                continue
            sign, key = canonical(ba + bb)
            out[key] = out.get(key, 0) + sign * va * vb
    return KForm(k, out)


def wedge_all(*forms: KForm) -> KForm:
    result = forms[0]
    for f in forms[1:]:
        result = wedge(result, f)
    return result


def _complement(blade: Blade, support: tuple) -> Blade:
    return tuple(i for i in support if i not in blade)


def _star_on(a: KForm, support: tuple) -> KForm:
    """Hodge star of the span of ``support`` (sorted), oriented by e^{support}."""
    n = len(support)
    out = {}
    for b, v in a._coeffs.items():
        comp = _complement(b, support)
        sign = permutation_sign(b + comp)
        out[comp] = sign * v
    return KForm(n - a.degree, out)


def hodge_star(a: KForm) -> KForm:
    """Standard Hodge star: ``wedge(b, hodge_star(a)) == inner(b, a) * VOL``."""
    return _star_on(a, INDICES)


def _check_support(a: KForm, allowed: tuple, name: str) -> None:
    extra = a.support() - set(allowed)
    if extra:
        raise ValueError(f"form {a!r} touches indices {sorted(extra)} outside {name}")


def star_g1(a: KForm) -> KForm:
    """Hodge star of g1 = span{e3..e6} oriented by e^{3456}."""
    _check_support(a, G1, "g1")
    return _star_on(a, G1)


def star_g0(a: KForm) -> KForm:
    """Hodge star of g0 = span{e7, e1, e2} oriented by e^{127}."""
    _check_support(a, G0, "g0")
    return _star_on(a, G0)


def split_hodge(a: KForm, b: KForm) -> KForm:
    """``*(a ^ b)`` for ``a`` on g1 and ``b`` on g0, via the block formula."""
    sign = -1 if (a.degree * b.degree) % 2 else 1
    return sign * wedge(star_g1(a), star_g0(b))


def inner(a: KForm, b: KForm):
    if a.degree != b.degree:
        raise ValueError(f"inner product of degrees {a.degree} and {b.degree}")
    small, large = (a, b) if len(a._coeffs) <= len(b._coeffs) else (b, a)
    return sum((v * large._coeffs.get(k, 0) for k, v in small._coeffs.items()), Fraction(0))


def _as_matrix(M) -> list[list]:
    return [[M[i][j] for j in range(len(M))] for i in range(len(M))]


def theta_one_form(M, i: int) -> KForm:
    """theta(M) e^i = -sum_j M_ij e^j, with 4x4 matrices acting on e3..e6."""
    M = _as_matrix(M)
    n = len(M)
    if n == DIM:
        labels = INDICES
    elif n == 4:
        labels = G1
    else:
        raise ValueError(f"theta needs a 4x4 or 7x7 matrix, got {n}x{n}")
    if i not in labels:
        return KForm.zero(1)
    r = labels.index(i)
    return KForm(1, {(labels[c],): -M[r][c] for c in range(n)})


def theta_action(M, a: KForm) -> KForm:
    """Derivation of the exterior algebra extending the negative dual action."""
    images = {i: theta_one_form(M, i) for i in INDICES}
    out = KForm.zero(a.degree)
    for b, v in a._coeffs.items():
        for pos, i in enumerate(b):
            img = images[i]
            if not img._coeffs:
                continue
            left = KForm(pos, {b[:pos]: 1})
            right = KForm(len(b) - pos - 1, {b[pos + 1:]: 1})
            out = out + v * wedge_all(left, img, right)
    return out


def pullback(T, a: KForm) -> KForm:
    """Pullback of ``a`` by the linear map with matrix ``T`` (columns = images)."""
    T = _as_matrix(T)
    images = {
        i: KForm(1, {(j,): T[i - 1][j - 1] for j in INDICES}) for i in INDICES
    }
    out = KForm.zero(a.degree)
    for b, v in a._coeffs.items():
        term = KForm.scalar(v)
        for i in b:
            term = wedge(term, images[i])
        out = out + term
    return out


# The standard G2 form and the basis of two-forms on g1.
VOL = e(1, 2, 3, 4, 5, 6, 7)
PHI = e(1, 2, 7) + e(3, 4, 7) + e(5, 6, 7) + e(1, 3, 5) - e(1, 4, 6) - e(2, 3, 6) - e(2, 4, 5)
OMEGA_BAR7 = e(3, 4) - e(5, 6)
OMEGA_BAR1 = e(3, 5) + e(4, 6)
OMEGA_BAR2 = -e(3, 6) + e(4, 5)
OMEGA7 = e(3, 4) + e(5, 6)
OMEGA1 = e(3, 5) - e(4, 6)
OMEGA2 = -e(3, 6) - e(4, 5)
UPSILON = (OMEGA_BAR7, OMEGA_BAR1, OMEGA_BAR2, OMEGA7, OMEGA1, OMEGA2)
UPSILON_LABELS = ("wbar7", "wbar1", "wbar2", "w7", "w1", "w2")


# Dense operator tables used by the float flow integrator.

@lru_cache(maxsize=None)
def wedge_tensor(k: int, l: int) -> np.ndarray:
    """W[I, a, b] with (u ^ v)_I = sum_ab W[I, a, b] u_a v_b."""
    out_idx = blade_index(k + l)
    W = np.zeros((len(out_idx), len(blades(k)), len(blades(l))))
    for a, ba in enumerate(blades(k)):
        for b, bb in enumerate(blades(l)):
            if set(ba) & set(bb):
                continue
            sign, key = canonical(ba + bb)
            W[out_idx[key], a, b] = sign
    return W


@lru_cache(maxsize=None)
def star_matrix(k: int) -> np.ndarray:
    """Matrix of the standard Hodge star from degree k to degree 7 - k."""
    out_idx = blade_index(DIM - k)
    S = np.zeros((len(out_idx), len(blades(k))))
    for j, b in enumerate(blades(k)):
        img = hodge_star(KForm(k, {b: 1}))
        for key, v in img._coeffs.items():
            S[out_idx[key], j] = v
    return S


@lru_cache(maxsize=None)
def interior_matrices() -> np.ndarray:
    """I[i, J, K]: (iota_{e_{i+1}} a)_J = sum_K I[i, J, K] a_K on 3-forms."""
    idx2 = blade_index(2)
    out = np.zeros((DIM, len(idx2), len(blades(3))))
    for K, b in enumerate(blades(3)):
        for pos, i in enumerate(b):
            rest = b[:pos] + b[pos + 1:]
            out[i - 1, idx2[rest], K] = (-1) ** pos
    return out


@lru_cache(maxsize=None)
def _blade_rows(k: int) -> np.ndarray:
    return np.array([np.array(b) - 1 for b in blades(k)])


def compound_matrix(T: np.ndarray, k: int) -> np.ndarray:
    """k-th compound: entry (I, J) is the minor det T[I, J] over k-blades."""
    if k == 0:
        return np.ones((1, 1))
    rows = _blade_rows(k)
    sub = T[rows[:, None, :, None], rows[None, :, None, :]]
    return np.linalg.det(sub)


def interior(i: int, a: KForm) -> KForm:
    """Contraction of ``a`` with the basis vector e_i."""
    out = {}
    for b, v in a._coeffs.items():
        if i in b:
            pos = b.index(i)
            out[b[:pos] + b[pos + 1:]] = (-1) ** pos * v
    return KForm(a.degree - 1, out)
