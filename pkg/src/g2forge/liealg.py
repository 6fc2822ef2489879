"""Seven-dimensional Lie algebras given by structure constants.

Brackets are stored as ``[e_i, e_j] = sum_k c^k_ij e_k`` for ``i < j`` with
1-based indices; the other half follows by antisymmetry.  The differential
on left-invariant forms uses the Chevalley-Eilenberg formula, which on
1-forms reads ``d xi(X, Y) = -xi([X, Y])``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import _linalg
from .exterior import DIM, INDICES, KForm, blades, canonical

H = (1, 2, 3, 4, 5, 6)


class LieAlgebra:
    """Structure constants on the fixed basis e1..e7 (immutable)."""

    def __init__(self, constants: Iterable[Sequence] = ()):
        table: dict[tuple[int, int], dict[int, object]] = {}
        for i, j, k, value in constants:
            if not (1 <= i <= DIM and 1 <= j <= DIM and 1 <= k <= DIM):
                raise ValueError(f"index out of range in ({i}, {j}, {k})")
            if i == j:
                if value != 0:
                    raise ValueError(f"[e{i}, e{i}] must vanish")
                continue
            if i > j:
                i, j, value = j, i, -value
            row = table.setdefault((i, j), {})
            row[k] = row.get(k, 0) + value
        self._table = {
            key: {k: v for k, v in row.items() if v != 0} for key, row in table.items()
        }
        self._table = {key: row for key, row in self._table.items() if row}

    @classmethod
    def from_ad_matrices(cls, ads: dict[int, Sequence[Sequence]]) -> "LieAlgebra":
        """Build from ad(e_i) matrices whose column j is [e_i, e_j]."""
        entries = []
        for i, M in ads.items():
            for j in INDICES:
                for k in INDICES:
                    v = M[k - 1][j - 1]
                    if v != 0 and i != j:
                        entries.append((i, j, k, v))
        # both [e_i, e_j] and [e_j, e_i] may be supplied; they must agree
        table: dict = {}
        for i, j, k, v in entries:
            if i < j:
                table.setdefault((i, j, k), []).append(v)
            else:
                table.setdefault((j, i, k), []).append(-v)
        consts = []
        for (i, j, k), vals in table.items():
            if any(v != vals[0] for v in vals):
                raise ValueError(f"inconsistent bracket data for [e{i}, e{j}]")
            consts.append((i, j, k, vals[0]))
        return cls(consts)

    @property
    def constants(self) -> list[tuple[int, int, int, object]]:
        return sorted(
            (i, j, k, v) for (i, j), row in self._table.items() for k, v in row.items()
        )

    def is_exact(self) -> bool:
        return _linalg.all_exact(v for *_, v in self.constants)

    def bracket(self, i: int, j: int) -> dict[int, object]:
        """[e_i, e_j] as a sparse {k: coefficient} map."""
        if i == j:
            return {}
        if i < j:
            return dict(self._table.get((i, j), {}))
        return {k: -v for k, v in self._table.get((j, i), {}).items()}

    def bracket_vectors(self, x: Sequence, y: Sequence) -> list:
        out = [Fraction(0)] * DIM
        for i in INDICES:
            if x[i - 1] == 0:
                continue
            for j in INDICES:
                if y[j - 1] == 0:
                    continue
                for k, v in self.bracket(i, j).items():
                    out[k - 1] += x[i - 1] * y[j - 1] * v
        return out

    def ad(self, i: int) -> list[list]:
        """Matrix of ad(e_i); column j holds [e_i, e_j]."""
        M = [[0] * DIM for _ in range(DIM)]
        for j in INDICES:
            for k, v in self.bracket(i, j).items():
                M[k - 1][j - 1] = v
        return M

    def structure_array(self) -> np.ndarray:
        """c[k, i, j] (0-based) as floats."""
        c = np.zeros((DIM, DIM, DIM))
        for i, j, k, v in self.constants:
            c[k - 1, i - 1, j - 1] = float(v)
            c[k - 1, j - 1, i - 1] = -float(v)
        return c

    @cached_property
    def _d1(self) -> dict[int, KForm]:
        out = {}
        for k in INDICES:
            coeffs = {}
            for (i, j), row in self._table.items():
                if k in row:
                    coeffs[(i, j)] = -row[k]
            out[k] = KForm(2, coeffs)
        return out

    def __eq__(self, other):
        return isinstance(other, LieAlgebra) and self._table == other._table

    def __hash__(self):
        return hash(tuple(self.constants))

    def __repr__(self):
        terms = []
        for i, j, k, v in self.constants:
            terms.append(f"[e{i},e{j}]∋{v}*e{k}")
        return "LieAlgebra(" + ", ".join(terms) + ")"


def abelian() -> LieAlgebra:
    return LieAlgebra()


def jacobi_residual(g: LieAlgebra) -> float:
    """Max-norm of the Jacobiator over all basis triples i < j < k."""
    worst = 0
    for i, j, k in blades(3):
        total: dict[int, object] = {}
        for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
            for m, v in g.bracket(a, b).items():
                for n, w in g.bracket(m, c).items():
                    total[n] = total.get(n, 0) + v * w
        for v in total.values():
            worst = max(worst, abs(v))
    return worst


def _evaluate(a: KForm, vectors: list[dict[int, object]]) -> object:
    """a(v_1, ..., v_k) for sparse vectors {index: coefficient}."""
    result = 0
    def rec(pos, chosen, coeff):
        nonlocal result
        if pos == len(vectors):
            sign, key = canonical(chosen)
            if sign:
                result += sign * coeff * a._coeffs.get(key, 0)
            return
        for idx, val in vectors[pos].items():
            if idx in chosen:
                continue
            rec(pos + 1, chosen + (idx,), coeff * val)
    rec(0, (), 1)
    return result


def ce_differential(g: LieAlgebra, a: KForm) -> KForm:
    """Chevalley-Eilenberg differential of a left-invariant form."""
    k = a.degree
    if k >= DIM:
        return KForm.zero(DIM)
    if k == 0 or not a._coeffs:
        return KForm.zero(k + 1)
    if k == 1:
        out = KForm.zero(2)
        for (i,), v in a._coeffs.items():
            out = out + v * g._d1[i]
        return out
    support = a.support()
    out = {}
    for J in blades(k + 1):
        value = 0
        for p in range(k + 1):
            for q in range(p + 1, k + 1):
                br = g.bracket(J[p], J[q])
                if not br:
                    continue
                rest = [{idx: 1} for n, idx in enumerate(J) if n not in (p, q)]
                if any(next(iter(r)) not in support for r in rest):
                    continue
                value += (-1) ** (p + q) * _evaluate(a, [br] + rest)
        if value != 0:
            out[J] = value
    return KForm(k + 1, out)


@dataclass(frozen=True)
class DerivationSpace:
    """Basis of Der(g) as 7x7 matrices (column j = D e_j)."""

    basis: tuple
    exact: bool
    cutoff: float = 0.0
    near_degenerate: bool = False

    @property
    def dim(self) -> int:
        return len(self.basis)

    def matrices(self) -> list[np.ndarray]:
        return [np.array(D, dtype=float) for D in self.basis]


def _derivation_system(g: LieAlgebra) -> list[list]:
    """Rows of D[e_i,e_j] - [De_i,e_j] - [e_i,De_j] = 0 in the 49 entries of D.

    Unknown D[r][c] sits at position 7*r + c (0-based row r, column c).
    """
    rows = []
    for i, j in blades(2):
        eqs = {m: {} for m in INDICES}
        # D[e_i,e_j]_m = sum_k c^k_ij D[m][k]
        for k, v in g.bracket(i, j).items():
            for m in INDICES:
                pos = 7 * (m - 1) + (k - 1)
                eqs[m][pos] = eqs[m].get(pos, 0) + v
        # -[D e_i, e_j]_m = -sum_l D[l][i] c^m_lj
        for l in INDICES:
            for m, v in g.bracket(l, j).items():
                pos = 7 * (l - 1) + (i - 1)
                eqs[m][pos] = eqs[m].get(pos, 0) - v
            for m, v in g.bracket(i, l).items():
                pos = 7 * (l - 1) + (j - 1)
                eqs[m][pos] = eqs[m].get(pos, 0) - v
        for m in INDICES:
            if any(v != 0 for v in eqs[m].values()):
                row = [0] * 49
                for pos, v in eqs[m].items():
                    row[pos] = v
                rows.append(row)
    return rows


def derivation_residual(g: LieAlgebra, D) -> float:
    """Max-norm of D[X,Y] - [DX,Y] - [X,DY] over basis pairs."""
    rows = _derivation_system(g)
    flat = [D[r][c] for r in range(DIM) for c in range(DIM)]
    worst = 0.0
    for row in rows:
        worst = max(worst, abs(float(sum(a * b for a, b in zip(row, flat) if a != 0))))
    return worst


def derivation_space(g: LieAlgebra, rel_cutoff: float = 1e-9) -> DerivationSpace:
    # float and rational algebras with equal values compare equal, so the
    # arithmetic kind is part of the cache key
    return _derivation_space(g, g.is_exact(), rel_cutoff)


@lru_cache(maxsize=512)
def _derivation_space(g: LieAlgebra, exact: bool, rel_cutoff: float) -> DerivationSpace:
    rows = _derivation_system(g)
    if exact:
        basis = _linalg.exact_nullspace(rows, 49)
        mats = tuple(tuple(tuple(v[7 * r:7 * r + 7]) for r in range(DIM)) for v in basis)
        return DerivationSpace(mats, exact=True)
    system = np.array(rows, dtype=float) if rows else np.zeros((0, 49))
    ns = _linalg.svd_nullspace(system, rel_cutoff)
    mats = tuple(tuple(tuple(v[7 * r:7 * r + 7]) for r in range(DIM)) for v in ns.basis)
    return DerivationSpace(mats, exact=False, cutoff=ns.cutoff, near_degenerate=ns.near_degenerate)


def matrix_bracket_residual(g: LieAlgebra, h: LieAlgebra, T) -> float:
    """Max-norm of T[X,Y]_g - [TX,TY]_h over basis pairs (T columns = images)."""
    worst = 0
    cols = [[T[r][c] for r in range(DIM)] for c in range(DIM)]
    for i, j in blades(2):
        lhs = [0] * DIM
        for k, v in g.bracket(i, j).items():
            for r in range(DIM):
                lhs[r] += v * cols[k - 1][r]
        rhs = h.bracket_vectors(cols[i - 1], cols[j - 1])
        worst = max(worst, max(abs(a - b) for a, b in zip(lhs, rhs)))
    return worst


def is_subalgebra(g: LieAlgebra, subspace: Sequence[int]) -> bool:
    s = set(subspace)
    for i in s:
        for j in s:
            if any(k not in s for k in g.bracket(i, j)):
                return False
    return True


def is_unimodular(g: LieAlgebra, subspace: Sequence[int] = INDICES) -> bool:
    """tr(ad X restricted to the subspace) == 0 for every basis X of it."""
    subspace = tuple(sorted(subspace))
    if not is_subalgebra(g, subspace):
        raise ValueError(f"span of e{subspace} is not closed under the bracket")
    exact = g.is_exact()
    for i in subspace:
        tr = sum((g.bracket(i, j).get(j, 0) for j in subspace), 0)
        if (tr != 0) if exact else abs(tr) > 1e-9:
            return False
    return True


def center(g: LieAlgebra, subspace: Sequence[int] = INDICES) -> list[list]:
    """Basis (coordinate vectors on the subspace) of the center of a subalgebra."""
    subspace = tuple(sorted(subspace))
    n = len(subspace)
    rows = []
    for j in subspace:
        for k in INDICES:
            rows.append([g.bracket(i, j).get(k, 0) for i in subspace])
    if g.is_exact():
        return _linalg.exact_nullspace(rows, n)
    return [list(v) for v in _linalg.svd_nullspace(np.array(rows, dtype=float)).basis]
