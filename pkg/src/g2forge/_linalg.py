"""Small linear-algebra kernels: exact rational elimination and SVD nullspaces."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np


def all_exact(values) -> bool:
    return all(isinstance(v, (int, Fraction)) for v in values)


def rref(rows: list[list], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over the rationals; returns (rows, pivot columns)."""
    m = [[Fraction(v) for v in row] for row in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = 1 / m[r][c]
        m[r] = prow = [v * inv for v in m[r]]
        nz = [j for j, v in enumerate(prow) if v]  # rows are sparse; touch only these
        for i in range(len(m)):
            row = m[i]
            if i != r and row[c] != 0:
                f = row[c]
                for j in nz:
                    row[j] -= f * prow[j]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def exact_nullspace(rows: list[list], ncols: int) -> list[list[Fraction]]:
    """Basis of {v : rows @ v = 0} with one free variable set to 1 per vector."""
    reduced, pivots = rref(rows, ncols) if rows else ([], [])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(reduced, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


def exact_solve(rows: list[list], rhs: list, ncols: int) -> list[Fraction] | None:
    """One particular solution of rows @ v = rhs (free variables zero), or None."""
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    reduced, pivots = rref(aug, ncols + 1)
    if ncols in pivots:
        return None
    v = [Fraction(0)] * ncols
    for row, p in zip(reduced, pivots):
        v[p] = row[ncols]
    return v


@dataclass(frozen=True)
class SvdNullspace:
    basis: np.ndarray  # rows are orthonormal nullspace vectors
    cutoff: float
    smallest_retained: float | None

    @property
    def near_degenerate(self) -> bool:
        return self.smallest_retained is not None and self.smallest_retained < 10 * self.cutoff


def svd_nullspace(matrix: np.ndarray, rel_cutoff: float = 1e-9) -> SvdNullspace:
    """Orthonormal nullspace basis, counting sigma < rel_cutoff * sigma_max as zero."""
    matrix = np.asarray(matrix, dtype=float)
    n = matrix.shape[1]
    if matrix.size == 0 or not np.any(matrix):
        return SvdNullspace(np.eye(n), 0.0, None)
    _, sigma, vt = np.linalg.svd(matrix)
    cutoff = rel_cutoff * sigma[0]
    rank = int(np.sum(sigma > cutoff))
    smallest = float(sigma[rank - 1]) if rank else None
    return SvdNullspace(vt[rank:], float(cutoff), smallest)
