"""Laplacian and Ricci solitons, self-similar profiles and the Laplacian flow.

A Laplacian soliton satisfies ``Delta phi = c phi - theta(D) phi`` for a
derivation D (the Lie derivative along the field generated by D is
``-theta(D)``); an algebraic Ricci soliton satisfies ``Ric = c id + D``.
Both are solved as linear least-squares problems over an orthonormalized
basis of Der(g), so the reported (c, D) is the minimum-norm minimizer.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .exterior import DIM, PHI, KForm, blades, theta_action
from .g2core import DenseLaplacian, G2Structure, PositivityError, hodge_laplacian, ricci_generic
from .liealg import LieAlgebra, derivation_residual, derivation_space

SHRINKING, STEADY, EXPANDING = "shrinking", "steady", "expanding"
LAPLACIAN, RICCI = "laplacian", "ricci"

# coefficients of the diagonal family of 3-forms, in output order
DIAGONAL_BLADES = ((1, 2, 7), (3, 4, 7), (5, 6, 7), (1, 3, 5), (1, 4, 6), (2, 3, 6), (2, 4, 5))


class StepUnderflowError(RuntimeError):
    pass


class FlowPositivityError(PositivityError):
    """The flow left the positive 3-forms; ``last_t`` is the last accepted time."""

    def __init__(self, message: str, last_t: float):
        super().__init__(message)
        self.last_t = last_t


def classify(c: float, tol: float, scale: float = 0.0) -> str:
    """Sign of c with a steady band |c| < tol (1 + scale)."""
    if abs(c) < tol * (1.0 + scale):
        return STEADY
    return SHRINKING if c < 0 else EXPANDING


def singularity_time(c: float) -> float | None:
    return -3.0 / (2.0 * c) if c < 0 else None


@dataclass(frozen=True)
class SolitonSolution:
    kind: str
    c: float
    D: np.ndarray
    residual: float
    is_soliton: bool
    classification: str
    tol: float
    singularity_time: float | None = None


def _theta_matrix(M, degree: int) -> np.ndarray:
    """Matrix of theta(M) on k-forms in the sorted blade basis."""
    cols = [theta_action(M, KForm(degree, {b: 1})).to_vector() for b in blades(degree)]
    return np.column_stack(cols).astype(float)


def _orthonormal_derivations(g: LieAlgebra) -> np.ndarray:
    """Rows: an orthonormal (Frobenius) basis of Der(g), flattened row-major."""
    space = derivation_space(g)
    if not space.dim:
        return np.zeros((0, DIM * DIM))
    flat = np.array([np.array(D, dtype=float).ravel() for D in space.basis])
    q, _ = np.linalg.qr(flat.T)
    return q.T


def _lstsq(columns: np.ndarray, target: np.ndarray) -> np.ndarray:
    # SVD-based and minimum-norm; never forms normal equations
    sol, *_ = np.linalg.lstsq(columns, target, rcond=None)
    return sol


def laplacian_soliton_residual(s: G2Structure, c, D) -> float:
    """|Delta phi - c phi + theta(D) phi| recomputed from scratch."""
    lap = hodge_laplacian(s, s.phi)
    defect = lap - c * s.phi + theta_action(np.asarray(D, dtype=float).tolist(), s.phi)
    return s.norm(defect)


def solve_laplacian_soliton(s: G2Structure, tol: float = 1e-8) -> SolitonSolution:
    lap = hodge_laplacian(s, s.phi)
    phi_vec = s.phi.to_vector().astype(float)
    lap_vec = lap.to_vector().astype(float)
    basis = _orthonormal_derivations(s.algebra)
    cols = [phi_vec] + [-theta_action(b.reshape(DIM, DIM).tolist(), s.phi).to_vector().astype(float)
                        for b in basis]
    sol = _lstsq(np.column_stack(cols), lap_vec)
    c = float(sol[0])
    D = (sol[1:] @ basis).reshape(DIM, DIM) if len(basis) else np.zeros((DIM, DIM))
    residual = laplacian_soliton_residual(s, c, D)
    kind = classify(c, tol, float(np.linalg.norm(lap_vec)))
    return SolitonSolution(
        LAPLACIAN, c, D, residual, residual < tol, kind, tol,
        singularity_time(c) if kind == SHRINKING else None,
    )


def solve_ricci_soliton(target, tol: float = 1e-8) -> SolitonSolution:
    """Best (c, D) with Ric = c id + D; ``target`` is a FamilySpec, G2Structure or LieAlgebra."""
    from .family import FamilySpec, ricci_operator

    if isinstance(target, FamilySpec):
        ric = np.array(ricci_operator(target).ricci_operator, dtype=float)
        g = target.algebra
    else:
        g = target.algebra if isinstance(target, G2Structure) else target
        ric = np.array(ricci_generic(g), dtype=float)
    basis = _orthonormal_derivations(g)
    cols = np.column_stack([np.eye(DIM).ravel()] + list(basis))
    sol = _lstsq(cols, ric.ravel())
    c = float(sol[0])
    D = (sol[1:] @ basis).reshape(DIM, DIM) if len(basis) else np.zeros((DIM, DIM))
    residual = float(np.linalg.norm(ric - c * np.eye(DIM) - D))
    kind = classify(c, tol, float(np.linalg.norm(ric)))
    return SolitonSolution(RICCI, c, D, residual, residual < tol, kind, tol)


def rationalize_soliton(s: G2Structure, sol: SolitonSolution, max_denominator: int = 10**6):
    """Exact (c, D) near a float Laplacian soliton, or None.

    Each entry is rounded to the nearest fraction with bounded denominator;
    the result is kept only if it satisfies the soliton equation and the
    derivation condition exactly on an exact structure.
    """
    if sol.kind != LAPLACIAN or not s.algebra.is_exact() or not s.phi.is_exact():
        return None
    q = lambda v: Fraction(float(v)).limit_denominator(max_denominator)
    c = q(sol.c)
    D = [[q(v) for v in row] for row in np.asarray(sol.D)]
    if derivation_residual(s.algebra, D) != 0:
        return None
    defect = hodge_laplacian(s, s.phi) - c * s.phi + theta_action(D, s.phi)
    if not defect.is_zero(0):
        return None
    return c, D


# -- self-similar solutions ---------------------------------------------------

def existence_interval(c: float) -> tuple[float, float]:
    if c == 0:
        return (-math.inf, math.inf)
    T = -3.0 / (2.0 * c)
    return (-math.inf, T) if c < 0 else (T, math.inf)


def soliton_time_profile(c: float, t: float) -> tuple[float, float]:
    """(scale b(t), r(t)) with phi(t) = b(t) exp(-r(t) theta(D)) phi."""
    lo, hi = existence_interval(c)
    if not lo < t < hi:
        raise ValueError(f"t = {t} outside the existence interval ({lo}, {hi})")
    if c == 0:
        return 1.0, float(t)
    k = 1.0 + 2.0 * c * t / 3.0
    return k ** 1.5, 3.0 / (2.0 * c) * math.log(k)


def gs_soliton_constant(s: float) -> float:
    return -15.0 / 8.0 + 8.0 * float(s) ** 2


def self_similar_profile(s: float, t: float) -> tuple[float, float, tuple[float, float]]:
    """Scale, r(t) and the maximal interval of the self-similar solution on G_s."""
    c = gs_soliton_constant(s)
    if abs(c) < 1e-14:  # s = sqrt(15)/8
        c = 0.0
    b, r = soliton_time_profile(c, t)
    return b, r, existence_interval(c)


def reconstruct_soliton_flow(phi: KForm, c: float, D, t: float) -> np.ndarray:
    """b(t) expm(-r(t) theta(D)) phi as a 35-vector, by the matrix exponential."""
    b, r = soliton_time_profile(c, t)
    theta = _theta_matrix(np.asarray(D, dtype=float).tolist(), 3)
    return b * (scipy.linalg.expm(-r * theta) @ phi.to_vector().astype(float))


def gs_closed_form_flow(s: float, t: float) -> np.ndarray:
    """Diagonal coefficients of phi(t) on G_s from the exponents per blade.

    The exponent of each blade e^{ijk} is D_i + D_j + D_k with D = D_s; for
    e^{245} this gives 15/8 - 8s^2, the others 25/16 -+ 2s - 4s^2, 35/8 - 8s^2.
    """
    b, r, _ = self_similar_profile(s, t)
    s = float(s)
    ex = {
        (1, 2, 7): 25 / 16 - 2 * s - 4 * s * s,
        (3, 4, 7): 25 / 16 + 2 * s - 4 * s * s,
        (5, 6, 7): 35 / 8 - 8 * s * s,
        (1, 3, 5): 35 / 8 - 8 * s * s,
        (1, 4, 6): 35 / 8 - 8 * s * s,
        (2, 3, 6): 35 / 8 - 8 * s * s,
        (2, 4, 5): 15 / 8 - 8 * s * s,
    }
    return np.array([b * PHI[blade] * math.exp(r * ex[blade]) for blade in DIAGONAL_BLADES])


# -- Laplacian flow -----------------------------------------------------------

@dataclass(frozen=True)
class FlowState:
    t: float
    phi: KForm
    margin: float
    laplacian_norm: float

    @property
    def coefficients(self) -> np.ndarray:
        return self.phi.to_vector().astype(float)

    def diagonal(self) -> list[float]:
        return [float(self.phi[b]) for b in DIAGONAL_BLADES]


@dataclass
class FlowResult:
    states: list[FlowState] = field(default_factory=list)
    blowup_time: float | None = None
    finished: bool = False
    t_reached: float = 0.0  # time of the last accepted step

    @property
    def final(self) -> FlowState:
        return self.states[-1]


def flow_integrate(
    s0: G2Structure,
    t_end: float,
    dt: float,
    *,
    sample_every: int = 1,
    adaptive: bool = False,
    blowup_threshold: float = 1e6,
    min_dt: float = 1e-12,
) -> FlowResult:
    """Classical RK4 for d phi / dt = Delta_phi phi on the 35 coefficients.

    The induced metric and its Hodge star are rebuilt at every stage.  The
    run stops early, with ``blowup_time`` set, once |Delta phi| (coefficient
    norm) exceeds ``blowup_threshold``.  In adaptive mode dt is halved while
    the positivity margin of a trial step falls below 1e-6.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if sample_every < 1:
        raise ValueError("sample_every must be >= 1")
    lap = DenseLaplacian(s0.algebra)
    y = s0.phi.to_vector().astype(float)
    result = FlowResult()

    def evaluate(vec, when):
        try:
            return lap(vec)
        except PositivityError as exc:
            raise FlowPositivityError(
                f"positivity lost near t = {when:.6g}: {exc}", result.t_reached
            ) from exc

    k1, margin = evaluate(y, 0.0)
    result.states.append(FlowState(0.0, KForm.from_vector(3, y), margin, float(np.linalg.norm(k1))))
    try:
        _rk4_loop(result, evaluate, y, k1, t_end, dt, sample_every, adaptive, blowup_threshold, min_dt)
    except (FlowPositivityError, StepUnderflowError) as exc:
        exc.states = result.states  # trajectory up to the last accepted step
        raise
    return result


def _rk4_loop(result, evaluate, y, k1, t_end, dt, sample_every, adaptive, blowup_threshold, min_dt):
    t = 0.0
    step = 0
    h = dt
    while t < t_end - 1e-12 * max(1.0, abs(t_end)):
        h = min(h, t_end - t)
        while True:
            try:
                k2, _ = evaluate(y + 0.5 * h * k1, t + 0.5 * h)
                k3, _ = evaluate(y + 0.5 * h * k2, t + 0.5 * h)
                k4, _ = evaluate(y + h * k3, t + h)
                trial = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
                k_next, margin = evaluate(trial, t + h)
            except FlowPositivityError:
                if not adaptive:
                    raise
                margin = -1.0
            if adaptive and margin < 1e-6:
                h /= 2.0
                if h < min_dt:
                    raise StepUnderflowError(f"step size underflow at t = {t:.6g}")
                continue
            break
        # fixed steps land on multiples of dt, avoiding accumulated round-off in t
        t = t + h if adaptive else min((step + 1) * dt, t_end)
        y, k1 = trial, k_next
        result.t_reached = t
        if adaptive:
            h = dt
        step += 1
        norm = float(np.linalg.norm(k1))
        state = FlowState(t, KForm.from_vector(3, y), margin, norm)
        if norm > blowup_threshold:
            result.states.append(state)
            result.blowup_time = t
            return
        if step % sample_every == 0 or t >= t_end - 1e-12 * max(1.0, abs(t_end)):
            result.states.append(state)
    result.finished = True


TRAJECTORY_HEADER = ["t"] + ["e" + "".join(map(str, b)) for b in DIAGONAL_BLADES] + [
    "laplacian_norm", "positivity_margin",
]


def trajectory_rows(states: Iterable[FlowState]) -> list[list[str]]:
    rows = []
    for st in states:
        rows.append([repr(st.t)] + [repr(v) for v in st.diagonal()]
                    + [repr(st.laplacian_norm), repr(st.margin)])
    return rows


def write_trajectory_csv(path, states: Sequence[FlowState]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRAJECTORY_HEADER)
        w.writerows(trajectory_rows(states))


def off_diagonal_drift(states: Iterable[FlowState]) -> float:
    """Largest coefficient outside the diagonal family seen along a trajectory."""
    diag = set(DIAGONAL_BLADES)
    worst = 0.0
    for st in states:
        for b, v in st.phi.items():
            if b not in diag:
                worst = max(worst, abs(float(v)))
    return worst
