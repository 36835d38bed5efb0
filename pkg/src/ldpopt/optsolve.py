"""Exact maximization of sublinear-sum utilities over eps-private mechanisms.

The search space collapses to scalings of the {1, e^eps} pattern columns:
maximize mu^T theta subject to S theta = 1, theta >= 0, where S is the
k x 2^k pattern matrix. The LP is solved with a dense two-phase primal
simplex under Bland's anti-cycling rule; a brute-force vertex enumeration
serves as an independent oracle at small k.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import AlphabetTooLarge, PatternMatrix, Mechanism, pattern_matrix
from .utilities import UtilitySpec, column_utility

# LP solving is capped at k = 12 (4096 pattern columns).
MAX_LP_K = 12

PIVOT_TOL = 1e-10

# Basic variables below this threshold are pivot noise, not support.
EXTRACT_TOL = 1e-10

MAX_ITERATIONS = 200_000

# Oracle-side acceptance thresholds for candidate vertices.
ORACLE_RESIDUAL_TOL = 1e-10
ORACLE_NEG_TOL = 1e-12


class NumericalBreakdown(RuntimeError):
    """The simplex could not make progress within tolerance."""


class DegenerateBasis(RuntimeError):
    """More than k columns survived extraction thresholding."""


class LPStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class StaircaseLP:
    """maximize obj . theta subject to pattern @ theta = 1, theta >= 0."""

    k: int
    eps: float
    obj: np.ndarray
    pattern: PatternMatrix

    @property
    def rhs(self) -> np.ndarray:
        return np.ones(self.k)

    @property
    def num_columns(self) -> int:
        return self.obj.size


@dataclass(frozen=True)
class LPSolution:
    theta: np.ndarray
    value: float
    basis: tuple[int, ...]
    status: LPStatus


def build_lp(spec: UtilitySpec, eps: float) -> StaircaseLP:
    """Assemble the pattern-column LP for a utility spec at privacy level eps."""
    k = spec.k
    if k > MAX_LP_K:
        raise AlphabetTooLarge(f"LP solving capped at k={MAX_LP_K}")
    pat = pattern_matrix(k, eps)
    S = pat.matrix
    if spec.objective == "ht" and spec.kind.tag != "custom":
        a = spec.p0.probs @ S
        b = spec.p1.probs @ S
        if spec.kind.tag == "kl":
            obj = a * np.log(a / b)
        elif spec.kind.tag == "tv":
            obj = 0.5 * np.abs(a - b)
        else:  # chi2
            obj = (a - b) ** 2 / b
    elif spec.objective == "mi":
        b = spec.p.probs @ S
        obj = (spec.p.probs[:, None] * S * np.log(S)).sum(axis=0) - b * np.log(b)
    else:
        obj = np.array([column_utility(spec, S[:, j]) for j in range(S.shape[1])])
    obj = np.asarray(obj, dtype=float)
    obj.flags.writeable = False
    return StaircaseLP(k=k, eps=eps, obj=obj, pattern=pat)


def _pivot(T: np.ndarray, r: int, j: int) -> None:
    T[r] /= T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])
    T[:, j] = 0.0
    T[r, j] = 1.0


def _run_simplex(T: np.ndarray, basis: np.ndarray, cost: np.ndarray, ncols: int) -> LPStatus:
    """Bland's rule primal simplex on an already-canonical tableau.

    Entering: the lowest-index column whose reduced cost can improve the
    (maximization) objective. Leaving: among minimum-ratio rows, the one
    holding the lowest-index basic variable.
    """
    for _ in range(MAX_ITERATIONS):
        reduced = cost[basis] @ T[:, :ncols] - cost[:ncols]
        candidates = np.flatnonzero(reduced < -PIVOT_TOL)
        if candidates.size == 0:
            return LPStatus.OPTIMAL
        j = int(candidates[0])
        col = T[:, j]
        rows = np.flatnonzero(col > PIVOT_TOL)
        if rows.size == 0:
            return LPStatus.UNBOUNDED
        ratios = T[rows, -1] / col[rows]
        rmin = float(ratios.min())
        ties = rows[ratios <= rmin + 1e-12 * max(1.0, abs(rmin))]
        r = int(ties[np.argmin(basis[ties])])
        _pivot(T, r, j)
        basis[r] = j
    raise NumericalBreakdown("simplex iteration limit reached")


def solve(lp: StaircaseLP) -> LPSolution:
    """Optimal basic feasible solution of the pattern LP.

    Phase 1 starts from an artificial identity basis and also removes
    redundant constraint rows (every row is identical at eps = 0); Phase 2
    maximizes the utility objective over the original columns only.
    """
    S = lp.pattern.matrix
    c = lp.obj
    k, n = S.shape

    T = np.hstack([S, np.eye(k), np.ones((k, 1))])
    basis = np.arange(n, n + k)
    cost1 = np.zeros(n + k)
    cost1[n:] = -1.0
    status = _run_simplex(T, basis, cost1, ncols=n + k)
    if status is not LPStatus.OPTIMAL:
        raise NumericalBreakdown("phase 1 did not terminate at an optimum")
    infeasibility = sum(T[r, -1] for r in range(k) if basis[r] >= n)
    if infeasibility > 1e-9:
        return LPSolution(theta=np.zeros(n), value=float("nan"), basis=(),
                          status=LPStatus.INFEASIBLE)

    # Drive leftover artificials out of the basis; rows that cannot pivot to
    # an original column are redundant constraints and are dropped.
    redundant = []
    for r in range(k):
        if basis[r] >= n:
            pivots = np.flatnonzero(np.abs(T[r, :n]) > PIVOT_TOL)
            if pivots.size:
                _pivot(T, r, int(pivots[0]))
                basis[r] = int(pivots[0])
            else:
                redundant.append(r)
    if redundant:
        keep = [r for r in range(k) if r not in redundant]
        T = T[keep]
        basis = basis[keep]
    T = np.hstack([T[:, :n], T[:, -1:]])

    status = _run_simplex(T, basis, c, ncols=n)
    if status is LPStatus.UNBOUNDED:
        # The feasible region is a bounded polytope, so this is numerical.
        raise NumericalBreakdown("no admissible pivot in a bounded LP")

    theta = np.zeros(n)
    theta[basis] = T[:, -1]

    # Re-solve on the final basis to strip accumulated pivot error.
    cols = sorted(int(j) for j in set(basis))
    refined, *_ = np.linalg.lstsq(S[:, cols], np.ones(k), rcond=None)
    residual = float(np.abs(S[:, cols] @ refined - 1.0).max())
    if residual <= 1e-9 and refined.min() >= -1e-12:
        theta = np.zeros(n)
        theta[cols] = refined
    if float(np.abs(S @ theta - 1.0).max()) > 1e-9 or theta.min() < -1e-12:
        raise NumericalBreakdown("solution fails its feasibility certificate")
    theta.flags.writeable = False
    return LPSolution(theta=theta, value=float(c @ theta),
                      basis=tuple(cols), status=LPStatus.OPTIMAL)


def extract_mechanism(sol: LPSolution, lp: StaircaseLP) -> Mechanism:
    """Materialize the optimal mechanism from the solved LP.

    Keeps pattern columns with weight above EXTRACT_TOL, merges columns that
    are scalar multiples of each other (the all-ones and all-e^eps patterns,
    or everything at eps = 0), and normalizes rows exactly.
    """
    if sol.status is not LPStatus.OPTIMAL:
        raise ValueError("can only extract from an optimal solution")
    S = lp.pattern.matrix
    keep = np.flatnonzero(sol.theta > EXTRACT_TOL)
    if keep.size == 0 or keep.size > lp.k:
        raise DegenerateBasis(f"{keep.size} columns above threshold, expected 1..{lp.k}")
    weights, *_ = np.linalg.lstsq(S[:, keep], np.ones(lp.k), rcond=None)
    weights = np.clip(weights, 0.0, None)
    cols = [S[:, j] * w for j, w in zip(keep, weights) if w > 0]

    merged: list[np.ndarray] = []
    for col in cols:
        direction = col / col.sum()
        for i, existing in enumerate(merged):
            if np.abs(existing / existing.sum() - direction).max() <= 1e-9:
                merged[i] = existing + col
                break
        else:
            merged.append(col)

    rows = np.column_stack(merged)
    rows = rows / rows.sum(axis=1, keepdims=True)
    return Mechanism(rows)


def vertex_oracle(lp: StaircaseLP) -> float:
    """Brute-force optimum by enumerating candidate basic feasible solutions.

    Every vertex of {theta : S theta = 1, theta >= 0} is supported on at
    most k linearly independent columns, so trying every column subset of
    size <= k and keeping the consistent nonnegative solutions is exact.
    Only intended for k <= 4.
    """
    if lp.k > 4:
        raise AlphabetTooLarge("vertex oracle is capped at k=4")
    S = lp.pattern.matrix
    k, n = S.shape
    ones = np.ones(k)
    best = -np.inf
    for size in range(1, k + 1):
        for subset in itertools.combinations(range(n), size):
            A = S[:, subset]
            if size == k:
                try:
                    th = np.linalg.solve(A, ones)
                except np.linalg.LinAlgError:
                    th, *_ = np.linalg.lstsq(A, ones, rcond=None)
            else:
                th, *_ = np.linalg.lstsq(A, ones, rcond=None)
            if not np.all(np.isfinite(th)):
                continue
            if np.abs(A @ th - 1.0).max() > ORACLE_RESIDUAL_TOL:
                continue
            if th.min() < -ORACLE_NEG_TOL:
                continue
            best = max(best, float(lp.obj[list(subset)] @ th))
    return best
