"""Objective functions: f-divergences, mutual information, and the
per-column sublinear scores that reduce them to sums over mechanism columns.

Every utility here decomposes as U(Q) = sum_y mu(Q_y) for a positively
homogeneous, subadditive mu, which is what makes the extremal-mechanism LP
work. All logarithms are natural; divergences are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import Distribution, DimensionMismatch, Mechanism, induced_marginal


class AbsoluteContinuityViolated(ValueError):
    """The first argument puts mass where the second has none."""


class ConvexityViolation(ValueError):
    """A user-supplied divergence generator failed the convexity spot-check."""


@dataclass(frozen=True)
class FDivergenceKind:
    """A convex generator f with f(1) = 0 defining an f-divergence.

    Use the module-level presets KL, TV, CHI2, or `custom(f)` for caller
    supplied generators (declared convex; spot-checked on use).
    """

    tag: str
    custom_f: Callable[[float], float] | None = None

    def f(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.tag == "kl":
            return np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0)), 0.0)
        if self.tag == "tv":
            return 0.5 * np.abs(x - 1.0)
        if self.tag == "chi2":
            return (x - 1.0) ** 2
        return np.vectorize(self.custom_f, otypes=[float])(x)


KL = FDivergenceKind("kl")
TV = FDivergenceKind("tv")
CHI2 = FDivergenceKind("chi2")


def custom(f: Callable[[float], float]) -> FDivergenceKind:
    """Wrap a caller-supplied convex generator with f(1) = 0."""
    return FDivergenceKind("custom", custom_f=f)


def _spot_check_convexity(kind: FDivergenceKind, ratios: np.ndarray) -> None:
    """100-point midpoint-convexity check over the observed ratio range.

    Only custom generators are checked; the presets are convex by
    construction. A non-convex generator voids the extremal-mechanism
    reduction, so this is a hard error.
    """
    if kind.tag != "custom":
        return
    lo = float(min(np.min(ratios), 1.0))
    hi = float(max(np.max(ratios), 1.0))
    if hi <= lo:
        hi = lo + 1.0
    grid = np.linspace(lo, hi, 100)
    vals = kind.f(grid)
    scale = max(1.0, float(np.max(np.abs(vals))))
    mid = kind.f((grid[:-2] + grid[2:]) / 2.0)
    if np.any(mid > (vals[:-2] + vals[2:]) / 2.0 + 1e-9 * scale):
        raise ConvexityViolation("custom generator is not convex on the observed range")
    if abs(float(kind.f(np.array([1.0]))[0])) > 1e-9:
        raise ConvexityViolation("custom generator must satisfy f(1) = 0")


@dataclass(frozen=True)
class UtilitySpec:
    """Which objective to maximize: an f-divergence between the induced
    marginals of two priors, or mutual information under one prior."""

    objective: str  # "ht" | "mi"
    kind: FDivergenceKind | None = None
    p0: Distribution | None = None
    p1: Distribution | None = None
    p: Distribution | None = None

    def __post_init__(self):
        if self.objective == "ht":
            if self.kind is None or self.p0 is None or self.p1 is None:
                raise ValueError("hypothesis-testing spec needs kind, p0 and p1")
            if self.p0.k != self.p1.k:
                raise DimensionMismatch("p0 and p1 must share an alphabet")
            if not (self.p0.is_positive and self.p1.is_positive):
                raise ValueError("priors must be positive")
        elif self.objective == "mi":
            if self.p is None:
                raise ValueError("information-preservation spec needs p")
            if not self.p.is_positive:
                raise ValueError("prior must be positive")
        else:
            raise ValueError(f"unknown objective {self.objective!r}")

    @property
    def k(self) -> int:
        return self.p.k if self.objective == "mi" else self.p0.k


def hypothesis_testing(kind: FDivergenceKind, p0: Distribution,
                       p1: Distribution) -> UtilitySpec:
    return UtilitySpec("ht", kind=kind, p0=p0, p1=p1)


def information_preservation(p: Distribution) -> UtilitySpec:
    return UtilitySpec("mi", p=p)


def entropy(P: Distribution) -> float:
    """Shannon entropy in nats, with 0 log 0 = 0."""
    p = P.probs
    pos = p > 0
    return float(-(p[pos] * np.log(p[pos])).sum())


def f_divergence(kind: FDivergenceKind, M0: Distribution, M1: Distribution) -> float:
    """D_f(M0 || M1) = sum_y M1(y) f(M0(y) / M1(y)), with 0 f(0/0) = 0.

    KL (and chi-squared, and custom generators) require M0 absolutely
    continuous with respect to M1; TV is evaluated as half the L1 distance,
    which needs no such condition.
    """
    if M0.k != M1.k:
        raise DimensionMismatch("marginals must share an alphabet")
    a, b = M0.probs, M1.probs
    if kind.tag == "tv":
        return 0.5 * float(np.abs(a - b).sum())
    if np.any((b == 0) & (a > 0)):
        raise AbsoluteContinuityViolated("M0 has mass where M1 has none")
    pos = b > 0
    ratios = a[pos] / b[pos]
    if kind.tag == "kl":
        nz = ratios > 0
        return float((b[pos][nz] * ratios[nz] * np.log(ratios[nz])).sum())
    if kind.tag == "chi2":
        return float((b[pos] * (ratios - 1.0) ** 2).sum())
    _spot_check_convexity(kind, ratios)
    return float((b[pos] * kind.f(ratios)).sum())


def mutual_information(P: Distribution, Q: Mechanism) -> float:
    """I(X;Y) for X ~ P privatized through Q, in nats.

    Terms with Q(y|x) = 0 contribute zero. The prior must be positive.
    """
    if P.k != Q.k:
        raise DimensionMismatch(f"P has k={P.k} but Q has k={Q.k}")
    if not P.is_positive:
        raise ValueError("prior must be positive")
    m = induced_marginal(P, Q).probs
    rows = Q.rows
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = P.probs[:, None] * rows * (np.log(rows) - np.log(m)[None, :])
    return float(np.where(rows > 0, terms, 0.0).sum())


def column_utility(spec: UtilitySpec, col: np.ndarray) -> float:
    """The sublinear column score mu(Q_y); an all-zero column scores 0.

    Hypothesis testing: (P1.col) f(P0.col / P1.col).
    Information preservation: sum_x P(x) c(x) log(c(x) / P.col).
    """
    c = np.asarray(col, dtype=float)
    if c.ndim != 1 or c.size != spec.k:
        raise DimensionMismatch(f"column must have length {spec.k}")
    if np.any(c < 0):
        raise ValueError("column entries must be nonnegative")
    if spec.objective == "ht":
        a = float(spec.p0.probs @ c)
        b = float(spec.p1.probs @ c)
        if b <= 0:
            return 0.0
        r = a / b
        if spec.kind.tag == "kl":
            return a * math.log(r) if a > 0 else 0.0
        if spec.kind.tag == "tv":
            return 0.5 * abs(a - b)
        if spec.kind.tag == "chi2":
            return (a - b) ** 2 / b
        return b * float(spec.kind.f(np.array([r]))[0])
    m = float(spec.p.probs @ c)
    if m <= 0:
        return 0.0
    pos = c > 0
    return float((spec.p.probs[pos] * c[pos] * (np.log(c[pos]) - math.log(m))).sum())


def utility(spec: UtilitySpec, Q: Mechanism) -> float:
    """U(Q) = sum over columns of the sublinear score.

    Agrees with the direct f_divergence / mutual_information evaluation of
    the induced marginals.
    """
    if Q.k != spec.k:
        raise DimensionMismatch(f"spec has k={spec.k} but Q has k={Q.k}")
    if spec.objective == "ht" and spec.kind.tag == "custom":
        a = spec.p0.probs @ Q.rows
        b = spec.p1.probs @ Q.rows
        pos = b > 0
        if pos.any():
            _spot_check_convexity(spec.kind, a[pos] / b[pos])
    return float(sum(column_utility(spec, Q.column(y)) for y in range(Q.l)))
