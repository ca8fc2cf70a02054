"""Closed-form reference values for zeros along a segment.

Expected zero count, the second moment of the covariance along the segment
written as a lattice pair sum, and the shapes of the variance upper bounds.
Bound shapes use the constant 1; they track scaling, not certified values.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .lattice import (
    Direction,
    EnergyLevel,
    is_sum_of_two_squares,
    min_pair_distance,
    NotRepresentableError,
)

PI = math.pi

RATIONAL = "RationalSlope"
IRRATIONAL = "IrrationalUnconditional"
GAPPED = "ConjecturalOrGapped"
BOUND_KINDS = (RATIONAL, IRRATIONAL, GAPPED)

_TAYLOR_CUTOFF = 1e-4


def _require_member(m: int) -> None:
    if not is_sum_of_two_squares(m):
        raise NotRepresentableError(m)


def expected_intersections(m: int, L: float) -> float:
    """Mean number of zeros on a segment of length ``L``: ``sqrt(2 m) L``."""
    _require_member(m)
    if L < 0:
        raise ValueError(f"L must be non-negative, got {L}")
    if L == 0:
        warnings.warn("zero-length segment: expected count is 0", stacklevel=2)
        return 0.0
    return math.sqrt(2 * m) * L


def zero_density_constant(m: int) -> float:
    """Kac-Rice zero density of the restricted process, ``sqrt(2) sqrt(m)``."""
    _require_member(m)
    return math.sqrt(2.0) * math.sqrt(m)


def sinc_pair_integral(d, L: float):
    """``|int_0^L exp(2 pi i t d) dt|^2 = sin^2(pi L d) / (pi d)^2``, ``L^2`` at ``d = 0``.

    Accepts scalars or arrays.  Below ``|pi L d| = 1e-4`` the two-term Taylor
    form ``L^2 (1 - (pi L d)^2 / 3)`` is used.
    """
    if not L > 0:
        raise ValueError(f"L must be positive, got {L}")
    d = np.asarray(d, dtype=float)
    x = PI * L * d
    small = np.abs(x) < _TAYLOR_CUTOFF
    safe = np.where(small, 1.0, d)
    out = np.where(small, L * L * (1.0 - x * x / 3.0), np.sin(PI * L * safe) ** 2 / (PI * safe) ** 2)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SecondMomentReport:
    """Second-moment quantities over ``[0, L]^2``.

    ``term_r`` is the integral of ``r^2``; ``term_r1``, ``term_r2`` and
    ``term_r12`` are the integrals of ``(r1 / (2 pi sqrt m))^2``,
    ``(r2 / (2 pi sqrt m))^2`` and ``(r12 / (4 pi^2 m))^2``, each bounded by
    ``pair_sum_bound``.  ``r2_total`` is the unnormalized functional
    ``int int r^2 + (r1/sqrt m)^2 + (r2/sqrt m)^2 + (r12/m)^2``.
    """

    r2_total: float
    term_r: float
    term_r1: float
    term_r2: float
    term_r12: float
    pair_sum_bound: float
    diagonal_part: float
    perpendicular_part: float
    A_alpha_part: float
    A_alpha_bound: float
    perpendicular_pairs: int
    n_points: int

    def to_dict(self) -> dict:
        return asdict(self)


def _projections(level: EnergyLevel, direction: Direction):
    """Projections ``<mu, alpha>``, pair differences ``<mu - mu', alpha>`` and the perpendicular mask.

    Rational directions detect perpendicular pairs with integer arithmetic;
    angle directions take the integer difference first and treat only an
    exact floating ``0.0`` as perpendicular.
    """
    pts = level.array
    d = pts.astype(float) @ direction.alpha
    diff = (pts[:, None, :] - pts[None, :, :]).astype(float) @ direction.alpha
    if direction.is_rational:
        proj = pts @ np.array(direction.integer_vector, dtype=np.int64)
        perp = proj[:, None] == proj[None, :]
    else:
        perp = diff == 0.0
    return d, diff, perp


def second_moment_closed_form(level: EnergyLevel, direction: Direction, L: float) -> SecondMomentReport:
    """Exact pair-sum evaluation of the covariance second moments.

    Uses ``int int g(t1 - t2) = sum |int exp(2 pi i t (d - d'))|^2`` for each
    trigonometric sum, and splits the ``r`` sum into diagonal pairs,
    off-diagonal pairs perpendicular to ``alpha`` and the rest (``A_alpha``).
    """
    n = level.n_points
    m = level.m
    d, diff, perp = _projections(level, direction)
    S = sinc_pair_integral(diff, L)
    S = np.where(perp, L * L, S)
    w1 = d / math.sqrt(m)
    w2 = w1 * w1
    term_r = float(S.sum()) / n**2
    term_r1 = float(w1 @ S @ w1) / n**2
    term_r12 = float(w2 @ S @ w2) / n**2
    off = perp & ~np.eye(n, dtype=bool)
    n_perp = int(np.count_nonzero(off))
    A = ~perp
    dA = diff[A]
    A_bound = float(np.sum(np.minimum(L * L, 1.0 / (PI * PI * dA * dA))))
    r2_total = term_r + 2 * (2 * PI) ** 2 * term_r1 + (4 * PI**2) ** 2 * term_r12
    return SecondMomentReport(
        r2_total=r2_total,
        term_r=term_r,
        term_r1=term_r1,
        term_r2=term_r1,
        term_r12=term_r12,
        pair_sum_bound=term_r,
        diagonal_part=L * L * n / n**2,
        perpendicular_part=L * L * n_perp / n**2,
        A_alpha_part=float(S[A].sum()) / n**2,
        A_alpha_bound=A_bound / n**2,
        perpendicular_pairs=n_perp,
        n_points=n,
    )


def quadrature_second_moments(level: EnergyLevel, direction: Direction, L: float, n: int = 2048):
    """Composite 2-D trapezoid values of the ``r``, ``r1``, ``r12`` second moments.

    Returns ``(I_r, I_r1, I_r12)`` normalized as in :class:`SecondMomentReport`.
    On a uniform grid ``r(t_i - t_j)`` depends on ``i - j`` only, so the
    covariance is evaluated once per lag and broadcast into the full grid.
    """
    from .wave import covariance_arrays

    h = L / n
    lags = np.arange(-n, n + 1) * h
    r, r1, r12 = covariance_arrays(level, direction, lags)
    r1 = r1 / (2 * PI * math.sqrt(level.m))
    r12 = r12 / (4 * PI**2 * level.m)
    w = np.full(n + 1, h)
    w[0] = w[-1] = h / 2
    idx = np.arange(n + 1)
    lag_index = idx[:, None] - idx[None, :] + n
    out = []
    for g in (r, r1, r12):
        G = (g * g)[lag_index]
        out.append(float(w @ G @ w))
    return tuple(out)


@dataclass(frozen=True)
class VarianceBound:
    kind: str
    value: float
    hypothesis_note: str


def variance_bound(level: EnergyLevel, direction: Direction, kind: str, epsilon: float = 0.25) -> VarianceBound:
    """Shape of the variance upper bound for ``kind``, with constant 1.

    RationalSlope and ConjecturalOrGapped give ``m / N``;
    IrrationalUnconditional gives ``m (log m / N)^(4/5)``.
    """
    m, n = level.m, level.n_points
    if kind == RATIONAL:
        if not direction.is_rational:
            raise ValueError("RationalSlope bound requires a rational direction")
        return VarianceBound(kind, m / n, f"rational slope {direction}; constant depends on the direction only")
    if kind == IRRATIONAL:
        if m < 2:
            raise ValueError("log m vanishes for m = 1")
        return VarianceBound(kind, m * (math.log(m) / n) ** 0.8, "unconditional, any direction")
    if kind == GAPPED:
        if not 0 < epsilon < 0.5:
            raise ValueError(f"epsilon must lie in (0, 1/2), got {epsilon}")
        gap = min_pair_distance(level)
        threshold = math.sqrt(m) ** (1 - epsilon)
        holds = gap > threshold
        note = (
            f"min pair distance {gap:.6g} {'>' if holds else '<='} sqrt(m)^(1-eps)={threshold:.6g} "
            f"(eps={epsilon}): gap condition {'holds' if holds else 'fails'}; "
            "otherwise conditional on O(1) points on arcs of length sqrt(m)^(1/2+eps)"
        )
        return VarianceBound(kind, m / n, note)
    raise ValueError(f"unknown bound kind {kind!r}; expected one of {BOUND_KINDS}")


def gap_condition_holds(level: EnergyLevel, epsilon: float) -> bool:
    return min_pair_distance(level) > math.sqrt(level.m) ** (1 - epsilon)


def applicable_bounds(level: EnergyLevel, direction: Direction) -> dict[str, VarianceBound]:
    kinds = [IRRATIONAL, GAPPED]
    if direction.is_rational:
        kinds.insert(0, RATIONAL)
    if level.m < 2:
        kinds.remove(IRRATIONAL)
    return {k: variance_bound(level, direction, k) for k in kinds}
