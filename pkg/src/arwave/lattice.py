"""Lattice points on circles: the energy levels of the flat torus.

An integer ``m`` is an admissible energy level when it is a sum of two
squares.  Everything here is exact integer arithmetic where possible;
floating point only enters through angles and unit directions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi


class NotRepresentableError(ValueError):
    """Raised when an integer is not a sum of two squares."""

    def __init__(self, m: int):
        super().__init__(f"m={m} is not representable as a sum of two squares")
        self.m = m


# -- arithmetic ---------------------------------------------------------------

def factorize(m: int) -> dict[int, int]:
    """Prime factorization by trial division."""
    if m < 1:
        raise ValueError(f"m must be a positive integer, got {m}")
    factors: dict[int, int] = {}
    n = m
    for p in (2, 3):
        while n % p == 0:
            factors[p] = factors.get(p, 0) + 1
            n //= p
    p = 5
    while p * p <= n:
        for q in (p, p + 2):
            while n % q == 0:
                factors[q] = factors.get(q, 0) + 1
                n //= q
        p += 6
    if n > 1:
        factors[n] = factors.get(n, 0) + 1
    return factors


def classify_sum_of_two_squares(m: int) -> tuple[bool, dict[int, int]]:
    """Return ``(is_member, factorization)`` for ``m``.

    ``m`` is a sum of two squares iff every prime ``q = 3 (mod 4)`` divides it
    to an even power.
    """
    factors = factorize(m)
    ok = all(e % 2 == 0 for p, e in factors.items() if p % 4 == 3)
    return ok, factors


def is_sum_of_two_squares(m: int) -> bool:
    if m < 1:
        return False
    return classify_sum_of_two_squares(m)[0]


def _r2_from_factors(factors: dict[int, int]) -> int:
    n = 4
    for p, e in factors.items():
        if p % 4 == 1:
            n *= e + 1
    return n


def count_representations(m: int) -> int:
    """N_m = r_2(m) = 4 * prod(e_i + 1) over primes p_i = 1 (mod 4)."""
    ok, factors = classify_sum_of_two_squares(m)
    if not ok:
        raise NotRepresentableError(m)
    return _r2_from_factors(factors)


# -- directions ---------------------------------------------------------------

@dataclass(frozen=True)
class Direction:
    """Unit direction of a segment.

    Either a rational slope ``p/q`` (``alpha`` collinear with the integer
    vector ``(q, p)``) or an angle ``theta`` in radians.
    """

    p: int | None = None
    q: int | None = None
    theta: float | None = None

    def __post_init__(self):
        if self.theta is None:
            if self.p is None or self.q is None:
                raise ValueError("Direction needs either (p, q) or theta")
            if (self.p, self.q) == (0, 0):
                raise ValueError("slope vector (q, p) must be nonzero")
            if self.q < 0 or math.gcd(self.p, self.q) != 1:
                raise ValueError(
                    f"rational slope must satisfy gcd(p, q)=1 and q >= 0, got p={self.p}, q={self.q}"
                )
        elif self.p is not None or self.q is not None:
            raise ValueError("Direction takes either (p, q) or theta, not both")
        elif not math.isfinite(self.theta):
            raise ValueError("theta must be finite")

    @classmethod
    def rational(cls, p: int, q: int) -> "Direction":
        """Slope ``p/q``; the fraction is reduced and its sign moved onto ``p``."""
        if q == 0 and p == 0:
            raise ValueError("slope vector (q, p) must be nonzero")
        if q == 0:
            return cls(p=1, q=0)
        fr = Fraction(p, q)
        return cls(p=fr.numerator, q=fr.denominator)

    @classmethod
    def angle(cls, theta: float) -> "Direction":
        return cls(theta=float(theta))

    @classmethod
    def parse(cls, text: str) -> "Direction":
        """Parse ``p/q`` or ``theta:<radians>``."""
        text = text.strip()
        if text.startswith("theta:"):
            return cls.angle(float(text[len("theta:"):]))
        if "/" in text:
            p, q = text.split("/", 1)
            return cls.rational(int(p), int(q))
        raise ValueError(f"cannot parse direction {text!r}; use p/q or theta:<radians>")

    @property
    def is_rational(self) -> bool:
        return self.theta is None

    @property
    def integer_vector(self) -> tuple[int, int]:
        if not self.is_rational:
            raise ValueError("angle directions have no integer vector")
        return (self.q, self.p)

    @cached_property
    def alpha(self) -> np.ndarray:
        if self.is_rational:
            norm = math.hypot(self.q, self.p)
            return np.array([self.q / norm, self.p / norm])
        return np.array([math.cos(self.theta), math.sin(self.theta)])

    def __str__(self) -> str:
        if self.is_rational:
            return f"{self.p}/{self.q}"
        return f"theta:{self.theta!r}"


# -- energy levels ------------------------------------------------------------

def _angle(x: int, y: int) -> float:
    a = math.atan2(y, x)
    return a + TWO_PI if a < 0 else a


def _sorted_by_angle(points) -> tuple[tuple[int, int], ...]:
    return tuple(sorted(points, key=lambda xy: _angle(*xy)))


def _images(x: int, y: int) -> set[tuple[int, int]]:
    out = set()
    for a, b in ((x, y), (y, x)):
        for sa in (1, -1):
            for sb in (1, -1):
                out.add((sa * a, sb * b))
    return out


@dataclass(frozen=True, eq=False)
class EnergyLevel:
    """An admissible ``m`` with its lattice point set, sorted by angle."""

    m: int
    points: tuple[tuple[int, int], ...]
    factorization: dict[int, int] = field(repr=False)

    @property
    def n_points(self) -> int:
        return len(self.points)

    @property
    def radius(self) -> float:
        return math.sqrt(self.m)

    @cached_property
    def array(self) -> np.ndarray:
        """Points as an ``(N, 2)`` int64 array."""
        return np.array(self.points, dtype=np.int64).reshape(-1, 2)

    @cached_property
    def angles(self) -> np.ndarray:
        return np.array([_angle(x, y) for x, y in self.points])

    def __eq__(self, other):
        if not isinstance(other, EnergyLevel):
            return NotImplemented
        return self.m == other.m and self.points == other.points

    def __hash__(self):
        return hash((self.m, self.points))


def enumerate_lattice_points(m: int) -> EnergyLevel:
    """All ``(x, y)`` with ``x^2 + y^2 = m``, sorted by angle in ``[0, 2pi)``."""
    ok, factors = classify_sum_of_two_squares(m)
    if not ok:
        raise NotRepresentableError(m)
    pts: set[tuple[int, int]] = set()
    for x in range(math.isqrt(m) + 1):
        r = m - x * x
        y = math.isqrt(r)
        if y * y == r:
            pts |= _images(x, y)
    return EnergyLevel(m, _sorted_by_angle(pts), factors)


def _spf_sieve(limit: int) -> np.ndarray:
    spf = np.zeros(limit + 1, dtype=np.int64)
    for p in range(2, limit + 1):
        if spf[p] == 0:
            spf[p::p][spf[p::p] == 0] = p
    return spf


def levels_upto(X: int) -> Iterator[EnergyLevel]:
    """Yield every energy level ``1 <= m <= X`` in increasing order.

    Bulk version of :func:`enumerate_lattice_points`: representations are
    generated from the octant ``0 <= x <= y`` in one pass and factorizations
    come from a smallest-prime-factor sieve.
    """
    if X < 1:
        return
    reps: dict[int, list[tuple[int, int]]] = {}
    for x in range(math.isqrt(X) + 1):
        for y in range(x, math.isqrt(X - x * x) + 1):
            s = x * x + y * y
            if s:
                reps.setdefault(s, []).append((x, y))
    spf = _spf_sieve(X)
    for m in sorted(reps):
        factors: dict[int, int] = {}
        n = m
        while n > 1:
            p = int(spf[n])
            factors[p] = factors.get(p, 0) + 1
            n //= p
        pts: set[tuple[int, int]] = set()
        for x, y in reps[m]:
            pts |= _images(x, y)
        yield EnergyLevel(m, _sorted_by_angle(pts), factors)


def antipodal_half_set(level: EnergyLevel) -> list[tuple[int, int]]:
    """One representative of each pair ``{mu, -mu}``: the one with angle in ``[0, pi)``."""
    return [(x, y) for x, y in level.points if y > 0 or (y == 0 and x > 0)]


# -- geometry on the circle ---------------------------------------------------

def min_pair_distance(level: EnergyLevel) -> float:
    """Smallest ``|mu - mu'|`` over distinct lattice points.

    On a circle the closest pair is angularly adjacent, so only neighbours in
    the angular order are compared (exact integer squared distances).
    """
    return math.sqrt(min_pair_distance_sq(level))


def min_pair_distance_sq(level: EnergyLevel) -> int:
    pts = level.points
    n = len(pts)
    if n < 2:
        raise ValueError("min_pair_distance needs at least two lattice points")
    best = None
    for i in range(n):
        (x0, y0), (x1, y1) = pts[i], pts[(i + 1) % n]
        d = (x0 - x1) ** 2 + (y0 - y1) ** 2
        if best is None or d < best:
            best = d
    return best


# Slack for closed-arc comparisons of floating angles.
_ARC_RTOL = 1e-12


def arc_max_occupancy(level: EnergyLevel, arc_length: float) -> int:
    """Most lattice points on any closed arc of the given length."""
    if arc_length <= 0:
        raise ValueError("arc_length must be positive")
    n = level.n_points
    width = arc_length / level.radius
    if width >= TWO_PI:
        return n
    limit = width * (1 + _ARC_RTOL)
    ang = level.angles
    ext = np.concatenate([ang, ang + TWO_PI])
    best = 1
    j = 0
    for i in range(n):
        if j < i:
            j = i
        while j + 1 < i + n and ext[j + 1] - ext[i] <= limit:
            j += 1
        best = max(best, j - i + 1)
    return best


@dataclass(frozen=True)
class NearOrthogonalArc:
    """Arc ``[center - length/(2R), center + length/(2R)]`` on the circle of radius R."""

    center_angle: float
    length: float
    exact_length: float
    points: tuple[tuple[int, int], ...]

    def contains_angle(self, phi: float, radius: float) -> bool:
        half = self.length / (2 * radius)
        delta = (phi - self.center_angle + math.pi) % TWO_PI - math.pi
        return abs(delta) <= half * (1 + _ARC_RTOL) + 1e-15


def near_orthogonal_arc(level: EnergyLevel, B: Sequence[int], beta, c: float) -> NearOrthogonalArc:
    """Lattice points ``B'`` whose chord to ``B`` is nearly orthogonal to ``beta``.

    Returns every ``B' != B`` with ``|<B - B', beta>| <= c |B - B'|`` together
    with an arc containing all of them.  The chords through ``B`` within angle
    ``arcsin(c)`` of the normal to ``beta`` sweep a central angle of
    ``4 arcsin(c)`` (inscribed angle theorem), centred on the far end of the
    chord through ``B`` along that normal.  The reported ``length`` is the
    cover ``4 c sqrt(m) / sqrt(1 - c^2)``, which dominates the exact length.
    """
    if not 0 < c < 0.5:
        raise ValueError(f"c must lie in (0, 1/2), got {c}")
    B = (int(B[0]), int(B[1]))
    if B[0] ** 2 + B[1] ** 2 != level.m:
        raise ValueError(f"B={B} is not on the circle of radius sqrt({level.m})")
    beta = np.asarray(beta, dtype=float)
    beta = beta / np.hypot(*beta)
    normal = np.array([-beta[1], beta[0]])
    s = -2.0 * (B[0] * normal[0] + B[1] * normal[1])
    center = (B[0] + s * normal[0], B[1] + s * normal[1])
    center_angle = math.atan2(center[1], center[0]) % TWO_PI
    R = level.radius
    found = []
    for x, y in level.points:
        if (x, y) == B:
            continue
        dx, dy = B[0] - x, B[1] - y
        if abs(dx * beta[0] + dy * beta[1]) <= c * math.hypot(dx, dy):
            found.append((x, y))
    arc = NearOrthogonalArc(
        center_angle=center_angle,
        length=4 * c * R / math.sqrt(1 - c * c),
        exact_length=4 * math.asin(c) * R,
        points=tuple(found),
    )
    for x, y in found:
        if not arc.contains_angle(_angle(x, y), R):
            raise AssertionError(f"point {(x, y)} escaped the near-orthogonal arc")
    return arc


# -- pair sums ----------------------------------------------------------------

def _resolve_vector(v):
    """Return ``(integer_vector or None, float unit vector)``."""
    if isinstance(v, Direction):
        if v.is_rational:
            return v.integer_vector, v.alpha
        return None, v.alpha
    if len(v) != 2:
        raise ValueError("v must be a 2-vector")
    if all(isinstance(c, (int, np.integer)) for c in v):
        iv = (int(v[0]), int(v[1]))
        if iv == (0, 0):
            raise ValueError("v must be nonzero")
        return iv, np.array(iv, dtype=float) / math.hypot(*iv)
    fv = np.asarray(v, dtype=float)
    if not np.any(fv):
        raise ValueError("v must be nonzero")
    return None, fv


def _pair_products(level: EnergyLevel, v):
    """Matrix of ``<mu - mu', v>`` and the boolean mask of ``A_v``.

    Integer vectors are handled exactly; float vectors use the raw floating
    inner product and only an exact ``0.0`` counts as zero.
    """
    iv, fv = _resolve_vector(v)
    pts = level.array
    if iv is not None:
        proj = pts @ np.array(iv, dtype=np.int64)
        diff = proj[:, None] - proj[None, :]
        return diff, diff != 0, iv
    # integer differences first, then one floating dot product per pair
    diff = (pts[:, None, :] - pts[None, :, :]).astype(float) @ fv
    return diff, diff != 0.0, None


def pair_set_A(level: EnergyLevel, v) -> Iterator[tuple[tuple[int, int], tuple[int, int]]]:
    """Ordered pairs ``(mu, mu')`` with ``<mu - mu', v> != 0``."""
    _, mask, _ = _pair_products(level, v)
    pts = level.points
    for i, j in zip(*np.nonzero(mask)):
        yield pts[i], pts[j]


def rational_pair_sum(level: EnergyLevel, q: int, p: int) -> float:
    """Sum over ``A_(q,p)`` of ``1 / <mu - mu', (q, p)>^2`` with integer inner products."""
    if (q, p) == (0, 0):
        raise ValueError("(q, p) must be nonzero")
    if math.gcd(q, p) != 1:
        raise ValueError(f"gcd(q, p) must be 1, got q={q}, p={p}")
    diff, mask, _ = _pair_products(level, (int(q), int(p)))
    k = diff[mask].astype(float)
    return float(np.sum(1.0 / (k * k)))


def _unit_products(level: EnergyLevel, direction):
    diff, mask, iv = _pair_products(level, direction)
    if iv is not None:
        vals = diff[mask] / math.hypot(*iv)
    else:
        _, fv = _resolve_vector(direction)
        vals = diff[mask] / math.hypot(*fv)
    return vals, mask


def _capped_inverse_squares(vals: np.ndarray) -> np.ndarray:
    """``min(1, 1/v^2)`` without overflow for tiny nonzero ``v``."""
    out = np.ones_like(vals)
    big = np.abs(vals) > 1.0
    out[big] = 1.0 / (vals[big] * vals[big])
    return out


def min_pair_sum(level: EnergyLevel, direction) -> float:
    """Sum over ``A_alpha`` of ``min(1, 1/<mu - mu', alpha>^2)`` with unit ``alpha``."""
    vals, _ = _unit_products(level, direction)
    return float(np.sum(_capped_inverse_squares(vals)))


@dataclass(frozen=True)
class PairSumReport:
    total: float
    range_small_gap: float
    range_near_orthogonal: float
    range_far: float
    parameters: tuple[float, float]


def optimal_range_parameters(m: int, n_points: int, J: float, l: float) -> tuple[float, float]:
    """Balanced ``(a, c)`` with ``a = c sqrt(m) = (J/l)^(1/5) N^(1/5) m^(1/5)``."""
    a = (J / l) ** 0.2 * n_points ** 0.2 * m ** 0.2
    return a, a / math.sqrt(m)


def range_decomposition(level: EnergyLevel, direction, a: float, c: float) -> PairSumReport:
    """Split the ``min(1, .)`` pair sum over ``A_alpha`` into three ranges.

    Pairs are assigned in order: ``|mu - mu'| <= a`` (counted), else
    ``|<mu - mu', alpha>| <= c |mu - mu'|`` (counted), else summed as
    ``1 / <mu - mu', alpha>^2``.
    """
    if not 0 < a <= 2 * level.radius:
        raise ValueError(f"a must lie in (0, 2 sqrt(m)], got {a}")
    if not 0 < c < 0.5:
        raise ValueError(f"c must lie in (0, 1/2), got {c}")
    vals, mask = _unit_products(level, direction)
    pts = level.array
    d = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt((d * d).sum(axis=-1).astype(float))[mask]
    small = dist <= a
    near = ~small & (np.abs(vals) <= c * dist)
    far = ~small & ~near
    return PairSumReport(
        total=float(np.sum(_capped_inverse_squares(vals))),
        range_small_gap=float(np.count_nonzero(small)),
        range_near_orthogonal=float(np.count_nonzero(near)),
        range_far=float(np.sum(1.0 / (vals[far] ** 2))),
        parameters=(float(a), float(c)),
    )


# -- census -------------------------------------------------------------------

def census_S(X: int) -> tuple[int, float]:
    """``|S(X)|`` (``m = 1`` included) and ``|S(X)| sqrt(log X) / X``."""
    if X < 2:
        raise ValueError("X must be at least 2")
    member = np.zeros(X + 1, dtype=bool)
    for x in range(math.isqrt(X) + 1):
        ys = np.arange(x, math.isqrt(X - x * x) + 1)
        member[x * x + ys * ys] = True
    member[0] = False
    count = int(member.sum())
    return count, count * math.sqrt(math.log(X)) / X


@dataclass
class DensityReport:
    failing: int
    fraction: float
    total: int
    failing_m: list[int]


def density_one_check(X: int, epsilon: float, verbose: bool = False) -> DensityReport:
    """Count ``m <= X`` whose closest lattice pair is ``<= sqrt(m)^(1 - epsilon)``."""
    if not 0 < epsilon < 0.5:
        raise ValueError(f"epsilon must lie in (0, 1/2), got {epsilon}")
    failing: list[int] = []
    total = 0
    for level in levels_upto(X):
        total += 1
        if min_pair_distance_sq(level) <= level.m ** (1 - epsilon):
            failing.append(level.m)
    return DensityReport(
        failing=len(failing),
        fraction=len(failing) / total if total else 0.0,
        total=total,
        failing_m=failing if verbose else [],
    )
