"""Arithmetic random waves, their restriction to segments, and zero counting.

A wave at level ``m`` is

    F(x) = N^{-1/2} sum_{mu in E_m} a_mu exp(2 pi i <mu, x>),   a_{-mu} = conj(a_mu).

Coefficients are stored on the antipodal half set only, so ``F`` is assembled
as ``2 N^{-1/2} sum_half Re(a_mu exp(2 pi i <mu, x>))`` and is real by
construction.

Randomness: each sample owns a ``numpy.random.default_rng(seed)`` stream
(PCG64 seeded through ``SeedSequence``).  Real and imaginary parts are drawn
as consecutive pairs of standard normals scaled by ``sqrt(1/2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .lattice import Direction, EnergyLevel, antipodal_half_set

TWO_PI = 2.0 * math.pi

DEFAULT_OVERSAMPLE = 128
SUBDIVISIONS = 8
_SUSPICIOUS_FACTOR = 1e-6
_ROOT_TOL = 1e-13

SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class Segment:
    """``t -> offset + t * alpha`` for ``0 <= t <= L``."""

    direction: Direction
    L: float
    offset: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"segment length must be positive, got {self.L}")

    @property
    def alpha(self) -> np.ndarray:
        return self.direction.alpha


@dataclass(frozen=True, eq=False)
class WaveSample:
    level: EnergyLevel
    half_points: np.ndarray = field(repr=False)
    coef: np.ndarray = field(repr=False)
    seed: int | None = None

    @property
    def coefficients(self) -> dict[tuple[int, int], complex]:
        return {(int(x), int(y)): complex(a) for (x, y), a in zip(self.half_points, self.coef)}

    @property
    def scale(self) -> float:
        return 2.0 / math.sqrt(self.level.n_points)

    @classmethod
    def from_coefficients(cls, level: EnergyLevel, coefficients) -> "WaveSample":
        """Build a sample from explicit half-set coefficients.

        ``coefficients`` maps half-set representatives to complex values;
        missing representatives get 0.
        """
        half = antipodal_half_set(level)
        coef = np.array([complex(coefficients.get(mu, 0.0)) for mu in half])
        extra = set(coefficients) - set(half)
        if extra:
            raise ValueError(f"not half-set representatives: {sorted(extra)}")
        return cls(level, np.array(half, dtype=np.int64), coef)


def half_set_array(level: EnergyLevel) -> np.ndarray:
    return np.array(antipodal_half_set(level), dtype=np.int64).reshape(-1, 2)


def draw_coefficients(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed & SEED_MASK)
    z = rng.standard_normal((n, 2)) * math.sqrt(0.5)
    return z[:, 0] + 1j * z[:, 1]


def sample_wave(level: EnergyLevel, seed: int) -> WaveSample:
    """Draw one wave; deterministic in ``seed``."""
    if level.n_points < 2:
        raise ValueError("need at least two lattice points")
    half = half_set_array(level)
    return WaveSample(level, half, draw_coefficients(len(half), seed), int(seed))


def evaluate_field(sample: WaveSample, x) -> float:
    x = np.asarray(x, dtype=float)
    phase = TWO_PI * (sample.half_points @ x)
    return float(sample.scale * np.sum(sample.coef.real * np.cos(phase) - sample.coef.imag * np.sin(phase)))


def evaluate_field_complex(sample: WaveSample, x) -> complex:
    """The full complex sum over all of ``E_m``; used to check real-valuedness."""
    x = np.asarray(x, dtype=float)
    pts = np.concatenate([sample.half_points, -sample.half_points])
    coef = np.concatenate([sample.coef, np.conj(sample.coef)])
    return complex(np.sum(coef * np.exp(2j * math.pi * (pts @ x))) / math.sqrt(sample.level.n_points))


def segment_frequencies(half_points: np.ndarray, segment: Segment) -> np.ndarray:
    """``d_mu = <mu, alpha>`` for each half-set point."""
    return half_points.astype(float) @ segment.alpha


def _shifted(sample: WaveSample, segment: Segment) -> np.ndarray:
    """Coefficients with the segment offset folded into their phase."""
    off = np.asarray(segment.offset, dtype=float)
    if not off.any():
        return sample.coef
    return sample.coef * np.exp(2j * math.pi * (sample.half_points @ off))


def evaluate_along_segment(sample: WaveSample, segment: Segment, t):
    """``(f(t), f'(t))`` with ``f(t) = F(offset + t alpha)``; ``t`` may be an array."""
    d = segment_frequencies(sample.half_points, segment)
    a = _shifted(sample, segment)
    f, fp = kernels.eval_points(d, a.real.copy(), a.imag.copy(), sample.scale, np.asarray(t, dtype=float))
    if np.ndim(t) == 0:
        return float(f), float(fp)
    return f, fp


def grid_cells(freqs: np.ndarray, L: float, oversample: int = DEFAULT_OVERSAMPLE, refine: int = 1) -> int:
    """Number of cells for step ``h = 1 / (oversample * max|d|)``, times ``refine``."""
    f_max = float(np.max(np.abs(freqs))) if len(freqs) else 0.0
    base = max(1, math.ceil(L * oversample * f_max)) if f_max > 0 else 1
    return base * refine


@dataclass
class NodalCount:
    count: int
    roots: list[float]
    n_cells: int
    suspicious_cells: int = 0

    @property
    def suspicious(self) -> bool:
        return self.suspicious_cells > 0


def _grid_points(L: float, n_cells: int) -> np.ndarray:
    t = np.arange(n_cells + 1) * (L / n_cells)
    t[-1] = L
    return t


def _slope_bound(freqs, cre, cim, scale):
    return scale * np.sum(np.hypot(cre, cim) * TWO_PI * np.abs(freqs), axis=-1)


def count_zeros_batch(freqs, cre, cim, scale, L, n_cells):
    """Zero counts of many coefficient rows on ``[0, L]``.

    Returns ``(counts, suspicious_cells)`` as int arrays.  A zero is an exact
    grid zero or a strict sign change between neighbours.  Zero-free cells
    whose smaller endpoint magnitude is below ``1e-6 sqrt(slope bound)`` are
    re-sampled at ``SUBDIVISIONS`` sub-cells; sign changes found there count.
    """
    cre = np.atleast_2d(cre)
    cim = np.atleast_2d(cim)
    vals = kernels.grid_values(freqs, cre, cim, scale, L, n_cells)
    left, right = vals[:, :-1], vals[:, 1:]
    change = left * right < 0
    counts = np.count_nonzero(vals == 0.0, axis=1) + np.count_nonzero(change, axis=1)
    delta = _SUSPICIOUS_FACTOR * np.sqrt(_slope_bound(freqs, cre, cim, scale))
    quiet = ~change & (left != 0.0) & (right != 0.0)
    sus = quiet & (np.minimum(np.abs(left), np.abs(right)) < delta[:, None])
    n_sus = np.count_nonzero(sus, axis=1)
    t = _grid_points(L, n_cells)
    for r in np.nonzero(n_sus)[0]:
        for i in np.nonzero(sus[r])[0]:
            found = _subcell_brackets(freqs, cre[r], cim[r], scale, t[i], t[i + 1], left[r, i], right[r, i])[0]
            counts[r] += len(found)
    return counts, n_sus


def _subcell_brackets(freqs, cre, cim, scale, t0, t1, v0, v1):
    """Sign changes and interior exact zeros of one cell split in ``SUBDIVISIONS``.

    The cell endpoints keep their grid values so a root at a shared grid point
    cannot be picked up again by a neighbouring subdivision.
    """
    ts = t0 + (t1 - t0) * np.arange(SUBDIVISIONS + 1) / SUBDIVISIONS
    ts[0], ts[-1] = t0, t1
    v, _ = kernels.eval_points(freqs, cre, cim, scale, ts)
    v[0], v[-1] = v0, v1
    brackets = [(ts[k], ts[k + 1]) for k in range(SUBDIVISIONS) if v[k] * v[k + 1] < 0]
    zeros = [float(ts[k]) for k in range(1, SUBDIVISIONS) if v[k] == 0.0]
    return brackets + [(z, z) for z in zeros], zeros


def count_nodal_intersections(
    sample: WaveSample,
    segment: Segment,
    oversample: int = DEFAULT_OVERSAMPLE,
    refine: int = 1,
    with_roots: bool = True,
) -> NodalCount:
    """Zeros of ``f`` on the closed interval ``[0, L]``.

    The grid step is ``1 / (oversample * max|d_mu|)``, divided by ``refine``.
    Sign changes are refined by bisection to width ``1e-13 max(1, L)``.
    """
    L = segment.L
    d = segment_frequencies(sample.half_points, segment)
    a = _shifted(sample, segment)
    cre, cim = a.real.copy(), a.imag.copy()
    scale = sample.scale
    n = grid_cells(d, L, oversample, refine)
    if not with_roots:
        counts, sus = count_zeros_batch(d, cre, cim, scale, L, n)
        return NodalCount(int(counts[0]), [], n, int(sus[0]))

    vals = kernels.grid_values(d, cre, cim, scale, L, n)[0]
    t = _grid_points(L, n)
    roots = [float(x) for x in t[vals == 0.0]]
    idx = np.nonzero(vals[:-1] * vals[1:] < 0)[0]
    lo, hi = list(t[idx]), list(t[idx + 1])
    delta = _SUSPICIOUS_FACTOR * math.sqrt(float(_slope_bound(d, cre, cim, scale)))
    quiet = (vals[:-1] * vals[1:] > 0) & (np.minimum(np.abs(vals[:-1]), np.abs(vals[1:])) < delta)
    n_sus = int(np.count_nonzero(quiet))
    for i in np.nonzero(quiet)[0]:
        brackets, zeros = _subcell_brackets(d, cre, cim, scale, t[i], t[i + 1], vals[i], vals[i + 1])
        roots.extend(zeros)
        for b0, b1 in brackets:
            if b0 != b1:
                lo.append(b0)
                hi.append(b1)
    tol = _ROOT_TOL * max(1.0, L)
    roots.extend(float(x) for x in kernels.bisect(d, cre, cim, scale, np.array(lo), np.array(hi), tol))
    roots.sort()
    return NodalCount(len(roots), roots, n, n_sus)


@dataclass(frozen=True)
class CovarianceValues:
    r: float
    r1: float
    r2: float
    r12: float


def covariance_exact(level: EnergyLevel, direction: Direction, tau: float) -> CovarianceValues:
    """Covariance of ``f`` at lag ``tau = t1 - t2`` and its derivatives.

    ``r = (1/N) sum cos(2 pi tau d)``, ``r1 = dr/dt1``, ``r2 = dr/dt2 = -r1``,
    ``r12 = d^2 r / dt1 dt2 = (4 pi^2 / N) sum d^2 cos(2 pi tau d)``.
    The sine parts cancel between ``mu`` and ``-mu``.
    """
    d = level.array.astype(float) @ direction.alpha
    n = level.n_points
    ph = TWO_PI * tau * d
    c, s = np.cos(ph), np.sin(ph)
    r = float(np.sum(c) / n)
    r1 = float(-TWO_PI * np.sum(d * s) / n)
    r12 = float(TWO_PI**2 * np.sum(d * d * c) / n)
    return CovarianceValues(r, r1, -r1, r12)


def covariance_arrays(level: EnergyLevel, direction: Direction, tau: np.ndarray):
    """Vectorized ``(r, r1, r12)`` over an array of lags."""
    d = level.array.astype(float) @ direction.alpha
    n = level.n_points
    ph = TWO_PI * np.multiply.outer(np.asarray(tau, dtype=float), d)
    c, s = np.cos(ph), np.sin(ph)
    return c.sum(-1) / n, -TWO_PI * (s @ d) / n, TWO_PI**2 * (c @ (d * d)) / n
