"""Monte Carlo ensembles of zero counts and their comparison with theory.

Sample ``i`` of an ensemble always uses seed ``seed_base + i`` and samples
are processed in fixed index blocks, so results do not depend on the number
of workers.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import theory
from .lattice import Direction, enumerate_lattice_points, is_sum_of_two_squares, NotRepresentableError
from .wave import (
    DEFAULT_OVERSAMPLE,
    SEED_MASK,
    Segment,
    count_zeros_batch,
    draw_coefficients,
    grid_cells,
    half_set_array,
    segment_frequencies,
)

log = logging.getLogger(__name__)

BLOCK = 64
MAX_N = 256
MAX_M = 10**8
DEFAULT_IRRATIONAL = Direction.angle(1.0)

CSV_COLUMNS = (
    "m", "N", "R", "mean_Z", "se_mean", "theory_mean", "var_Z",
    "bound_rational", "bound_irrational", "ratio_rational", "ratio_irrational", "seed_base",
)


@dataclass
class ExperimentConfig:
    m_list: list[int]
    direction: Direction = field(default_factory=lambda: Direction.rational(0, 1))
    L: float = 1.0
    samples: int = 2000
    seed_base: int = 0
    workers: int = 1
    output_path: str | None = None
    oversample: int = DEFAULT_OVERSAMPLE
    sweep: str | None = None
    format: str = "json"

    def __post_init__(self):
        if self.samples < 2:
            raise ValueError("samples must be at least 2")
        if not self.L > 0:
            raise ValueError("L must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        for m in self.m_list:
            if not is_sum_of_two_squares(m):
                raise NotRepresentableError(m)

    def resolved(self) -> dict:
        return {
            "m_list": list(self.m_list),
            "alpha": str(self.direction),
            "L": self.L,
            "samples": self.samples,
            "seed_base": self.seed_base,
            "workers": self.workers,
            "oversample": self.oversample,
            "sweep": self.sweep,
            "format": self.format,
            "output": self.output_path,
        }


_CONFIG_KEYS = {
    "m_list", "m", "alpha", "L", "samples", "R", "seed_base", "seed", "workers",
    "output", "output_path", "oversample", "sweep", "format",
}


def parse_config_text(text: str, env: dict | None = None) -> ExperimentConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment.

    ``ARW_SEED`` in ``env`` (default ``os.environ``) overrides ``seed_base``.
    """
    env = os.environ if env is None else env
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        raw[key] = value
    sweep = raw.get("sweep")
    m_text = raw.get("m_list", raw.get("m"))
    if m_text:
        m_list = [int(x) for x in m_text.replace(";", ",").split(",") if x.strip()]
    elif sweep:
        m_list = generate_sequence(sweep)
    else:
        raise ValueError("config needs m_list or sweep")
    seed = raw.get("seed_base", raw.get("seed", "0"))
    if env.get("ARW_SEED"):
        seed = env["ARW_SEED"]
    return ExperimentConfig(
        m_list=m_list,
        direction=Direction.parse(raw["alpha"]) if "alpha" in raw else Direction.rational(0, 1),
        L=float(raw.get("L", 1.0)),
        samples=int(raw.get("samples", raw.get("R", 2000))),
        seed_base=int(seed),
        workers=int(raw.get("workers", 1)),
        output_path=raw.get("output", raw.get("output_path")),
        oversample=int(raw.get("oversample", DEFAULT_OVERSAMPLE)),
        sweep=sweep,
        format=raw.get("format", "json"),
    )


def load_config(path) -> ExperimentConfig:
    return parse_config_text(Path(path).read_text())


@dataclass
class EnsembleResult:
    m: int
    N_m: int
    R: int
    L: float
    alpha: str
    seed_base: int
    z_counts: list[int]
    mean_Z: float
    var_Z: float
    se_mean: float
    se_var: float
    theory_mean: float
    bound_values: dict[str, float]
    ratio_var_to_bound: dict[str, float]
    suspicious_samples: int = 0

    @property
    def mean_band_ok(self) -> bool:
        return abs(self.mean_Z - self.theory_mean) <= 4 * self.se_mean

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "EnsembleResult":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in names})


def _count_block(args):
    half, freqs, scale, L, n_cells, seeds = args
    coef = np.stack([draw_coefficients(len(half), s) for s in seeds])
    counts, sus = count_zeros_batch(freqs, coef.real.copy(), coef.imag.copy(), scale, L, n_cells)
    return counts, sus


def sample_counts(config: ExperimentConfig, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Zero counts and suspicious-cell counts for samples ``0 .. R-1``."""
    level = enumerate_lattice_points(m)
    half = half_set_array(level)
    segment = Segment(config.direction, config.L)
    freqs = segment_frequencies(half, segment)
    scale = 2.0 / math.sqrt(level.n_points)
    n_cells = grid_cells(freqs, config.L, config.oversample)
    R = config.samples
    jobs = [
        (half, freqs, scale, config.L, n_cells,
         [(config.seed_base + i) & SEED_MASK for i in range(s, min(R, s + BLOCK))])
        for s in range(0, R, BLOCK)
    ]
    counts = np.empty(R, dtype=np.int64)
    sus = np.empty(R, dtype=np.int64)
    if config.workers == 1 or len(jobs) == 1:
        parts = map(_count_block, jobs)
    else:
        pool = ProcessPoolExecutor(max_workers=config.workers)
        parts = pool.map(_count_block, jobs)
    try:
        for k, (c, s) in enumerate(parts):
            counts[k * BLOCK:k * BLOCK + len(c)] = c
            sus[k * BLOCK:k * BLOCK + len(s)] = s
    finally:
        if config.workers > 1 and len(jobs) > 1:
            pool.shutdown()
    return counts, sus


def summarize(counts: np.ndarray) -> tuple[float, float, float, float]:
    """Mean, unbiased variance, standard error of the mean and of the variance."""
    R = len(counts)
    z = counts.astype(float)
    mean = float(z.mean())
    var = float(z.var(ddof=1))
    m4 = float(np.mean((z - mean) ** 4))
    var_of_var = max(0.0, (m4 - var * var * (R - 3) / (R - 1)) / R)
    return mean, var, math.sqrt(var / R), math.sqrt(var_of_var)


def run_ensemble(config: ExperimentConfig, m: int) -> EnsembleResult:
    level = enumerate_lattice_points(m)
    counts, sus = sample_counts(config, m)
    mean, var, se, se_var = summarize(counts)
    bounds = {k: b.value for k, b in theory.applicable_bounds(level, config.direction).items()}
    return EnsembleResult(
        m=m,
        N_m=level.n_points,
        R=config.samples,
        L=config.L,
        alpha=str(config.direction),
        seed_base=config.seed_base,
        z_counts=[int(c) for c in counts],
        mean_Z=mean,
        var_Z=var,
        se_mean=se,
        se_var=se_var,
        theory_mean=theory.expected_intersections(m, config.L),
        bound_values=bounds,
        ratio_var_to_bound={k: var / v for k, v in bounds.items()},
        suspicious_samples=int(np.count_nonzero(sus)),
    )


# -- sequences ----------------------------------------------------------------

def _primes_1_mod_4(bound: int) -> list[int]:
    sieve = np.ones(bound + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(bound) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return [int(p) for p in np.nonzero(sieve)[0] if p % 4 == 1]


def powers(base: int, k_max: int) -> list[int]:
    return [base**k for k in range(1, k_max + 1)]


def prime_products(bound: int) -> list[int]:
    """Running products of the primes ``p = 1 (mod 4)`` up to ``bound``."""
    out, acc = [], 1
    for p in _primes_1_mod_4(bound):
        acc *= p
        out.append(acc)
    return out


def _within_budget(ms: list[int]) -> list[int]:
    from .lattice import count_representations

    kept = []
    for m in ms:
        if m > MAX_M or count_representations(m) > MAX_N:
            log.warning("sequence truncated at m=%d (budget N<=%d, m<=%d)", m, MAX_N, MAX_M)
            break
        kept.append(m)
    return kept


def generate_sequence(source) -> list[int]:
    """``powers:<base>:<k_max>``, ``primes:<bound>``, ``list:<m1>,<m2>,...`` or an explicit list."""
    if isinstance(source, (list, tuple)):
        ms = [int(m) for m in source]
    else:
        kind, _, rest = str(source).partition(":")
        if kind == "powers":
            base, k_max = rest.split(":")
            ms = powers(int(base), int(k_max))
        elif kind == "primes":
            ms = prime_products(int(rest))
        elif kind == "list":
            ms = [int(x) for x in rest.split(",") if x.strip()]
        else:
            raise ValueError(f"unknown sequence source {source!r}")
    for m in ms:
        if not is_sum_of_two_squares(m):
            raise NotRepresentableError(m)
    return _within_budget(ms)


def sweep_sequence(generator_spec, config: ExperimentConfig) -> list[EnsembleResult]:
    return [run_ensemble(config, m) for m in generate_sequence(generator_spec)]


# -- export -------------------------------------------------------------------

def _fmt(x) -> str:
    if x is None:
        return ""
    return repr(float(x)) if isinstance(x, float) else str(x)


def results_to_csv(results: list[EnsembleResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in results:
        b, q = r.bound_values, r.ratio_var_to_bound
        w.writerow([_fmt(v) for v in (
            r.m, r.N_m, r.R, r.mean_Z, r.se_mean, r.theory_mean, r.var_Z,
            b.get(theory.RATIONAL), b.get(theory.IRRATIONAL),
            q.get(theory.RATIONAL), q.get(theory.IRRATIONAL), r.seed_base,
        )])
    return buf.getvalue()


def results_to_json(results: list[EnsembleResult], meta: dict | None = None) -> str:
    payload = {"results": [r.to_dict() for r in results]}
    if meta:
        payload = {**meta, **payload}
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def export_results(results: list[EnsembleResult], path, format: str = "json", meta: dict | None = None) -> Path:
    if format == "csv":
        text = results_to_csv(results)
    elif format == "json":
        text = results_to_json(results, meta)
    else:
        raise ValueError(f"format must be csv or json, got {format!r}")
    path = Path(path)
    path.write_text(text)
    return path


def import_results(path) -> list[EnsembleResult]:
    data = json.loads(Path(path).read_text())
    return [EnsembleResult.from_dict(d) for d in data["results"]]


def concentration_ok(results: list[EnsembleResult]) -> bool:
    """``Var(Z / sqrt m)`` non-increasing along the sequence within 2x noise."""
    for a, b in zip(results, results[1:]):
        va, vb = a.var_Z / a.m, b.var_Z / b.m
        noise = math.hypot(a.se_var / a.m, b.se_var / b.m)
        if vb > va + 2 * noise:
            return False
    return True
