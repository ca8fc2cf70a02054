"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--m 4225] [--repeat 5]

The full-ensemble row runs each backend in a fresh interpreter with
ARW_PURE_PYTHON set, so it times exactly what users get.
"""
import argparse
import math
import os
import subprocess
import sys
import timeit

import numpy as np

from arwave import _pykernels
from arwave.lattice import Direction, enumerate_lattice_points
from arwave.wave import DEFAULT_OVERSAMPLE, Segment, grid_cells, half_set_array, segment_frequencies

try:
    from arwave import _ckernels
except ImportError:
    _ckernels = None

ENSEMBLE = """
import time
from arwave.experiment import ExperimentConfig, sample_counts
cfg = ExperimentConfig([{m}], L=1.0, samples={R}, seed_base=0)
t = time.perf_counter()
c, _ = sample_counts(cfg, {m})
print(time.perf_counter() - t, int(c.sum()))
"""


def problem(m, R):
    lv = enumerate_lattice_points(m)
    half = half_set_array(lv)
    seg = Segment(Direction.rational(0, 1), 1.0)
    d = segment_frequencies(half, seg)
    rng = np.random.default_rng(0)
    cre = rng.standard_normal((R, len(half)))
    cim = rng.standard_normal((R, len(half)))
    return d, cre, cim, 2 / math.sqrt(lv.n_points), grid_cells(d, 1.0, DEFAULT_OVERSAMPLE)


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def ensemble_time(m, R, pure):
    env = dict(os.environ, ARW_PURE_PYTHON="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", ENSEMBLE.format(m=m, R=R)],
                         capture_output=True, text=True, env=env, check=True)
    t, total = out.stdout.split()
    return float(t), int(total)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=4225)
    ap.add_argument("--samples", type=int, default=64, help="rows per grid block")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--ensemble", type=int, default=640, help="samples in the full-ensemble row (0 skips it)")
    args = ap.parse_args()

    if _ckernels is None:
        sys.exit("compiled extension not built; run: pip install -e . --no-build-isolation")

    d, cre, cim, scale, n = problem(args.m, args.samples)
    ts = np.linspace(0, 1, 2001)
    v = _pykernels.grid_values(d, cre[:1], cim[:1], scale, 1.0, n)[0]
    idx = np.nonzero(v[:-1] * v[1:] < 0)[0]
    lo, hi = idx / n, (idx + 1) / n

    rows = []
    for name, args_ in (
        ("grid_values", lambda k: k.grid_values(d, cre, cim, scale, 1.0, n)),
        ("eval_points", lambda k: k.eval_points(d, cre[0], cim[0], scale, ts)),
        ("bisect", lambda k: k.bisect(d, cre[0], cim[0], scale, lo, hi, 1e-13)),
    ):
        tc = best(lambda: args_(_ckernels), args.repeat)
        tp = best(lambda: args_(_pykernels), args.repeat)
        rows.append((name, tc, tp))
    if args.ensemble:
        (tc, zc), (tp, zp) = ensemble_time(args.m, args.ensemble, False), ensemble_time(args.m, args.ensemble, True)
        if zc != zp:
            sys.exit(f"backends disagree on the ensemble: {zc} vs {zp} zeros")
        rows.append((f"ensemble R={args.ensemble}", tc, tp))

    print(f"m={args.m}  N/2={len(d)}  grid cells={n}  rows={args.samples}  roots={len(lo)}")
    print(f"{'kernel':<20}{'cython s':>12}{'python s':>12}{'speedup':>10}")
    for name, tc, tp in rows:
        print(f"{name:<20}{tc:>12.4f}{tp:>12.4f}{tp / tc:>10.1f}")


if __name__ == "__main__":
    main()
