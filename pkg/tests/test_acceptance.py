"""Acceptance gate: one PASS/FAIL line per criterion.

Constants marked "pinned" were fixed from a first calibration run and are
regression values; the notes next to them give the calibrated maxima.
"""
import math
import time

import numpy as np
import pytest

from arwave import lattice, theory
from arwave.experiment import ExperimentConfig, concentration_ok, powers, run_ensemble, sample_counts
from arwave.lattice import Direction
from arwave.wave import DEFAULT_OVERSAMPLE

HORIZONTAL = Direction.rational(0, 1)
THETA1 = Direction.angle(1.0)

# pinned: max occupancy(m^(1/4)) / log m over 2 <= m <= 1e4 is 1.4427 (m = 2)
ARC_LOG_CONSTANT = 1.45
# pinned: max var_Z / (m / N) along powers(65, k), k <= 3, R = 4000, seed 0 is 1.993 (m = 65)
VARIANCE_RATIO_CONSTANT = 2.2
QUAD_SLACK = 1e-6


@pytest.fixture
def report(capsys):
    def emit(name, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        assert ok, f"{name}: {detail}"

    return emit


def test_expectation(report):
    t0 = time.perf_counter()
    worst = 0.0
    lines = []
    for m, L in ((25, 0.5), (65, 0.5), (325, 0.3)):
        for d in (HORIZONTAL, THETA1):
            r = run_ensemble(ExperimentConfig([m], direction=d, L=L, samples=2000, seed_base=0), m)
            z = abs(r.mean_Z - r.theory_mean) / r.se_mean
            worst = max(worst, z)
            lines.append(f"m={m} alpha={d} {r.mean_Z:.4f} vs {r.theory_mean:.4f} ({z:.2f} se)")
    elapsed = time.perf_counter() - t0
    ok = worst <= 4 and elapsed < 120
    report("expectation", ok, f"max |mean - sqrt(2m)L| = {worst:.2f} se (limit 4), {elapsed:.1f}s; " + "; ".join(lines))


def test_r2_consistency(report, levels_1e4):
    t0 = time.perf_counter()
    bad = [m for m in range(1, 10**4 + 1) if lattice.is_sum_of_two_squares(m)
           and lattice.count_representations(m) != lattice.enumerate_lattice_points(m).n_points]
    bulk = [lv.m for lv in levels_1e4 if lv.n_points != lattice.count_representations(lv.m)]
    elapsed = time.perf_counter() - t0
    report("r2 consistency", not bad and not bulk and elapsed < 10,
           f"{len(bad) + len(bulk)} mismatches over m in S, m <= 1e4, {elapsed:.1f}s")


def test_jarnik(report, levels_1e4):
    t0 = time.perf_counter()
    worst = max(lattice.arc_max_occupancy(lv, 0.999 * lv.m ** (1 / 6)) for lv in levels_1e4)
    elapsed = time.perf_counter() - t0
    report("Jarnik arcs", worst <= 2 and elapsed < 30, f"max occupancy at 0.999 m^(1/6) = {worst} (limit 2), {elapsed:.1f}s")


def test_arc_log_bound(report, levels_1e4):
    ratios = [(lattice.arc_max_occupancy(lv, lv.m ** 0.25) / math.log(lv.m), lv.m) for lv in levels_1e4 if lv.m >= 2]
    worst, at = max(ratios)
    report("arcs of length m^(1/4)", worst <= ARC_LOG_CONSTANT,
           f"max occupancy / log m = {worst:.4f} at m={at} (pinned {ARC_LOG_CONSTANT})")


def test_rational_pair_sum_bound(report, levels_1e4):
    worst = (0.0, None)
    for q, p in ((1, 0), (1, 1), (2, 1), (5, 3)):
        for lv in levels_1e4:
            ratio = lattice.rational_pair_sum(lv, q, p) / (2 * math.pi**2 / 3 * lv.n_points)
            worst = max(worst, (ratio, (lv.m, q, p)), key=lambda x: x[0])
    report("rational pair sum", worst[0] <= 1,
           f"max sum / (2 pi^2/3 N) = {worst[0]:.4f} at (m, q, p)={worst[1]} (limit 1)")


def test_second_moment_identity(report):
    worst_rel, worst_r1, worst_r12 = 0.0, -np.inf, -np.inf
    for m in (1, 2, 5, 25, 65):
        lv = lattice.enumerate_lattice_points(m)
        for d in (HORIZONTAL, THETA1):
            for L in (1.0, 0.5):
                rep = theory.second_moment_closed_form(lv, d, L)
                I_r, I_r1, I_r12 = theory.quadrature_second_moments(lv, d, L, n=2048)
                worst_rel = max(worst_rel, abs(I_r - rep.term_r) / rep.term_r)
                worst_r1 = max(worst_r1, I_r1 / rep.pair_sum_bound - 1)
                worst_r12 = max(worst_r12, I_r12 / rep.pair_sum_bound - 1)
    ok = worst_rel < 1e-6 and worst_r1 <= QUAD_SLACK and worst_r12 <= QUAD_SLACK
    report("second-moment identity", ok,
           f"max rel err {worst_rel:.2e} (limit 1e-6); max r1/bound - 1 = {worst_r1:.3f}, "
           f"r12/bound - 1 = {worst_r12:.3f} (limit {QUAD_SLACK:g} quadrature slack)")


def test_zero_counter_refinement(report):
    base = dict(m_list=[25], direction=HORIZONTAL, L=1.0, samples=1000, seed_base=0)
    coarse, _ = sample_counts(ExperimentConfig(oversample=DEFAULT_OVERSAMPLE, **base), 25)
    fine, _ = sample_counts(ExperimentConfig(oversample=10 * DEFAULT_OVERSAMPLE, **base), 25)
    sub = dict(base, samples=100)
    fine100, _ = sample_counts(ExperimentConfig(oversample=10 * DEFAULT_OVERSAMPLE, **sub), 25)
    finer100, _ = sample_counts(ExperimentConfig(oversample=20 * DEFAULT_OVERSAMPLE, **sub), 25)
    agree = np.mean(coarse == fine)
    upward = bool(np.all(fine >= coarse))
    same = bool(np.array_equal(fine100, finer100))
    report("zero-counter refinement", agree >= 0.999 and upward and same,
           f"h vs h/10 agreement {agree:.4f} (limit 0.999), finer never lower: {upward}, "
           f"h/10 == h/20 on 100 samples: {same}")


def test_variance_regression(report):
    cfg = ExperimentConfig([65], direction=HORIZONTAL, L=1.0, samples=4000, seed_base=0)
    results = [run_ensemble(cfg, m) for m in powers(65, 3)]
    ratios = [r.ratio_var_to_bound[theory.RATIONAL] for r in results]
    conc = concentration_ok(results)
    series = ", ".join(f"m={r.m}: ratio {q:.3f}, var/m {r.var_Z / r.m:.4f}+-{r.se_var / r.m:.4f}"
                       for r, q in zip(results, ratios))
    report("variance regression", max(ratios) <= VARIANCE_RATIO_CONSTANT and conc,
           f"max var/(m/N) = {max(ratios):.3f} (pinned {VARIANCE_RATIO_CONSTANT}); concentration {conc}; {series}")


def test_density_one(report):
    small = lattice.density_one_check(10**3, 0.3)
    large = lattice.density_one_check(10**5, 0.3)
    report("density-one scan", large.fraction < small.fraction,
           f"failing fraction {small.fraction:.4f} at 1e3, {large.fraction:.4f} at 1e5")
