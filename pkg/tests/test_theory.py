import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from arwave.lattice import Direction, NotRepresentableError, enumerate_lattice_points, min_pair_distance
from arwave.theory import (
    GAPPED,
    IRRATIONAL,
    RATIONAL,
    applicable_bounds,
    expected_intersections,
    gap_condition_holds,
    quadrature_second_moments,
    second_moment_closed_form,
    sinc_pair_integral,
    variance_bound,
    zero_density_constant,
)

HORIZONTAL = Direction.rational(0, 1)
THETA1 = Direction.angle(1.0)
DIRECTIONS = [HORIZONTAL, Direction.rational(1, 2), THETA1, Direction.angle(0.3)]


def test_expected_values():
    assert expected_intersections(2, 1.0) == 2.0
    assert expected_intersections(25, 0.5) == pytest.approx(3.5355339, abs=1e-6)


def test_expected_zero_length_warns():
    with pytest.warns(UserWarning):
        assert expected_intersections(5, 0.0) == 0.0


def test_expected_rejects_non_members():
    with pytest.raises(NotRepresentableError, match="not representable"):
        expected_intersections(3, 1.0)
    with pytest.raises(ValueError):
        expected_intersections(5, -1.0)


def test_zero_density():
    assert zero_density_constant(2) == pytest.approx(2.0, abs=1e-15)
    assert zero_density_constant(25) == pytest.approx(math.sqrt(50), abs=1e-12)
    for m in (1, 5, 65, 1105):
        for L in (0.1, 1.0, 3.0):
            assert zero_density_constant(m) * L == pytest.approx(expected_intersections(m, L), rel=1e-15)


@settings(max_examples=50)
@given(m=st.sampled_from([1, 2, 5, 10, 25, 65]), dm=st.sampled_from([2, 8, 13]), L=st.floats(0.01, 5), dL=st.floats(0.01, 1))
def test_expected_monotone(m, dm, L, dL):
    assert expected_intersections(m * dm, L) > expected_intersections(m, L)
    assert expected_intersections(m, L + dL) > expected_intersections(m, L)


def test_sinc_examples():
    for L in (0.3, 1.0, 2.5):
        assert sinc_pair_integral(0.0, L) == L * L
        assert sinc_pair_integral(1 / (2 * L), L) == pytest.approx(4 * L * L / math.pi**2, rel=1e-14)
        assert sinc_pair_integral(1 / L, L) == pytest.approx(0.0, abs=1e-30)


def test_sinc_continuity_at_zero():
    L = 0.7
    d = np.array([0.0, 1e-12, 1e-8, 4.5e-5, 4.6e-5, 1e-3])
    vals = sinc_pair_integral(d, L)
    exact = np.array([L * L] + [math.sin(math.pi * L * x) ** 2 / (math.pi * x) ** 2 for x in d[1:]])
    assert np.allclose(vals, exact, rtol=1e-12, atol=0)


@pytest.mark.parametrize("d", [0.0, 0.13, 1.0, -2.7, 10.3])
@pytest.mark.parametrize("L", [0.5, 1.0, 2.0])
def test_sinc_against_quadrature(d, L):
    re = integrate.quad(lambda t: math.cos(2 * math.pi * t * d), 0, L, limit=200)[0]
    im = integrate.quad(lambda t: math.sin(2 * math.pi * t * d), 0, L, limit=200)[0]
    assert sinc_pair_integral(d, L) == pytest.approx(re * re + im * im, rel=1e-9, abs=1e-13)


def test_sinc_rejects_bad_length():
    with pytest.raises(ValueError):
        sinc_pair_integral(1.0, 0.0)


def test_second_moment_split_m1():
    rep = second_moment_closed_form(enumerate_lattice_points(1), HORIZONTAL, 1.0)
    assert rep.diagonal_part == 0.25
    assert rep.perpendicular_pairs == 2
    assert rep.perpendicular_part == 2 / 16
    assert rep.term_r == pytest.approx(rep.diagonal_part + rep.perpendicular_part + rep.A_alpha_part, rel=1e-14)


def brute_term_r(lv, direction, L):
    total = 0.0
    for mu in lv.points:
        for nu in lv.points:
            total += sinc_pair_integral(float(np.subtract(mu, nu) @ direction.alpha), L)
    return total / lv.n_points**2


@pytest.mark.parametrize("m", [1, 2, 5, 25, 65, 325])
@pytest.mark.parametrize("direction", DIRECTIONS)
def test_second_moment_matches_pair_loop(m, direction):
    lv = enumerate_lattice_points(m)
    rep = second_moment_closed_form(lv, direction, 0.8)
    assert rep.term_r == pytest.approx(brute_term_r(lv, direction, 0.8), rel=1e-12)
    assert rep.term_r2 == rep.term_r1
    assert rep.pair_sum_bound == rep.term_r


@pytest.mark.parametrize("direction", DIRECTIONS)
def test_perpendicular_pairs_at_most_N(levels_1e4, direction):
    for lv in levels_1e4[::7]:
        rep = second_moment_closed_form(lv, direction, 1.0)
        assert rep.perpendicular_pairs <= lv.n_points
        assert rep.term_r1 <= rep.pair_sum_bound * (1 + 1e-12)
        assert rep.term_r12 <= rep.pair_sum_bound * (1 + 1e-12)


def test_angle_directions_have_no_perpendicular_pairs():
    for m in (5, 25, 65, 1105):
        assert second_moment_closed_form(enumerate_lattice_points(m), THETA1, 1.0).perpendicular_pairs == 0


@pytest.mark.parametrize("L", [0.25, 0.5, 1.0])
@pytest.mark.parametrize("direction", DIRECTIONS)
def test_shape_inequality(levels_1e4, direction, L):
    """total <= (2 L^2 N + sum_A min(1, 1/d^2)) / N^2 for L <= 1."""
    for lv in levels_1e4[::11]:
        rep = second_moment_closed_form(lv, direction, L)
        n = lv.n_points
        assert rep.diagonal_part + rep.perpendicular_part <= 2 * L * L * n / n**2
        assert rep.A_alpha_part <= rep.A_alpha_bound * (1 + 1e-12)
        pts = lv.array
        diff = ((pts[:, None, :] - pts[None, :, :]).astype(float) @ direction.alpha).ravel()
        diff = diff[diff != 0.0]
        rhs = (2 * L * L * n + np.sum(np.minimum(1.0, 1.0 / diff**2))) / n**2
        assert rep.term_r <= rhs * (1 + 1e-12)


@pytest.mark.parametrize("m", [1, 5, 25])
@pytest.mark.parametrize("direction", [HORIZONTAL, THETA1])
def test_quadrature_against_closed_form(m, direction):
    lv = enumerate_lattice_points(m)
    rep = second_moment_closed_form(lv, direction, 0.6)
    I_r, I_r1, I_r12 = quadrature_second_moments(lv, direction, 0.6, n=512)
    assert I_r == pytest.approx(rep.term_r, rel=1e-5)
    assert I_r1 == pytest.approx(rep.term_r1, rel=1e-5)
    assert I_r12 == pytest.approx(rep.term_r12, rel=1e-5)


def test_variance_bound_values():
    lv = enumerate_lattice_points(65)
    assert variance_bound(lv, HORIZONTAL, RATIONAL).value == 65 / 16
    assert variance_bound(lv, HORIZONTAL, IRRATIONAL).value == pytest.approx(22.18664, rel=1e-6)
    assert variance_bound(lv, HORIZONTAL, IRRATIONAL).value == pytest.approx(65 * (math.log(65) / 16) ** 0.8, rel=1e-15)
    assert variance_bound(lv, THETA1, GAPPED).value == 65 / 16


def test_variance_bound_mismatch():
    lv = enumerate_lattice_points(65)
    with pytest.raises(ValueError, match="rational"):
        variance_bound(lv, THETA1, RATIONAL)
    with pytest.raises(ValueError, match="unknown"):
        variance_bound(lv, HORIZONTAL, "Other")
    with pytest.raises(ValueError):
        variance_bound(enumerate_lattice_points(1), HORIZONTAL, IRRATIONAL)


def test_gapped_note_reports_gap():
    lv = enumerate_lattice_points(65)
    gap = min_pair_distance(lv)
    for eps in (0.1, 0.25, 0.45):
        note = variance_bound(lv, THETA1, GAPPED, epsilon=eps).hypothesis_note
        assert f"{gap:.6g}" in note
        holds = gap > 65 ** ((1 - eps) / 2)
        assert holds == gap_condition_holds(lv, eps)
        assert ("holds" if holds else "fails") in note


def test_applicable_bounds():
    lv = enumerate_lattice_points(65)
    assert set(applicable_bounds(lv, HORIZONTAL)) == {RATIONAL, IRRATIONAL, GAPPED}
    assert set(applicable_bounds(lv, THETA1)) == {IRRATIONAL, GAPPED}
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert set(applicable_bounds(enumerate_lattice_points(1), HORIZONTAL)) == {RATIONAL, GAPPED}
