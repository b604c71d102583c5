import cmath
import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from exponential_sums import (
    PhasePoint,
    RationalCenter,
    arc_approximant_V,
    centered_mod1,
    complete_sum_bound_probe,
    complete_sum_S,
    complete_sum_table,
    grid_fourier_coefficient,
    oscillatory_I,
    oscillatory_I_grid,
    psi,
    scaled_I,
    shifted_sum_g,
    weyl_sum_f,
)
from moments import ConfigurationError, Offset
from solution_counter import count_naive


def test_weyl_sum_examples():
    assert weyl_sum_f(PhasePoint(0, 0, 0), 7) == pytest.approx(7)
    assert abs(weyl_sum_f(PhasePoint(Fraction(1, 2), 0, 0), 2)) < 1e-12
    assert abs(weyl_sum_f(PhasePoint(0.5, 0.0, 0.0), 2)) < 1e-9


@pytest.mark.parametrize("q", [2, 3, 5, 6, 8])
def test_weyl_sum_over_full_periods(q):
    rng = np.random.default_rng(q)
    for _ in range(4):
        center = RationalCenter(q, *(int(v) for v in rng.integers(0, q, size=3)))
        for m in (1, 3):
            assert weyl_sum_f(center.point(), q * m) == pytest.approx(m * complete_sum_S(center), abs=1e-9)


def test_weyl_sum_symmetries():
    rng = np.random.default_rng(7)
    for row in rng.random((20, 3)):
        alpha = PhasePoint(*row)
        value = weyl_sum_f(alpha, 50)
        assert abs(value) <= 50 + 1e-9
        assert weyl_sum_f(-alpha, 50) == pytest.approx(value.conjugate(), abs=1e-8)
        shifted = PhasePoint(row[0] + 1.0, row[1] + 2.0, row[2] + 3.0)
        assert weyl_sum_f(shifted, 50) == pytest.approx(value, abs=1e-8)


def test_shifted_sum():
    assert shifted_sum_g(PhasePoint(0.37, 0, 0), 0, 5, Offset(3, 1, 4)) == pytest.approx(5)
    # 3 * h2 * alpha3 = 1 makes every phase an integer
    assert shifted_sum_g(PhasePoint(0, 0, Fraction(1, 6)), 0, 9, Offset(0, 2, 0)) == pytest.approx(9)
    rng = np.random.default_rng(3)
    for row in rng.random((10, 4)):
        value = shifted_sum_g(PhasePoint(*row[:3]), row[3], 40, Offset(1, -2, 5))
        assert abs(value) <= 40 + 1e-9


@pytest.mark.parametrize("q, a, expected", [
    (1, (0, 0, 0), 1),
    (2, (1, 1, 1), 0),
    (3, (0, 0, 1), 0),
    (7, (0, 0, 0), 7),
])
def test_complete_sum_examples(q, a, expected):
    assert complete_sum_S(RationalCenter(q, *a)) == pytest.approx(expected, abs=1e-9)


@pytest.mark.parametrize("q", [4, 6, 9])
def test_complete_sum_table_matches_direct_sum(q):
    table = complete_sum_table(q)
    for a in itertools.product(range(q), repeat=3):
        assert table[a] == pytest.approx(complete_sum_S(RationalCenter(q, *a)), abs=1e-8)


def test_complete_sum_bound_probe():
    for q, ratio in complete_sum_bound_probe(12):
        assert 0 < ratio <= q ** (1.0 / 3.0) + 1e-9


def test_oscillatory_integral_values():
    assert oscillatory_I((0, 0, 0)) == pytest.approx(1)
    assert abs(oscillatory_I((1, 0, 0))) < 1e-8
    b = 0.3
    closed = (cmath.exp(2j * math.pi * b) - 1) / (2j * math.pi * b)
    assert oscillatory_I((b, 0, 0)) == pytest.approx(closed, abs=1e-8)


def test_oscillatory_grid_matches_adaptive():
    b1 = np.array([-2.0, 0.0, 1.5])
    b2 = np.array([0.5, -3.0])
    b3 = np.array([0.0, 4.0])
    grid = oscillatory_I_grid(b1, b2, b3)
    for i, j, k in itertools.product(range(3), range(2), range(2)):
        assert grid[i, j, k] == pytest.approx(oscillatory_I((b1[i], b2[j], b3[k])), abs=1e-7)


def test_scaled_integral():
    assert scaled_I((0, 0, 0), 10) == pytest.approx(10)
    beta = (0.02, 0.001, 1e-5)
    assert scaled_I(beta, 10) == pytest.approx(10 * oscillatory_I((0.2, 0.1, 0.01)))


def test_arc_approximant_at_center():
    assert arc_approximant_V(PhasePoint(0, 0, 0), RationalCenter(1, 0, 0, 0), 5) == pytest.approx(5)


def test_arc_approximant_matches_sum_for_tiny_cubic_phase():
    X = 10 ** 5
    alpha = PhasePoint(0.0, 0.0, 7e-16)
    assert abs(weyl_sum_f(alpha, X) - arc_approximant_V(alpha, RationalCenter(1, 0, 0, 0), X)) <= 10


def test_float_phase_keeps_low_order_bits():
    X = 10 ** 5
    beta = 7e-16
    x = np.arange(1, X + 1, dtype=np.float64)
    direct = np.exp(2j * np.pi * beta * x ** 3).sum()
    assert abs(weyl_sum_f(PhasePoint(0.0, 0.0, beta), X) - direct) <= 1e-6


def test_centered_mod1():
    assert centered_mod1(7e-16) == 7e-16
    assert centered_mod1(-7e-16) == -7e-16
    assert centered_mod1(0.75) == -0.25
    assert centered_mod1(0.5) == -0.5
    assert centered_mod1(Fraction(7, 4)) == Fraction(-1, 4)


@pytest.mark.parametrize("s, X, h, grid", [
    (1, 2, (1, 3, 7), (5, 9, 17)),
    (1, 1, (0, 0, 0), (3, 3, 3)),
    (2, 3, (0, 0, 0), (13, 37, 109)),
    (2, 3, (1, 1, 1), (13, 37, 109)),
])
def test_grid_coefficient_counts_solutions(s, X, h, grid):
    expected = count_naive(s, X, Offset(*h)).value
    assert grid_fourier_coefficient(s, X, Offset(*h), grid) == pytest.approx(expected, abs=1e-6)


def test_grid_coefficient_out_of_range_offset():
    assert grid_fourier_coefficient(1, 1, Offset(1, 3, 7), (3, 3, 3)) == 0.0


def test_grid_too_coarse():
    with pytest.raises(ConfigurationError):
        grid_fourier_coefficient(1, 2, Offset(0, 0, 0), (4, 9, 17))


def test_psi():
    assert psi(0, 10) == pytest.approx(1.0)
    assert psi(Fraction(1, 2), 10) == pytest.approx(0.5)
    assert psi((math.sqrt(5) - 1) / 2, 10) == 0.0
