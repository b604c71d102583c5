import cmath
import itertools
import math

import pytest

from exponential_sums import RationalCenter, complete_sum_S
from local_densities import (
    _twisted_sum,
    check_prime_level,
    density_fraction,
    euler_product,
    hensel_nonsingular_search,
    major_arc_singular_series,
    padic_density_via_counting,
    padic_density_via_sums,
    exact_series_term,
    padic_solution_count,
    series_term,
    solution_count_mod,
    singular_series_truncated,
    smooth_series_sum,
    witness_satisfies,
)
from moments import BudgetExceeded, ConfigurationError, Offset


def _direct_term(q, s, h):
    total = 0j
    for a in itertools.product(range(q), repeat=3):
        if math.gcd(q, *a) != 1:
            continue
        S = complete_sum_S(RationalCenter(q, *a))
        phase = sum(aj * hj for aj, hj in zip(a, h.as_tuple())) % q
        total += abs(S / q) ** (2 * s) * cmath.exp(-2j * math.pi * phase / q)
    return total.real


def test_series_term_at_one():
    assert series_term(1, 6, Offset(1, 1, 1)) == 1.0


@pytest.mark.parametrize("q, h", [(2, (0, 0, 0)), (2, (1, 1, 1)), (3, (1, 3, 7)), (4, (0, 1, 0))])
def test_series_term_matches_direct_sum(q, h):
    assert series_term(q, 6, Offset(*h)) == pytest.approx(_direct_term(q, 6, Offset(*h)), abs=1e-12)


@pytest.mark.parametrize("q1, q2", [(2, 3), (3, 4), (2, 5)])
def test_series_term_is_multiplicative(q1, q2):
    h = Offset(1, 1, 1)
    joint = series_term(q1 * q2, 6, h)
    assert joint == pytest.approx(series_term(q1, 6, h) * series_term(q2, 6, h), rel=1e-8, abs=1e-15)


@pytest.mark.parametrize("p, H", [(2, 1), (2, 2), (3, 1), (3, 2), (5, 1)])
@pytest.mark.parametrize("h", [(0, 0, 0), (1, 1, 1), (0, 0, 1), (2, 0, 2)])
def test_density_routes_agree(p, H, h):
    sums = padic_density_via_sums(p, 6, Offset(*h), H)
    counting = padic_density_via_counting(p, 6, Offset(*h), H)
    assert sums.value == pytest.approx(counting.value, abs=1e-10)
    assert counting.imag_residue < 1e-8


def test_density_at_level_zero():
    assert padic_density_via_sums(7, 6, Offset(1, 2, 3), 0).value == 1.0
    assert padic_density_via_counting(7, 6, Offset(1, 2, 3), 0).value == pytest.approx(1.0)


def test_insoluble_offset_has_vanishing_density():
    assert abs(padic_density_via_counting(2, 6, Offset(0, 0, 1), 1).value) < 1e-10
    assert abs(padic_density_via_counting(3, 6, Offset(0, 0, 1), 1).value) < 1e-10


def _brute_count(p, s, h, H):
    q = p ** H
    total = 0
    for z in itertools.product(range(q), repeat=2 * s):
        x, y = z[:s], z[s:]
        if all((sum(v ** j for v in x) - sum(v ** j for v in y) - hj) % q == 0
               for j, hj in zip((1, 2, 3), h.as_tuple())):
            total += 1
    return total


@pytest.mark.parametrize("p, s, h, H", [
    (2, 1, (0, 0, 0), 1),
    (3, 2, (1, 1, 1), 1),
    (2, 2, (0, 1, 1), 2),
    (5, 1, (0, 0, 0), 1),
])
def test_padic_solution_count_matches_brute_force(p, s, h, H):
    assert padic_solution_count(p, s, Offset(*h), H) == _brute_count(p, s, Offset(*h), H)


def test_exact_density_matches_counting_route():
    h = Offset(1, 1, 1)
    exact = density_fraction(2, 3, h, 2)
    assert float(exact) == pytest.approx(padic_density_via_counting(2, 3, h, 2).value, abs=1e-10)


def test_euler_product_matches_smooth_sum():
    h = Offset(1, 1, 1)
    levels = {2: 2, 3: 1}
    assert euler_product(6, h, levels) == pytest.approx(smooth_series_sum(6, h, levels), rel=1e-9)


def test_series_term_vanishes_exactly():
    assert series_term(4, 6, Offset(1, 1, 1)) == 0.0
    assert exact_series_term(4, 6, Offset(1, 1, 1)) == 0


def test_multiplicativity_with_a_vanishing_factor():
    h = Offset(1, 1, 1)
    joint = series_term(12, 6, h)
    product = series_term(3, 6, h) * series_term(4, 6, h)
    assert abs(joint - product) <= 1e-12 + 1e-8 * abs(product)


@pytest.mark.parametrize("q", [6, 8, 9, 10])
@pytest.mark.parametrize("h", [(0, 0, 0), (1, 1, 1), (0, 2, 1)])
def test_exact_term_matches_complete_sum_route(q, h):
    exact = float(exact_series_term(q, 6, Offset(*h)))
    assert exact == pytest.approx(_twisted_sum(q, 6, Offset(*h), primitive_only=True).real, abs=1e-12)


def test_composite_solution_count_is_multiplicative():
    h = Offset(1, 0, 2)
    assert solution_count_mod(6, 2, h) == solution_count_mod(2, 2, h) * solution_count_mod(3, 2, h)


def test_huge_offsets_reduce_modulo_q():
    huge = Offset(0, 0, 2 ** 70)
    reduced = Offset(0, 0, 2 ** 70 % 9)
    assert series_term(9, 6, huge) == series_term(9, 6, reduced)
    assert padic_density_via_counting(3, 6, huge, 2).value == pytest.approx(
        padic_density_via_counting(3, 6, reduced, 2).value, abs=1e-12)
    assert padic_solution_count(2, 2, huge, 2) == padic_solution_count(2, 2, Offset(0, 0, 0), 2)


def test_truncated_series():
    assert singular_series_truncated(6, Offset(0, 0, 0), 1).value == 1.0
    report = singular_series_truncated(6, Offset(1, 1, 1), 12)
    assert len(report.terms) == 12
    assert report.value == pytest.approx(sum(report.terms))
    with pytest.raises(ConfigurationError):
        singular_series_truncated(4, Offset(0, 0, 0), 8)


def test_major_arc_series_uses_only_q_one_for_moderate_X():
    assert major_arc_singular_series(6, Offset(1, 1, 1), 10 ** 6).value == 1.0


def test_prime_and_level_validation():
    with pytest.raises(ConfigurationError):
        check_prime_level(4, 1)
    with pytest.raises(ConfigurationError):
        check_prime_level(5, -1)
    with pytest.raises(BudgetExceeded):
        check_prime_level(2, 9)


def test_hensel_witness_for_large_prime():
    witness = hensel_nonsingular_search(7, 6, Offset(0, 0, 0), depth=2, seed=1)
    assert witness is not None
    assert witness.minor_valuation == 0
    assert witness.depth == 2
    assert witness_satisfies(witness, Offset(0, 0, 0))


def test_hensel_witness_for_three_needs_deeper_level():
    witness = hensel_nonsingular_search(3, 6, Offset(1, 1, 1), depth=3, seed=1)
    assert witness is not None
    assert 2 * witness.minor_valuation + 1 <= witness.search_level
    assert witness_satisfies(witness, Offset(1, 1, 1))


def test_hensel_reports_insoluble_offsets():
    assert hensel_nonsingular_search(2, 6, Offset(0, 0, 1), depth=1, seed=1) is None
