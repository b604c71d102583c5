import math
from fractions import Fraction

import numpy as np
import pytest

from arc_dissection import (
    WLabel,
    center_error,
    classify_box,
    classify_one_dim,
    convergents,
    cutoffs,
    dissection_report,
    exhaustive_one_dim,
    major_arc_error_probe,
    major_arc_measure,
    partition_flags,
    psi_bound_probe,
    weyl_inequality_bound,
    weyl_probe,
)
from exponential_sums import PhasePoint, RationalCenter
from moments import ConfigurationError


def test_convergents_of_a_rational():
    assert list(convergents(Fraction(7, 16), 100)) == [(0, 1), (1, 2), (3, 7), (7, 16)]
    assert list(convergents(Fraction(7, 16), 5)) == [(0, 1), (1, 2)]


def test_one_dim_examples():
    zero = classify_one_dim(0, 5, 100)
    assert (zero.kind, zero.q, zero.a) == ("major", 1, 0)
    half = classify_one_dim(Fraction(1, 2), 5, 100)
    assert (half.kind, half.q, half.a) == ("major", 2, 1)


def test_one_dim_boundaries_are_inclusive():
    # Q = 2, X = 100: the arc around 1/2 has half-width 10^-6
    assert classify_one_dim(Fraction(1, 2) + Fraction(1, 10 ** 6), 2, 100).is_major
    assert not classify_one_dim(Fraction(1, 2) + Fraction(2, 10 ** 6), 2, 100).is_major


def test_one_dim_near_one():
    label = classify_one_dim(1 - 1e-9, 5, 100)
    assert (label.kind, label.q, label.a) == ("major", 1, 1)


def test_one_dim_is_periodic():
    alpha = Fraction(3, 7)
    assert classify_one_dim(alpha + 3, 10, 40) == classify_one_dim(alpha, 10, 40)


def test_one_dim_cutoff_range():
    with pytest.raises(ConfigurationError):
        classify_one_dim(0.3, 0.5, 10)
    with pytest.raises(ConfigurationError):
        classify_one_dim(0.3, 11, 10)


@pytest.mark.parametrize("Q", [1, 3, 10, 30])
def test_convergent_search_agrees_with_scan(Q):
    X = 40
    for k in range(997):
        alpha = Fraction(k, 997)
        fast, slow = classify_one_dim(alpha, Q, X), exhaustive_one_dim(alpha, Q, X)
        assert (fast.kind, fast.q, fast.a) == (slow.kind, slow.q, slow.a)
    rng = np.random.default_rng(Q)
    for alpha in rng.random(300):
        fast, slow = classify_one_dim(alpha, Q, X), exhaustive_one_dim(alpha, Q, X)
        assert (fast.kind, fast.q, fast.a) == (slow.kind, slow.q, slow.a)


def test_box_examples():
    assert classify_box(PhasePoint(0, 0, 0), 3, 100).center == RationalCenter(1, 0, 0, 0)
    label = classify_box(PhasePoint(Fraction(1, 2), Fraction(1, 3), Fraction(1, 5)), 30, 10 ** 4)
    assert label.is_major
    assert label.center == RationalCenter(30, 15, 10, 6)
    golden = (math.sqrt(5) - 1) / 2
    assert not classify_box(PhasePoint(golden, golden ** 2, golden ** 3), (10 ** 6) ** (1 / 72), 10 ** 6).is_major


def test_box_boundaries_are_inclusive_for_rationals():
    # Z = 2, X = 100: the cubic half-width is exactly 2 * 10^-6
    edge = PhasePoint(Fraction(1, 50), Fraction(1, 5000), Fraction(2, 10 ** 6))
    assert classify_box(edge, 2, 100).center == RationalCenter(1, 0, 0, 0)
    outside = PhasePoint(Fraction(1, 50), Fraction(1, 5000), Fraction(2, 10 ** 6) + Fraction(1, 10 ** 12))
    assert not classify_box(outside, 2, 100).is_major


@pytest.mark.parametrize("alpha, label", [
    ((0, 0, 0), WLabel.W4),
    ((0, 0, Fraction(1, 2)), WLabel.W1),
    ((Fraction(3, 10), 0, 0), WLabel.W2),
    ((Fraction(1, 2), 0, 0), WLabel.W3),
])
def test_partition_labels(alpha, label):
    assert partition_flags(PhasePoint(*alpha), 10 ** 6).label == label


def test_dissection_report_is_a_partition():
    report = dissection_report(10 ** 6, 500, seed=11)
    assert report.is_partition
    assert report.p_outside_major == 0
    assert set(report.histogram) == {"W1", "W2", "W3", "W4"}
    assert dissection_report(10 ** 6, 500, seed=11).histogram == report.histogram


def test_dissection_needs_X_at_least_two():
    with pytest.raises(ConfigurationError):
        partition_flags(PhasePoint(0.1, 0.2, 0.3), 1)


def test_weyl_probe():
    X = 1000
    assert math.isnan(weyl_probe(X, cutoffs(X)[1], 0).ratio)
    report = weyl_probe(X, cutoffs(X)[1], 20, seed=5)
    assert 0 < report.kept <= 20
    assert report.sup <= 2 * X


def test_major_arc_error_probe():
    report = major_arc_error_probe(1000, 3, seed=2)
    assert report.kept == 8 * 3
    assert math.isfinite(report.ratio)


def test_major_arc_error_stays_bounded():
    report = major_arc_error_probe(10 ** 4, 5, seed=3)
    assert report.kept > 0
    assert report.ratio <= 10


@pytest.mark.parametrize("q", [1, 2, 3, 5, 7, 10])
def test_center_error_is_small(q):
    for a in ((1, 0, 0), (0, 1, 1), (q - 1, 1, q // 2)):
        assert center_error(RationalCenter(q, *a), 97) <= 2 * q + 1e-9


def test_weyl_inequality_bound():
    X = 100
    assert weyl_inequality_bound(0, X) == pytest.approx(X * (1 + 1 / X + 1 / X ** 3) ** 0.25)
    assert weyl_inequality_bound(0.123456, X) < weyl_inequality_bound(0, X)


def test_psi_bound_probe():
    report = psi_bound_probe(50, 10, seed=4)
    assert 0 < report.ratio < math.inf


def test_major_arc_measure():
    X = 10 ** 6
    L, _ = cutoffs(X)
    measure, scale = major_arc_measure(X)
    assert measure == pytest.approx(8 * L ** 3 * X ** -6.0)
    assert scale == pytest.approx(L ** 7 * X ** -6.0)
