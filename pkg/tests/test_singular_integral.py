import math

import numpy as np
import pytest

from moments import ConfigurationError, Offset
from singular_integral import (
    NormalizedOffset,
    half_axis,
    major_arc_singular_integral,
    real_density_oracle,
    singular_integral_truncated,
    truncation_sequence,
    window_averaged_integral,
)


def test_normalized_offset():
    assert NormalizedOffset.from_offset(Offset(1, 1, 1), 2).as_tuple() == (0.5, 0.25, 0.125)
    assert NormalizedOffset.parse("0, -1.5, 2").as_tuple() == (0.0, -1.5, 2.0)
    with pytest.raises(ConfigurationError):
        NormalizedOffset.parse("1,2")


@pytest.mark.parametrize("B", [1.0, 2.5, 4.0])
def test_half_axis_integrates_constants(B):
    pts, wts, right = half_axis(B, 6)
    assert wts.sum() == pytest.approx(B)
    assert pts.min() > 0 and pts.max() < B
    assert np.all(pts <= right)


def test_truncations_grow_at_the_origin():
    report = singular_integral_truncated(6, NormalizedOffset(0.0, 0.0, 0.0), B=4.0)
    assert sorted(report.sequence) == [1.0, 2.0, 4.0]
    j1, j2, j4 = (report.sequence[b] for b in (1.0, 2.0, 4.0))
    assert 0 < j1 < j2 < j4
    assert report.value == pytest.approx(j4)
    assert report.imag_residue < 1e-9
    assert report.tail_estimate > 0


def test_integral_is_even_in_n():
    n = NormalizedOffset(0.1, 0.1, 0.1)
    forward = singular_integral_truncated(6, n, B=2.0)
    backward = singular_integral_truncated(6, -n, B=2.0)
    assert forward.value == pytest.approx(backward.value, rel=1e-9)


def test_truncation_sequence():
    rows = truncation_sequence(6, NormalizedOffset(0.0, 0.0, 0.0), B=2.0)
    assert [b for b, _ in rows] == [1.0, 2.0]


def test_integral_parameter_checks():
    with pytest.raises(ConfigurationError):
        singular_integral_truncated(3, NormalizedOffset(0.0, 0.0, 0.0), B=2.0)
    with pytest.raises(ConfigurationError):
        singular_integral_truncated(6, NormalizedOffset(0.0, 0.0, 0.0), B=-1.0)


def test_window_average_reduces_to_the_integral_for_tiny_windows():
    origin = NormalizedOffset(0.0, 0.0, 0.0)
    plain = singular_integral_truncated(6, origin, B=2.0)
    window = window_averaged_integral(6, origin, 1e-7, B=2.0)
    assert window.method == "window-quadrature"
    assert window.value == pytest.approx(plain.value, rel=1e-9)


def test_window_average_matches_real_density_oracle():
    origin = NormalizedOffset(0.0, 0.0, 0.0)
    window = window_averaged_integral(6, origin, 0.2, B=8.0)
    mc = real_density_oracle(6, origin, 0.2, 2 * 10 ** 5, seed=4)
    combined = math.sqrt(mc.std_error ** 2 + window.tail_estimate ** 2)
    assert abs(window.value - mc.estimate) <= 4 * combined + 1e-3


def test_window_average_needs_positive_eps():
    with pytest.raises(ConfigurationError):
        window_averaged_integral(6, NormalizedOffset(0.0, 0.0, 0.0), 0.0, B=2.0)


def test_major_arc_integral():
    report = major_arc_singular_integral(6, Offset(1, 1, 1), 10 ** 6)
    assert report.B == pytest.approx((10 ** 6) ** (1 / 72))
    assert report.value > 0


def test_oracle_unreachable_offset():
    report = real_density_oracle(6, NormalizedOffset(13.0, 0.0, 0.0), 0.1, 2 * 10 ** 4, seed=3)
    assert report.hits == 0
    assert report.estimate == 0.0


def test_oracle_is_seeded():
    n = NormalizedOffset(0.0, 0.0, 0.0)
    first = real_density_oracle(6, n, 0.2, 2 * 10 ** 4, seed=9)
    second = real_density_oracle(6, n, 0.2, 2 * 10 ** 4, seed=9)
    assert first.estimate == second.estimate
    assert first.hits > 0


def test_oracle_error_shrinks_with_samples():
    n = NormalizedOffset(0.0, 0.0, 0.0)
    small = real_density_oracle(6, n, 0.2, 4 * 10 ** 4, seed=1)
    large = real_density_oracle(6, n, 0.2, 16 * 10 ** 4, seed=1)
    assert 0.35 <= large.std_error / small.std_error <= 0.7


def test_oracle_rejects_tiny_sample_counts():
    with pytest.raises(ConfigurationError):
        real_density_oracle(6, NormalizedOffset(0.0, 0.0, 0.0), 0.1, 500)
    with pytest.raises(ConfigurationError):
        real_density_oracle(6, NormalizedOffset(0.0, 0.0, 0.0), 0.0, 10 ** 4)
