import itertools

import numpy as np
import pytest

from moments import (
    MAX_PAIRS,
    ConfigurationError,
    MomentCodec,
    MomentVector,
    Offset,
    congruence_soluble,
    moment_bounds,
    moment_of,
    offset_in_range,
    validate_params,
)


@pytest.mark.parametrize("values, expected", [
    ((1,), (1, 1, 1)),
    ((1, 2), (3, 5, 9)),
    ((2, 2, 2), (6, 12, 24)),
])
def test_moment_of_examples(values, expected):
    assert moment_of(values).as_tuple() == expected


def test_moment_of_is_permutation_invariant():
    base = (5, 1, 4, 4, 2)
    for perm in itertools.permutations(base):
        assert moment_of(perm) == moment_of(base)


def test_moment_of_rejects_empty_tuple():
    with pytest.raises(ConfigurationError):
        moment_of([])


def test_moment_of_lies_within_bounds():
    lo, hi = moment_bounds(3, 5)
    for values in itertools.product(range(1, 6), repeat=3):
        m = moment_of(values)
        assert all(a <= b <= c for a, b, c in zip(lo.as_tuple(), m.as_tuple(), hi.as_tuple()))
        assert m.m1 <= m.m2 <= m.m3


@pytest.mark.parametrize("h, expected", [
    ((1, 1, 1), True),
    ((0, 0, 1), False),
    ((1, 3, 7), True),
])
def test_congruence_soluble_examples(h, expected):
    assert congruence_soluble(Offset(*h)) is expected


def test_congruence_soluble_symmetric_under_negation():
    for h in itertools.product(range(-4, 5), repeat=3):
        assert congruence_soluble(Offset(*h)) == congruence_soluble(-Offset(*h))


@pytest.mark.parametrize("s, X, lo, hi", [
    (1, 2, (1, 1, 1), (2, 4, 8)),
    (6, 1, (6, 6, 6), (6, 6, 6)),
    (2, 3, (2, 2, 2), (6, 18, 54)),
])
def test_moment_bounds_examples(s, X, lo, hi):
    low, high = moment_bounds(s, X)
    assert low == MomentVector(*lo)
    assert high == MomentVector(*hi)


def test_codec_keys_are_distinct_and_invertible():
    codec = MomentCodec(2, 4)
    rows = np.array([moment_of(t).as_tuple() for t in itertools.product(range(1, 5), repeat=2)], dtype=np.int64)
    keys = codec.pack(rows)
    assert len(np.unique(keys)) == len({tuple(r) for r in rows})
    assert np.array_equal(codec.unpack(keys), rows)
    assert codec.in_range(rows).all()
    assert not codec.in_range(np.array([[1, 2, 2]], dtype=np.int64))[0]


def test_validate_params_rejects_oversized_configurations():
    validate_params(6, 32)
    with pytest.raises(ConfigurationError):
        validate_params(6, 10 ** 4)
    with pytest.raises(ConfigurationError):
        validate_params(0, 3)


def test_validate_params_caps_the_pair_count():
    validate_params(MAX_PAIRS, 1)
    with pytest.raises(ConfigurationError):
        validate_params(MAX_PAIRS + 1, 2)


def test_offset_parse_and_shift():
    h = Offset.parse(" 1, 3 ,7")
    assert h == Offset(1, 3, 7)
    assert str(h) == "1,3,7"
    assert h.shifted(2) == Offset(1, 3 + 4, 7 + 18 + 12)
    with pytest.raises(ConfigurationError):
        Offset.parse("1,2")
    with pytest.raises(ConfigurationError):
        Offset.parse("a,b,c")


def test_offset_in_range():
    assert offset_in_range(1, 2, Offset(1, 3, 7))
    assert not offset_in_range(1, 2, Offset(2, 0, 0))
