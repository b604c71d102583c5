"""Exact Counter for the Inhomogeneous Cubic Vinogradov System (meet in the middle)"""

import itertools
import math
import sys
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Optional, Tuple

import numpy as np

import config
from moments import (
    BudgetExceeded,
    ConfigurationError,
    MAX_PAIRS,
    MomentCodec,
    MomentVector,
    Offset,
    congruence_soluble,
    moment_rows,
    offset_in_range,
    validate_params,
)
from table_store import PackedTable, aggregate, cache_path, save_table, try_load_table
from worker_pool import run_jobs


@dataclass
class RepresentationTable:
    """r_s(m): how many s-tuples with entries in [bottom, top] have moments m."""
    s: int
    X: int
    codec: MomentCodec
    table: PackedTable
    bottom: int = 1

    @property
    def top(self) -> int:
        return self.bottom + self.X - 1

    def entries(self) -> Tuple[np.ndarray, np.ndarray]:
        """Moment rows (n, degree) and their multiplicities, sorted by packed key."""
        keys, counts = self.table.entries()
        return self.codec.unpack(keys), counts

    def as_dict(self) -> Dict[Tuple[int, ...], int]:
        moments, counts = self.entries()
        return {tuple(int(v) for v in row): int(c) for row, c in zip(moments, counts)}

    def get(self, m: MomentVector) -> int:
        row = np.array([m.as_tuple()[:self.codec.degree]], dtype=np.int64)
        if not self.codec.in_range(row)[0]:
            return 0
        return int(self.table.lookup(self.codec.pack(row))[0])

    def total(self) -> int:
        return int(self.table.entries()[1].sum())

    def lookup_moments(self, moments: np.ndarray) -> np.ndarray:
        """Multiplicities of arbitrary moment rows; out-of-range rows give 0."""
        out = np.zeros(moments.shape[0], dtype=np.int64)
        ok = self.codec.in_range(moments)
        if ok.any():
            out[ok] = self.table.lookup(self.codec.pack(moments[ok]))
        return out


@dataclass
class CountResult:
    value: int
    s: int
    X: int
    h: Offset
    elapsed: float
    method: str
    extra: Dict[str, object] = field(default_factory=dict)


def multiset_count(values: int, s: int) -> int:
    return math.comb(values + s - 1, s)


def _partition_table(s: int, bottom: int, largest: int, degree: int, codec: MomentCodec):
    """Keys and weights for all multisets whose largest element is `largest`."""
    powers = [np.arange(largest + 1, dtype=np.int64) ** j for j in range(1, degree + 1)]
    factorial_s = math.factorial(s)
    stream = itertools.combinations_with_replacement(range(bottom, largest + 1), s - 1)
    key_parts, weight_parts = [], []
    while True:
        chunk = list(itertools.islice(stream, config.MULTISET_CHUNK))
        if not chunk:
            break
        rows = np.empty((len(chunk), s), dtype=np.int64)
        if s > 1:
            rows[:, :-1] = np.array(chunk, dtype=np.int64)
        rows[:, -1] = largest

        # Running run-lengths: their product over a sorted row is prod(mult!)
        run = np.ones(len(rows), dtype=np.int64)
        denominator = np.ones(len(rows), dtype=np.int64)
        for k in range(1, s):
            run = np.where(rows[:, k] == rows[:, k - 1], run + 1, 1)
            denominator *= run
        weights = factorial_s // denominator

        moments = np.stack([p[rows].sum(axis=1) for p in powers], axis=1)
        keys, sums = aggregate(codec.pack(moments), weights)
        key_parts.append(keys)
        weight_parts.append(sums)
    return aggregate(np.concatenate(key_parts), np.concatenate(weight_parts))


@lru_cache(maxsize=16)
def build_range_table(s: int, bottom: int, top: int, degree: int = 3) -> RepresentationTable:
    """Representation table for s-tuples with entries in [bottom, top]."""
    if not 1 <= s <= MAX_PAIRS or bottom < 1 or top < bottom:
        raise ConfigurationError(f"bad table range s={s}, [{bottom}, {top}]")
    width = top - bottom + 1
    if multiset_count(width, s) > config.TABLE_MULTISET_BUDGET:
        raise BudgetExceeded(
            f"{multiset_count(width, s)} multisets for s={s}, X={width} exceed the table budget"
        )
    codec = MomentCodec(s, top, degree=degree, bottom=bottom)

    jobs = [(s, bottom, largest, degree, codec) for largest in range(bottom, top + 1)]
    parts = run_jobs(_partition_table, jobs)
    keys, counts = aggregate(
        np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])
    )
    print(f"Table: s={s} range=[{bottom},{top}] degree={degree} -> {len(keys)} moment keys "
          f"from {len(jobs)} partitions", file=sys.stderr)
    return RepresentationTable(s=s, X=width, codec=codec, table=PackedTable(keys, counts), bottom=bottom)


def build_representation_table(s: int, X: int, cache_dir: Optional[str] = None) -> RepresentationTable:
    """Table over [1, X]^s; reads and writes the disk cache when cache_dir is given."""
    validate_params(s, X)
    if cache_dir:
        path = cache_path(cache_dir, s, X)
        cached = try_load_table(path, s, X)
        if cached is not None:
            print(f"Cache: hit {path}", file=sys.stderr)
            return RepresentationTable(s=s, X=X, codec=MomentCodec(s, X), table=PackedTable(*cached))
    table = build_range_table(s, 1, X, 3)
    if cache_dir:
        try:
            save_table(path, s, X, *table.table.entries())
        except Exception as e:
            print(f"Cache: could not write {path} ({e})", file=sys.stderr)
    return table


def _pair_count(table: RepresentationTable, h: Tuple[int, ...]) -> int:
    """sum over m of r(m) * r(m - h)."""
    codec = table.codec
    if any(abs(hj) > hi - lo for hj, hi, lo in zip(h, codec.high, codec.low)):
        return 0
    moments, counts = table.entries()
    target = moments - np.asarray(h[:table.codec.degree], dtype=np.int64)
    return int(np.dot(counts, table.lookup_moments(target)))


def count_solutions(s: int, X: int, h: Offset, cache_dir: Optional[str] = None) -> CountResult:
    """B_s(X; h) by pairing the representation table with its h-translate."""
    started = time.perf_counter()
    table = build_representation_table(s, X, cache_dir=cache_dir)
    value = _pair_count(table, h.as_tuple())
    if value and not congruence_soluble(h):
        raise RuntimeError(f"nonzero count {value} for congruence-insoluble h={h}")
    return CountResult(value, s, X, h, time.perf_counter() - started, "meet-in-the-middle")


def _all_tuple_moments(s: int, X: int, degree: int = 3) -> np.ndarray:
    tuples = np.array(list(itertools.product(range(1, X + 1), repeat=s)), dtype=np.int64)
    return moment_rows(tuples, degree)


def count_naive(s: int, X: int, h: Offset) -> CountResult:
    """Brute force over every (x, y) in [1, X]^(2s)."""
    if X ** (2 * s) > config.NAIVE_ITERATION_BUDGET:
        raise BudgetExceeded(f"naive oracle needs {X}^{2 * s} iterations")
    started = time.perf_counter()
    if not offset_in_range(s, X, h):
        return CountResult(0, s, X, h, time.perf_counter() - started, "naive")
    side = _all_tuple_moments(s, X)
    target = np.asarray(h.as_tuple(), dtype=np.int64)
    block = max(1, (1 << 22) // len(side))
    value = 0
    for i in range(0, len(side), block):
        diff = side[i:i + block, None, :] - side[None, :, :]
        value += int(np.all(diff == target, axis=2).sum())
    return CountResult(value, s, X, h, time.perf_counter() - started, "naive")


def naive_representation_table(s: int, X: int) -> Dict[Tuple[int, int, int], int]:
    """Moment multiplicities by direct enumeration of [1, X]^s."""
    rows, counts = np.unique(_all_tuple_moments(s, X), axis=0, return_counts=True)
    return {tuple(int(v) for v in row): int(c) for row, c in zip(rows, counts)}


def verify_shift_identity(s: int, X: int, h: Offset, z: int) -> bool:
    """Translating every variable by z preserves the count (shifted right-hand side)."""
    if not 1 <= z <= X:
        raise ConfigurationError(f"shift z={z} outside [1, {X}]")
    shifted = build_range_table(s, z + 1, X + z, 3)
    return _pair_count(shifted, h.shifted(z).as_tuple()) == count_solutions(s, X, h).value


def count_quadratic_T0(X: int) -> int:
    """Solutions of sum(x - y) = 0, sum(x^2 - y^2) = 0 with three pairs in [1, X]."""
    return _pair_count(build_range_table(3, 1, X, 2), (0, 0))


def _feature_counts(X: int, h: Offset) -> np.ndarray:
    """Class sizes of [1, X]^3 under the g-side forms (2h1*M1, 3h2*M1 + 3h1*M2).

    Two tuples share a class iff both forms agree: with h1 != 0 that means equal
    (M1, M2), with h1 = 0 and h2 != 0 equal M1, and otherwise every tuple.
    """
    moments, counts = build_range_table(3, 1, X, 2).entries()
    if h.h1:
        features = moments[:, :2]
    elif h.h2:
        features = moments[:, :1]
    else:
        return np.array([counts.sum()], dtype=np.int64)
    _, inverse = np.unique(features, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    sums = np.zeros(inverse.max() + 1, dtype=np.int64)
    np.add.at(sums, inverse, counts)
    return sums


def count_mixed_g6(X: int, h: Offset) -> int:
    """Solutions of 3h1*sum(x^2-y^2) + 3h2*sum(x-y) = 0, 2h1*sum(x-y) = 0 (three pairs)."""
    sums = _feature_counts(X, h)
    return int(np.dot(sums, sums))


def count_twisted_moment_theta1(X: int, h: Offset) -> int:
    """Theta_1(X; h): x, y in [1, 2X] against three g-side pairs in [1, X]."""
    g_side = count_mixed_g6(X, h)
    # x - y = 0 is the only degree-one equation on the f-side, so x = y and the
    # g-side must balance both remaining equations on its own
    return 2 * X * g_side
