"""Hardy-Littlewood Dissections and Numerical Weyl / Major-Arc Probes"""

import math
import sys
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import product
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

import config
from exponential_sums import (
    PhasePoint,
    RationalCenter,
    Real,
    arc_approximant_V,
    complete_sum_S,
    reduce_mod1,
    weyl_sum_f,
)
from moments import ConfigurationError


@dataclass(frozen=True)
class OneDimLabel:
    kind: str  # "major" | "minor"
    Q: float
    X: int
    q: int = 0
    a: int = 0

    @property
    def is_major(self) -> bool:
        return self.kind == "major"


@dataclass(frozen=True)
class BoxLabel:
    kind: str
    Z: float
    X: int
    center: Optional[RationalCenter] = None

    @property
    def is_major(self) -> bool:
        return self.kind == "major"


class WLabel(Enum):
    W1 = "W1"
    W2 = "W2"
    W3 = "W3"
    W4 = "W4"


@dataclass(frozen=True)
class PartitionFlags:
    label: WLabel
    major3: bool
    in_N: bool
    in_P: bool


def cutoffs(X: float) -> Tuple[float, float]:
    """L = X^(1/72) and Q = L^3."""
    L = X ** (1.0 / 72.0)
    return L, L ** 3


def _is_exact(value) -> bool:
    return isinstance(value, (Fraction, int))


def _width(cutoff: Real, X: int, j: int, exact: bool) -> Real:
    return Fraction(cutoff) / X ** j if exact else cutoff / X ** j


def _within(lhs, rhs: float, exact: bool) -> bool:
    return lhs <= rhs if exact else lhs <= rhs + config.ARC_SLACK


def convergents(alpha: Real, max_den: float) -> Iterator[Tuple[int, int]]:
    """Continued-fraction convergents (a, q) of alpha with q <= max_den."""
    x = Fraction(alpha)
    num, den = x.numerator, x.denominator
    p_prev, p = 0, 1
    q_prev, q = 1, 0
    while den:
        c, rem = divmod(num, den)
        p_prev, p = p, c * p + p_prev
        q_prev, q = q, c * q + q_prev
        if q > max_den:
            return
        yield p, q
        num, den = den, rem


def exhaustive_one_dim(alpha: Real, Q: float, X: int) -> OneDimLabel:
    """Reference scan over every 0 <= a <= q <= Q with (a, q) = 1."""
    alpha = reduce_mod1(alpha)
    exact = _is_exact(alpha)
    width = _width(Q, X, 3, exact)
    for q in range(1, int(math.floor(Q)) + 1):
        for a in range(q + 1):
            if math.gcd(a, q) == 1 and _within(abs(q * alpha - a), width, exact):
                return OneDimLabel("major", Q, X, q, a)
    return OneDimLabel("minor", Q, X)


def classify_one_dim(alpha: Real, Q: float, X: int) -> OneDimLabel:
    """Major(q, a) when |q alpha - a| <= Q X^-3 for some 0 <= a <= q <= Q, (a, q) = 1.

    A qualifying center satisfies |alpha - a/q| < 1/(2q^2) whenever
    2 Q^2 < X^3, so it is a convergent of alpha; otherwise fall back to the scan.
    """
    if not 1 <= Q <= X:
        raise ConfigurationError(f"one-dimensional cutoff Q={Q} outside [1, X={X}]")
    alpha = reduce_mod1(alpha)
    if 2 * Q * Q >= X ** 3:
        return exhaustive_one_dim(alpha, Q, X)
    exact = _is_exact(alpha)
    width = _width(Q, X, 3, exact)
    for a, q in convergents(alpha, Q):
        if _within(abs(q * alpha - a), width, exact):
            return OneDimLabel("major", Q, X, q, a)
    # alpha just below 1 can sit on the arc around 1/1 before its first convergent
    if _within(abs(alpha - 1), width, exact):
        return OneDimLabel("major", Q, X, 1, 1)
    return OneDimLabel("minor", Q, X)


def classify_box(alpha: PhasePoint, Z: float, X: int) -> BoxLabel:
    """Smallest q <= Z whose box |alpha_j - a_j/q| <= Z X^-j contains alpha."""
    if not 1 <= Z <= X:
        raise ConfigurationError(f"box cutoff Z={Z} outside [1, X={X}]")
    point = alpha.reduced()
    coords = point.as_tuple()
    exact = point.is_rational()
    widths = [_width(Z, X, j, exact) for j in (1, 2, 3)]
    for q in range(1, int(math.floor(Z)) + 1):
        numerators = [min(q, max(0, round(q * c))) for c in coords]
        if math.gcd(q, *numerators) != 1:
            continue
        if all(_within(abs(c - Fraction(n, q) if exact else float(c) - n / q), w, exact)
               for c, n, w in zip(coords, numerators, widths)):
            return BoxLabel("major", Z, X, RationalCenter(q, *numerators))
    return BoxLabel("minor", Z, X)


def partition_flags(alpha: PhasePoint, X: int) -> PartitionFlags:
    """W1 = [0,1)^2 x m, W2 = ([0,1)^2 x M) n n, W3 = ([0,1)^2 x M) n (N \\ P), W4 = P."""
    if X < 2:
        raise ConfigurationError("the dissection needs X >= 2")
    L, Q = cutoffs(X)
    major3 = classify_one_dim(alpha.a3, Q, X).is_major
    in_N = classify_box(alpha, min(Q * Q, X), X).is_major
    in_P = classify_box(alpha, L, X).is_major
    if in_P:
        label = WLabel.W4
    elif not major3:
        label = WLabel.W1
    elif not in_N:
        label = WLabel.W2
    else:
        label = WLabel.W3
    return PartitionFlags(label, major3, in_N, in_P)


def partition_label(alpha: PhasePoint, X: int) -> WLabel:
    return partition_flags(alpha, X).label


@dataclass
class DissectionReport:
    X: int
    samples: int
    seed: int
    histogram: Dict[str, int] = field(default_factory=dict)
    p_outside_major: int = 0

    @property
    def is_partition(self) -> bool:
        return sum(self.histogram.values()) == self.samples


def dissection_report(X: int, sample_count: int, seed: int = config.DEFAULT_SEED) -> DissectionReport:
    """Label seeded uniform samples and count P points whose alpha_3 is minor."""
    rng = np.random.default_rng(seed)
    points = rng.random((sample_count, 3))
    tally = Counter()
    outside = 0
    for row in points:
        flags = partition_flags(PhasePoint(*row), X)
        tally[flags.label.value] += 1
        if flags.in_P and not flags.major3:
            outside += 1
    histogram = {w.value: tally.get(w.value, 0) for w in WLabel}
    return DissectionReport(X, sample_count, seed, histogram, outside)


# --- probes ---------------------------------------------------------------

@dataclass
class ProbeReport:
    name: str
    X: int
    kept: int
    sup: float
    normalizer: float
    extra: Dict[str, float] = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        return self.sup / self.normalizer if self.kept else float("nan")


def weyl_probe(X: int, Q: float, sample_count: int, seed: int = config.DEFAULT_SEED) -> ProbeReport:
    """sup |f(alpha; 2X)| over sampled alpha with alpha_3 on the minor arcs m(Q)."""
    rng = np.random.default_rng(seed)
    sup, kept = 0.0, 0
    for row in rng.random((sample_count, 3)):
        if classify_one_dim(row[2], Q, X).is_major:
            continue
        kept += 1
        sup = max(sup, abs(weyl_sum_f(PhasePoint(*row), 2 * X)))
    print(f"Weyl probe: X={X} kept {kept}/{sample_count} minor-arc samples", file=sys.stderr)
    return ProbeReport("weyl", X, kept, sup, X * Q ** -0.25, {"Q": Q})


def major_arc_centers(L: float) -> List[RationalCenter]:
    """Primitive centers (q, a) with q <= L and 0 <= a_j <= q."""
    centers = []
    for q in range(1, int(math.floor(L)) + 1):
        for a in product(range(q + 1), repeat=3):
            if math.gcd(q, *a) == 1:
                centers.append(RationalCenter(q, *a))
    return centers


def major_arc_error_probe(X: int, sample_count: int, seed: int = config.DEFAULT_SEED) -> ProbeReport:
    """max |f(alpha; X) - V(alpha)| / L^2 over samples inside the boxes of P."""
    L, _ = cutoffs(X)
    rng = np.random.default_rng(seed)
    widths = np.array([L / X ** j for j in (1, 2, 3)])
    sup, kept = 0.0, 0
    for center in major_arc_centers(L):
        base = np.array([aj / center.q for aj in center.a])
        for delta in (rng.random((sample_count, 3)) * 2 - 1) * widths:
            alpha = PhasePoint(*(reduce_mod1(v) for v in base + delta))
            error = abs(weyl_sum_f(alpha, X) - arc_approximant_V(alpha, center, X))
            sup = max(sup, error)
            kept += 1
    return ProbeReport("major-arc", X, kept, sup, L ** 2, {"L": L})


def center_error(center: RationalCenter, X: int) -> float:
    """|f(a/q; X) - (X/q) S(q, a)|, at most 2q by the block decomposition."""
    return abs(weyl_sum_f(center.point(), X) - X / center.q * complete_sum_S(center))


def weyl_inequality_bound(alpha3: Real, X: int) -> float:
    """X (1/q + 1/X + q/X^3)^(1/4), minimized over convergents a/q of alpha_3 with q <= X^3."""
    best = float("inf")
    for _, q in convergents(reduce_mod1(alpha3), X ** 3):
        best = min(best, 1.0 / q + 1.0 / X + q / X ** 3)
    return X * best ** 0.25


def weyl_inequality_probe(X: int, sample_count: int, seed: int = config.DEFAULT_SEED) -> ProbeReport:
    """max |f(alpha; 2X)| / (Weyl envelope at 2X) over seeded samples."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for row in rng.random((sample_count, 3)):
        ratio = abs(weyl_sum_f(PhasePoint(*row), 2 * X)) / weyl_inequality_bound(row[2], 2 * X)
        worst = max(worst, ratio)
    return ProbeReport("weyl-inequality", X, sample_count, worst, 1.0)


def psi_bound_probe(X: int, sample_count: int, seed: int = config.DEFAULT_SEED) -> ProbeReport:
    """max |f(alpha; 2X)|^4 / (X^3 + X^4 Psi(alpha_3)) over seeded samples."""
    from exponential_sums import psi

    rng = np.random.default_rng(seed)
    points = rng.random((sample_count, 3))
    # half the samples sit on rationals of small height, where Psi is large
    for i in range(0, sample_count, 2):
        q = int(rng.integers(1, 8))
        points[i, 2] = int(rng.integers(0, q)) / q
    worst = 0.0
    for row in points:
        envelope = X ** 3 + X ** 4 * psi(row[2], X)
        worst = max(worst, abs(weyl_sum_f(PhasePoint(*row), 2 * X)) ** 4 / envelope)
    return ProbeReport("psi-bound", X, sample_count, worst, 1.0)


def major_arc_measure(X: int) -> Tuple[float, float]:
    """Measure of P = K(L) as clipped box volumes, and the scale L^7 X^-6."""
    L, _ = cutoffs(X)
    total = 0.0
    for center in major_arc_centers(L):
        volume = 1.0
        for j, aj in enumerate(center.a, start=1):
            c, w = aj / center.q, L / X ** j
            volume *= min(1.0, c + w) - max(0.0, c - w)
        total += volume
    return total, L ** 7 * X ** -6.0
