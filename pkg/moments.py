"""Moment vectors, offsets and the packed-key codec shared by every module"""

from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np

INT64_MAX = np.iinfo(np.int64).max
# s! is the largest tuple multiplicity and must fit an int64 weight
MAX_PAIRS = 20


class ConfigurationError(ValueError):
    """Parameters rejected before any work starts."""


class BudgetExceeded(RuntimeError):
    """A configured work or memory budget would be exceeded."""


@dataclass(frozen=True)
class Offset:
    """Right-hand side h = (h1, h2, h3) of the inhomogeneous system."""
    h1: int
    h2: int
    h3: int

    def as_tuple(self) -> Tuple[int, int, int]:
        return (self.h1, self.h2, self.h3)

    def __neg__(self) -> "Offset":
        return Offset(-self.h1, -self.h2, -self.h3)

    def shifted(self, z: int) -> "Offset":
        """Offset seen by the translated variables u = x + z, v = y + z."""
        return Offset(
            self.h1,
            self.h2 + 2 * self.h1 * z,
            self.h3 + 3 * self.h2 * z + 3 * self.h1 * z * z,
        )

    def is_zero(self) -> bool:
        return self.h1 == 0 and self.h2 == 0 and self.h3 == 0

    @classmethod
    def parse(cls, text: str) -> "Offset":
        """Parse '1,3,7' (the CLI form)."""
        parts = [p.strip() for p in str(text).split(",") if p.strip()]
        if len(parts) != 3:
            raise ConfigurationError(f"offset needs three components, got {text!r}")
        try:
            return cls(*(int(p) for p in parts))
        except ValueError as exc:
            raise ConfigurationError(f"offset components must be integers: {text!r}") from exc

    def __str__(self) -> str:
        return f"{self.h1},{self.h2},{self.h3}"


@dataclass(frozen=True)
class MomentVector:
    """Power sums (sum x, sum x^2, sum x^3) of one side of the system."""
    m1: int
    m2: int
    m3: int

    def as_tuple(self) -> Tuple[int, int, int]:
        return (self.m1, self.m2, self.m3)

    def __sub__(self, h: Offset) -> Tuple[int, int, int]:
        return (self.m1 - h.h1, self.m2 - h.h2, self.m3 - h.h3)


@dataclass(frozen=True)
class Params:
    s: int
    X: int

    def __post_init__(self):
        validate_params(self.s, self.X)


def moment_of(values: Sequence[int]) -> MomentVector:
    """Exact power sums of a tuple of positive integers."""
    if len(values) == 0:
        raise ConfigurationError("moment_of needs a nonempty tuple")
    m1 = m2 = m3 = 0
    for x in values:
        x = int(x)
        m1 += x
        m2 += x * x
        m3 += x * x * x
    if m3 > INT64_MAX:
        raise ConfigurationError("moment exceeds the 64-bit key width; configuration too large")
    return MomentVector(m1, m2, m3)


def congruence_soluble(h: Offset) -> bool:
    """Fermat conditions: h3 = h1 (mod 3) and h3 = h2 = h1 (mod 2)."""
    return (h.h3 - h.h1) % 3 == 0 and (h.h3 - h.h2) % 2 == 0 and (h.h2 - h.h1) % 2 == 0


def moment_bounds(s: int, X: int) -> Tuple[MomentVector, MomentVector]:
    if s < 1 or X < 1:
        raise ConfigurationError(f"need s >= 1 and X >= 1, got s={s}, X={X}")
    return MomentVector(s, s, s), MomentVector(s * X, s * X ** 2, s * X ** 3)


class MomentCodec:
    """Mixed-radix packing of moment vectors into one int64 word.

    Component j of a key lies in [low_j, high_j] with high_j = s * top^j; the
    radix of component j is high_j + 1, so keys are the raw moments.
    """

    def __init__(self, s: int, top: int, degree: int = 3, bottom: int = 1):
        if degree not in (2, 3):
            raise ConfigurationError("only degree 2 and 3 moment keys are supported")
        self.s = s
        self.degree = degree
        self.low = tuple(s * bottom ** j for j in range(1, degree + 1))
        self.high = tuple(s * top ** j for j in range(1, degree + 1))
        self.radix = tuple(hi + 1 for hi in self.high)
        capacity = 1
        for r in self.radix:
            capacity *= r
        if capacity - 1 > INT64_MAX:
            raise ConfigurationError(
                f"moment range for s={s}, X={top} exceeds the 64-bit key encoding"
            )
        self.capacity = capacity

    def pack(self, moments: np.ndarray) -> np.ndarray:
        """Pack an (n, degree) int64 array of in-range moments."""
        key = moments[:, self.degree - 1].astype(np.int64)
        for j in range(self.degree - 2, -1, -1):
            key = key * self.radix[j] + moments[:, j]
        return key

    def unpack(self, keys: np.ndarray) -> np.ndarray:
        out = np.empty((keys.shape[0], self.degree), dtype=np.int64)
        rest = keys.astype(np.int64)
        for j in range(self.degree):
            out[:, j] = rest % self.radix[j]
            rest = rest // self.radix[j]
        return out

    def in_range(self, moments: np.ndarray) -> np.ndarray:
        ok = np.ones(moments.shape[0], dtype=bool)
        for j in range(self.degree):
            ok &= (moments[:, j] >= self.low[j]) & (moments[:, j] <= self.high[j])
        return ok


def validate_params(s: int, X: int) -> None:
    """Reject (s, X) whose keys or counts do not fit in 64 bits."""
    if not isinstance(s, (int, np.integer)) or not isinstance(X, (int, np.integer)):
        raise ConfigurationError("s and X must be integers")
    if s < 1 or X < 1:
        raise ConfigurationError(f"need s >= 1 and X >= 1, got s={s}, X={X}")
    if s > MAX_PAIRS:
        raise ConfigurationError(f"s={s} exceeds {MAX_PAIRS}; tuple multiplicities overflow 64 bits")
    MomentCodec(s, X)
    if X ** (2 * s) > INT64_MAX:
        raise ConfigurationError(f"X^(2s) = {X}^{2 * s} overflows the 64-bit counters")


def offset_in_range(s: int, X: int, h: Offset) -> bool:
    """False when some |h_j| exceeds s * (X^j - 1), so no solution can exist."""
    return all(abs(hj) <= s * (X ** j - 1) for j, hj in enumerate(h.as_tuple(), start=1))


def moment_rows(tuples: Iterable[Sequence[int]], degree: int = 3) -> np.ndarray:
    """Moment matrix of an (n, s) array of tuples."""
    arr = np.asarray(list(tuples) if not isinstance(tuples, np.ndarray) else tuples, dtype=np.int64)
    return np.stack([np.sum(arr ** j, axis=1) for j in range(1, degree + 1)], axis=1)
