"""Singular Series, p-adic Densities and Hensel Witness Search"""

import itertools
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import numpy as np

import config
from exponential_sums import complete_sum_table, primitive_mask
from moments import BudgetExceeded, ConfigurationError, Offset
from worker_pool import run_jobs

IMAG_TOLERANCE = 1e-10


@dataclass
class DensityReport:
    value: float
    truncation: int
    tail_estimate: float
    method: str
    imag_residue: float = 0.0
    terms: List[float] = field(default_factory=list)


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % d for d in range(2, math.isqrt(p) + 1))


def check_prime_level(p: int, H: int) -> None:
    if not is_prime(p):
        raise ConfigurationError(f"p={p} is not prime")
    if H < 0:
        raise ConfigurationError("level H must be non-negative")
    if p ** (4 * H) > config.DENSITY_LEVEL_BUDGET:
        raise BudgetExceeded(f"p^(4H) = {p}^{4 * H} exceeds the density budget")


def _twisted_sum(q: int, s: int, h: Offset, primitive_only: bool) -> complex:
    """sum over a mod q of |S(q,a)/q|^(2s) e_q(-a.h), optionally over gcd(q, a) = 1 only."""
    if q == 1:
        return 1.0 + 0j
    weights = np.abs(complete_sum_table(q) / q) ** (2 * s)
    a = np.arange(q, dtype=np.int64)
    h1, h2, h3 = (hj % q for hj in h.as_tuple())
    phase = ((a * h1) % q)[:, None, None] + ((a * h2) % q)[None, :, None] + ((a * h3) % q)[None, None, :]
    terms = weights * np.exp(-2j * np.pi * (phase % q) / q)
    if primitive_only:
        terms = terms[primitive_mask(q)]
    return complex(terms.sum())


def _mobius(n: int) -> int:
    sign, d = 1, 2
    while d * d <= n:
        if n % d == 0:
            n //= d
            if n % d == 0:
                return 0
            sign = -sign
        d += 1
    return -sign if n > 1 else sign


def _divisors(n: int) -> List[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def _exact_term_fits(q: int, s: int) -> bool:
    return _count_fits(q, s) and q ** 4 * s <= config.EXACT_TERM_BUDGET


def exact_series_term(q: int, s: int, h: Offset) -> Fraction:
    """Primitive sum at modulus q by Moebius inversion of the solution counts.

    sum_{d | q} A(d) = N(q) / q^(2s-3), so A(q) = sum_{d | q} mu(q/d) N(d) / d^(2s-3).
    """
    return sum((Fraction(_mobius(q // d) * solution_count_mod(d, s, h), d ** (2 * s - 3))
                for d in _divisors(q) if _mobius(q // d)), Fraction(0))


def series_term(q: int, s: int, h: Offset) -> float:
    """Inner sum of the singular series at modulus q (real part).

    Exact through the solution counts when they fit 64-bit counters, else
    through the complete-sum table.
    """
    if q < 1:
        raise ConfigurationError("q must be positive")
    if _exact_term_fits(q, s):
        return float(exact_series_term(q, s, h))
    value = _twisted_sum(q, s, h, primitive_only=True)
    if abs(value.imag) > IMAG_TOLERANCE * max(1.0, abs(value.real)):
        print(f"Series: q={q} imaginary residue {value.imag:.3e}", file=sys.stderr)
    return value.real


def _tail_estimate(terms: List[float], Qmax: int) -> float:
    """Power-law fit |term(q)| ~ C q^-tau over the top decade, summed past Qmax."""
    lo = max(2, Qmax // 10)
    q = np.arange(lo, Qmax + 1)
    mags = np.abs(np.asarray(terms[lo - 1:Qmax]))
    keep = mags > 1e-300
    if keep.sum() < 2:
        return float("nan")
    slope, intercept = np.polyfit(np.log(q[keep]), np.log(mags[keep]), 1)
    tau = -slope
    if tau <= 1:
        return float("inf")
    return float(math.exp(intercept) * Qmax ** (1 - tau) / (tau - 1))


def singular_series_truncated(s: int, h: Offset, Qmax: int) -> DensityReport:
    """sum_{q <= Qmax} series_term(q, s, h) with an empirical tail estimate."""
    if s < 5:
        raise ConfigurationError("the singular series is only summed for s >= 5")
    if Qmax < 1:
        raise ConfigurationError("Qmax must be positive")
    if Qmax ** 4 > config.SERIES_TERM_BUDGET:
        raise BudgetExceeded(f"Qmax={Qmax} exceeds the series budget")
    terms = run_jobs(series_term, [(q, s, h) for q in range(1, Qmax + 1)])
    return DensityReport(
        value=float(sum(terms)),
        truncation=Qmax,
        tail_estimate=_tail_estimate(terms, Qmax),
        method="truncated-series",
        terms=terms,
    )


def major_arc_singular_series(s: int, h: Offset, X: int) -> DensityReport:
    """The series truncated at q <= L = X^(1/72), as used on the major arcs."""
    L = int(math.floor(X ** (1.0 / 72.0)))
    terms = [series_term(q, s, h) for q in range(1, L + 1)]
    return DensityReport(float(sum(terms)), L, float("nan"), "truncated-series", terms=terms)


def padic_density_via_sums(p: int, s: int, h: Offset, H: int) -> DensityReport:
    """Levels 0..H of the p-adic series: sum_k series_term(p^k)."""
    check_prime_level(p, H)
    terms, imag = [], 0.0
    for k in range(H + 1):
        value = _twisted_sum(p ** k, s, h, primitive_only=True)
        terms.append(value.real)
        imag = max(imag, abs(value.imag))
    return DensityReport(float(sum(terms)), H, float("nan"), "truncated-series", imag, terms)


def padic_density_via_counting(p: int, s: int, h: Offset, H: int) -> DensityReport:
    """p^(-H(2s-3)) N(p^H) with N from the orthogonality identity over all a mod p^H."""
    check_prime_level(p, H)
    value = _twisted_sum(p ** H, s, h, primitive_only=False)
    return DensityReport(value.real, H, float("nan"), "exact-count", abs(value.imag))


def _count_fits(q: int, s: int) -> bool:
    return q ** (2 * s) <= np.iinfo(np.int64).max


def solution_count_mod(q: int, s: int, h: Offset) -> int:
    """N(q): solutions of the system modulo q with all 2s variables in [0, q).

    Built exactly by convolving the moment histogram of one variable s times.
    """
    if q < 1:
        raise ConfigurationError("q must be positive")
    if not _count_fits(q, s):
        raise BudgetExceeded(f"N({q}) may overflow the 64-bit counters at s={s}")
    return _solution_count_mod(q, s, tuple(hj % q for hj in h.as_tuple()))


def padic_solution_count(p: int, s: int, h: Offset, H: int) -> int:
    """N(p^H) for a prime power modulus."""
    check_prime_level(p, H)
    return solution_count_mod(p ** H, s, h)


@lru_cache(maxsize=256)
def _solution_count_mod(q: int, s: int, residues: Tuple[int, int, int]) -> int:
    r = np.arange(q, dtype=np.int64)
    shifts = list(zip(r % q, r * r % q, r * r % q * r % q))
    side = np.zeros((q, q, q), dtype=np.int64)
    side[0, 0, 0] = 1
    for _ in range(s):
        nxt = np.zeros_like(side)
        for shift in shifts:
            nxt += np.roll(side, shift, axis=(0, 1, 2))
        side = nxt
    target = np.roll(side, tuple(-hj % q for hj in residues), axis=(0, 1, 2))
    return int((side * target).sum())


# --- Hensel witnesses -------------------------------------------------------

@dataclass
class HenselWitness:
    p: int
    depth: int
    x: Tuple[int, ...]
    y: Tuple[int, ...]
    columns: Tuple[int, int, int]
    minor_valuation: int
    search_level: int


def _valuation(n: int, p: int) -> int:
    if n == 0:
        return math.inf
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _residuals(z: List[int], s: int, h: Offset) -> List[int]:
    x, y = z[:s], z[s:]
    return [sum(v ** j for v in x) - sum(v ** j for v in y) - hj
            for j, hj in zip((1, 2, 3), h.as_tuple())]


def _minor(z: List[int], s: int, cols: Tuple[int, int, int]) -> List[List[int]]:
    """Jacobian rows d/dz of sum x^j - sum y^j restricted to three variables."""
    rows = []
    for j in (1, 2, 3):
        rows.append([(1 if c < s else -1) * j * z[c] ** (j - 1) for c in cols])
    return rows


def _det3(m: List[List[int]]) -> int:
    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def _adjugate3(m: List[List[int]]) -> List[List[int]]:
    cof = [[0] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            sub = [[m[r][c] for c in range(3) if c != j] for r in range(3) if r != i]
            cof[i][j] = (-1) ** (i + j) * (sub[0][0] * sub[1][1] - sub[0][1] * sub[1][0])
    return [[cof[j][i] for j in range(3)] for i in range(3)]


def _best_minor(z: List[int], s: int, p: int) -> Tuple[Tuple[int, int, int], int]:
    best, best_v = None, math.inf
    for cols in itertools.combinations(range(2 * s), 3):
        v = _valuation(_det3(_minor(z, s, cols)), p)
        if v < best_v:
            best, best_v = cols, v
    return best, best_v


def hensel_lift(z: List[int], s: int, h: Offset, p: int, cols: Tuple[int, int, int],
                v: int, depth: int) -> List[int]:
    """Newton steps on the three minor columns until the residuals vanish mod p^depth.

    Requires the residuals to vanish mod p^(2v+1), v the minor's valuation.
    """
    modulus = p ** (depth + 2 * v + 2)
    z = [c % modulus for c in z]
    for _ in range(4 * depth + 8):
        residual = _residuals(z, s, h)
        if all(rj % p ** depth == 0 for rj in residual):
            return z
        m = _minor(z, s, cols)
        det = _det3(m)
        unit = det // p ** v
        inverse = pow(unit % modulus, -1, modulus)
        adj = _adjugate3(m)
        for i, c in enumerate(cols):
            numer = sum(adj[i][k] * residual[k] for k in range(3))
            if numer % p ** v:
                raise ArithmeticError("residual not divisible by the minor's p-part")
            z[c] = (z[c] - (numer // p ** v) * inverse) % modulus
    raise ArithmeticError(f"Newton lift did not reach depth {depth}")


def _solutions_mod(m: int, s: int, h: Offset, rng: np.random.Generator) -> np.ndarray:
    """Random candidates mod m that satisfy the system mod m (may be empty)."""
    found = []
    block = 1 << 16
    for _ in range(0, config.HENSEL_SAMPLE_BUDGET, block):
        z = rng.integers(0, m, size=(block, 2 * s), dtype=np.int64)
        sq = z * z % m
        cube = sq * z % m
        ok = np.ones(block, dtype=bool)
        for powers, hj in zip((z, sq, cube), (hj % m for hj in h.as_tuple())):
            diff = powers[:, :s].sum(axis=1) - powers[:, s:].sum(axis=1) - hj
            ok &= diff % m == 0
        if ok.any():
            found.append(z[ok])
            if sum(len(f) for f in found) >= 64:
                break
    return np.concatenate(found) if found else np.empty((0, 2 * s), dtype=np.int64)


def hensel_nonsingular_search(p: int, s: int, h: Offset, depth: int,
                              seed: int = config.DEFAULT_SEED) -> Optional[HenselWitness]:
    """Randomized search for a non-singular solution, lifted to modulus p^depth.

    A candidate mod p^t is accepted when some 3x3 Jacobian minor has p-adic
    valuation v with 2v + 1 <= t; for p >= 5 this means a unit minor at t = 1.
    None means no witness was found within the sample budget.
    """
    if not is_prime(p):
        raise ConfigurationError(f"p={p} is not prime")
    if depth < 1 or s < 2:
        raise ConfigurationError("need depth >= 1 and s >= 2")
    rng = np.random.default_rng(seed)
    # every minor carries the factor 6, and for p = 2 also a difference of equal parity
    v_floor = _valuation(6, p) + (1 if p == 2 else 0)
    start = 2 * v_floor + 1
    for t in range(start, start + 3):
        m = p ** t
        if m ** 4 * s <= config.DENSITY_LEVEL_BUDGET and _count_fits(m, s) and padic_solution_count(p, s, h, t) == 0:
            print(f"Hensel: no solutions modulo {p}^{t}", file=sys.stderr)
            return None
        for row in _solutions_mod(m, s, h, rng):
            z = [int(c) for c in row]
            cols, v = _best_minor(z, s, p)
            if cols is None or 2 * v + 1 > t:
                continue
            lifted = hensel_lift(z, s, h, p, cols, v, max(depth, t))
            reduced = [c % p ** depth for c in lifted]
            return HenselWitness(p, depth, tuple(reduced[:s]), tuple(reduced[s:]), cols, v, t)
    print(f"Hensel: no witness for p={p}, h={h} within the sample budget", file=sys.stderr)
    return None


def witness_satisfies(witness: HenselWitness, h: Offset) -> bool:
    """Residuals of the reduced witness vanish mod p^depth."""
    z = list(witness.x) + list(witness.y)
    modulus = witness.p ** witness.depth
    return all(r % modulus == 0 for r in _residuals(z, len(witness.x), h))


def euler_product(s: int, h: Offset, levels: Dict[int, int]) -> float:
    """prod_p padic_density_via_sums(p, s, h, H_p) over the given primes."""
    value = 1.0
    for p, H in levels.items():
        value *= padic_density_via_sums(p, s, h, H).value
    return value


def smooth_series_sum(s: int, h: Offset, levels: Dict[int, int]) -> float:
    """sum of series_term(q) over q = prod p^k_p with k_p <= H_p."""
    total = 0.0
    for exps in itertools.product(*(range(H + 1) for H in levels.values())):
        q = 1
        for p, k in zip(levels, exps):
            q *= p ** k
        total += series_term(q, s, h)
    return total


def density_fraction(p: int, s: int, h: Offset, H: int) -> Fraction:
    """Exact p^(-H(2s-3)) N(p^H)."""
    return Fraction(padic_solution_count(p, s, h, H), p ** (H * (2 * s - 3)))
