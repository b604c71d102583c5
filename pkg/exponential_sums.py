"""Exponential Sums, Complete Sums and the Oscillatory Integral I(beta)"""

import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

import config
from moments import BudgetExceeded, ConfigurationError, Offset, offset_in_range

Real = Union[int, float, Fraction]

TWO_PI_I = 2j * np.pi
FIXED_BITS = 128
FIXED_MOD = 1 << FIXED_BITS
WORD_MOD = 1 << 64
RATIONAL_LIMIT = 1 << 31


def reduce_mod1(value: Real) -> Real:
    """Representative in [0, 1); exact for Fractions."""
    if isinstance(value, (Fraction, int)):
        return Fraction(value) - math.floor(value)
    r = float(value) % 1.0
    return 0.0 if r >= 1.0 else r


def centered_mod1(value: Real) -> Real:
    """Representative in [-1/2, 1/2)."""
    if isinstance(value, (Fraction, int)):
        return reduce_mod1(value + Fraction(1, 2)) - Fraction(1, 2)
    v = float(value)
    r = v - round(v)
    return r - 1.0 if r >= 0.5 else r


@dataclass(frozen=True)
class PhasePoint:
    """alpha in [0,1)^3 (after reduction) or beta in R^3."""
    a1: Real
    a2: Real
    a3: Real

    def as_tuple(self) -> Tuple[Real, Real, Real]:
        return (self.a1, self.a2, self.a3)

    def reduced(self) -> "PhasePoint":
        return PhasePoint(*(reduce_mod1(v) for v in self.as_tuple()))

    def __neg__(self) -> "PhasePoint":
        return PhasePoint(-self.a1, -self.a2, -self.a3)

    def is_rational(self) -> bool:
        return all(isinstance(v, (Fraction, int)) for v in self.as_tuple())


@dataclass(frozen=True)
class RationalCenter:
    q: int
    a1: int
    a2: int
    a3: int

    @property
    def a(self) -> Tuple[int, int, int]:
        return (self.a1, self.a2, self.a3)

    def point(self) -> PhasePoint:
        return PhasePoint(*(Fraction(aj, self.q) for aj in self.a))

    def is_primitive(self) -> bool:
        return math.gcd(self.q, *self.a) == 1


@dataclass
class QuadratureResult:
    value: complex
    error: float
    panels: int
    converged: bool


# --- polynomial phase sums -------------------------------------------------

def _to_fixed(value: Real) -> int:
    """Phase rounded to the nearest multiple of 2^-128, modulo 2^128."""
    frac = Fraction(value)
    frac -= math.floor(frac)
    return round(frac * FIXED_MOD) % FIXED_MOD


def _common_denominator(values: Sequence[Real]) -> int:
    if not all(isinstance(v, (Fraction, int)) for v in values):
        return 0
    q = reduce(lambda a, b: a * b // math.gcd(a, b), (Fraction(v).denominator for v in values), 1)
    return q if q <= RATIONAL_LIMIT else 0


def polynomial_sum(terms: Dict[int, List[Tuple[int, Real]]], X: int) -> complex:
    """sum_{1<=x<=X} e(sum_k c_k x^k) with c_k = sum of multiplier * value.

    Rational coefficients are reduced exactly modulo their common denominator.
    Real ones become 128-bit fixed-point phases: the high word times x^k wraps
    exactly in uint64, the low word contributes lo 2^-64 x^k 2^-64 in floating
    point.
    """
    if X < 1:
        return 0j
    values = [v for pairs in terms.values() for _, v in pairs]
    q = _common_denominator(values)
    x = np.arange(1, X + 1, dtype=np.int64)
    if q:
        r = x % q
        acc = np.zeros(X, dtype=np.int64)
        rk = np.ones(X, dtype=np.int64)
        for k in range(1, max(terms) + 1):
            rk = (rk * r) % q
            if k not in terms:
                continue
            c = sum(Fraction(m) * Fraction(v) for m, v in terms[k])
            num = (c.numerator * (q // c.denominator)) % q
            acc = (acc + num * rk) % q
        return complex(np.exp(TWO_PI_I * acc / q).sum())

    xu = x.astype(np.uint64)
    xf = x.astype(np.float64)
    phase = np.zeros(X, dtype=np.uint64)
    low = np.zeros(X)
    xk = np.ones(X, dtype=np.uint64)
    for k in range(1, max(terms) + 1):
        xk = xk * xu
        if k not in terms:
            continue
        coeff = sum(m * _to_fixed(v) for m, v in terms[k]) % FIXED_MOD
        hi, lo = divmod(coeff, WORD_MOD)
        phase = phase + np.uint64(hi) * xk
        low += (lo * 2.0 ** -64) * (xf ** k * 2.0 ** -64)
    angle = (phase >> np.uint64(11)).astype(np.float64) * 2.0 ** -53 + np.mod(low, 1.0)
    return complex(np.exp(TWO_PI_I * angle).sum())


def weyl_sum_f(alpha: PhasePoint, X: int) -> complex:
    """f(alpha; X) = sum_{x<=X} e(a1 x + a2 x^2 + a3 x^3)."""
    return polynomial_sum({1: [(1, alpha.a1)], 2: [(1, alpha.a2)], 3: [(1, alpha.a3)]}, X)


def shifted_sum_g(alpha: PhasePoint, theta: Real, X: int, h: Offset) -> complex:
    """g(alpha, theta; X) = sum_y e(y theta + 2h1 y a2 + (3h2 y + 3h1 y^2) a3).

    With h1 = 0 only the linear phase y(theta + 3h2 a3) survives.
    """
    terms = {1: [(1, theta), (2 * h.h1, alpha.a2), (3 * h.h2, alpha.a3)]}
    if h.h1:
        terms[2] = [(3 * h.h1, alpha.a3)]
    return polynomial_sum(terms, X)


def complete_sum_S(center: RationalCenter) -> complex:
    """S(q, a) = sum_{r=1}^{q} e_q(a1 r + a2 r^2 + a3 r^3)."""
    q = center.q
    r = np.arange(1, q + 1, dtype=np.int64)
    acc = (center.a1 * r + center.a2 * (r * r % q) + center.a3 * (r * r % q * r % q)) % q
    return complex(np.exp(TWO_PI_I * acc / q).sum())


@lru_cache(maxsize=64)
def complete_sum_table(q: int) -> np.ndarray:
    """S(q, a) for every a in [0, q)^3, indexed [a1, a2, a3].

    S(q, .) is the Fourier transform over (Z/q)^3 of the histogram of
    (r, r^2, r^3) mod q.
    """
    if q ** 4 > config.SERIES_TERM_BUDGET:
        raise BudgetExceeded(f"complete-sum table for q={q} exceeds the budget")
    r = np.arange(q, dtype=np.int64)
    hist = np.zeros((q, q, q), dtype=np.float64)
    np.add.at(hist, (r % q, r * r % q, r * r % q * r % q), 1.0)
    return np.fft.ifftn(hist) * q ** 3


def primitive_mask(q: int) -> np.ndarray:
    """gcd(q, a1, a2, a3) == 1 over a in [0, q)^3."""
    a = np.arange(q, dtype=np.int64)
    g = np.gcd(np.gcd(a[:, None, None], a[None, :, None]), a[None, None, :])
    return np.gcd(g, q) == 1


def complete_sum_bound_probe(qmax: int) -> List[Tuple[int, float]]:
    """max |S(q,a)| / q^(2/3) over primitive a, for each q <= qmax."""
    rows = []
    for q in range(1, qmax + 1):
        table = complete_sum_table(q)
        rows.append((q, float(np.abs(table[primitive_mask(q)]).max() / q ** (2.0 / 3.0))))
    return rows


# --- the oscillatory integral ---------------------------------------------

def _phase_variation(beta: Sequence[float]) -> float:
    return abs(beta[0]) + 2 * abs(beta[1]) + 3 * abs(beta[2])


def integrate_phase(beta: Sequence[float], tol: float = config.DEFAULT_TOL) -> QuadratureResult:
    """Adaptive Simpson for I(beta) = int_0^1 e(b1 g + b2 g^2 + b3 g^3) dg.

    Starts from PANELS_PER_CYCLE panels per unit of phase variation; a panel
    is accepted once its Richardson error is within tol times its width.
    """
    if tol <= 0:
        raise ConfigurationError("tolerance must be positive")
    b1, b2, b3 = (float(b) for b in beta)

    def f(g):
        return np.exp(TWO_PI_I * (((b3 * g + b2) * g + b1) * g))

    n0 = max(1, math.ceil(config.PANELS_PER_CYCLE * _phase_variation((b1, b2, b3))))
    edges = np.linspace(0.0, 1.0, n0 + 1)
    lo, hi = edges[:-1], edges[1:]
    total, error, panels = 0j, 0.0, 0
    while lo.size:
        mid = 0.5 * (lo + hi)
        width = hi - lo
        f_lo, f_mid, f_hi = f(lo), f(mid), f(hi)
        f_q1, f_q3 = f(0.5 * (lo + mid)), f(0.5 * (mid + hi))
        whole = width / 6.0 * (f_lo + 4 * f_mid + f_hi)
        halves = width / 12.0 * (f_lo + 4 * f_q1 + 2 * f_mid + 4 * f_q3 + f_hi)
        est = np.abs(halves - whole) / 15.0
        done = est <= tol * width
        panels += lo.size
        total += (halves[done] + (halves[done] - whole[done]) / 15.0).sum()
        error += est[done].sum()
        lo, hi = lo[~done], hi[~done]
        if panels + 2 * lo.size > config.MAX_PANELS:
            rest = halves[~done]
            total += rest.sum()
            error += est[~done].sum()
            return QuadratureResult(complex(total), float(error), panels, False)
        mid = 0.5 * (lo + hi)
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
    return QuadratureResult(complex(total), float(error), panels, True)


def oscillatory_I(beta: Sequence[float], tol: float = config.DEFAULT_TOL) -> complex:
    result = integrate_phase(beta, tol)
    if not result.converged:
        print(f"I(beta): refinement cap reached at beta={tuple(beta)}, error ~ {result.error:.2e}",
              file=sys.stderr)
    return result.value


def scaled_I(beta: Sequence[float], X: float, tol: float = config.DEFAULT_TOL) -> complex:
    """I(beta; X) = int_0^X e(...) = X * I(b1 X, b2 X^2, b3 X^3)."""
    b1, b2, b3 = (float(b) for b in beta)
    return X * oscillatory_I((b1 * X, b2 * X ** 2, b3 * X ** 3), tol)


def gauss_legendre_panels(variation: float, nodes: int = 12) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule on [0, 1], one panel per cycle of phase."""
    panels = max(1, math.ceil(variation))
    x, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(0.0, 1.0, panels + 1)
    half = 0.5 * np.diff(edges)
    centers = 0.5 * (edges[:-1] + edges[1:])
    g = (centers[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return g, weights


def oscillatory_I_grid(beta1: np.ndarray, beta2: np.ndarray, beta3: np.ndarray) -> np.ndarray:
    """I(beta) on the tensor grid beta1 x beta2 x beta3, shape (n1, n2, n3).

    The phase separates across coordinates, so the tensor is a sequence of
    matrix products over the quadrature nodes.
    """
    if len(beta1) * len(beta2) * len(beta3) > config.GRID_POINT_BUDGET:
        raise BudgetExceeded("quadrature tensor exceeds the grid budget")
    variation = _phase_variation((np.abs(beta1).max(), np.abs(beta2).max(), np.abs(beta3).max()))
    g, w = gauss_legendre_panels(variation)
    e1 = np.exp(TWO_PI_I * np.outer(beta1, g))
    e2 = np.exp(TWO_PI_I * np.outer(beta2, g * g)) * w[None, :]
    e3 = np.exp(TWO_PI_I * np.outer(beta3, g ** 3))
    out = np.empty((len(beta1), len(beta2), len(beta3)), dtype=np.complex128)
    for k in range(len(beta3)):
        out[:, :, k] = (e1 * e3[k][None, :]) @ e2.T
    return out


def arc_approximant_V(alpha: PhasePoint, center: RationalCenter, X: int,
                      tol: float = config.DEFAULT_TOL) -> complex:
    """V(alpha; q, a) = q^-1 S(q, a) I(alpha - a/q; X)."""
    # exact offsets for float alpha too
    offsets = [centered_mod1(Fraction(aj) - Fraction(cj, center.q)) for aj, cj in zip(alpha.as_tuple(), center.a)]
    return complete_sum_S(center) / center.q * scaled_I([float(v) for v in offsets], X, tol)


# --- orthogonality on a finite grid ---------------------------------------

def grid_fourier_coefficient(s: int, X: int, h: Offset, grid: Tuple[int, int, int]) -> float:
    """(N1 N2 N3)^-1 sum over the uniform grid of |f|^(2s) e(-alpha.h).

    Exact (up to rounding) once N_j > 2 s X^j. Offsets outside the moment range
    have no solutions and give 0 without touching the grid.
    """
    for j, n in enumerate(grid, start=1):
        if n <= 2 * s * X ** j:
            raise ConfigurationError(f"grid N{j}={n} too small for s={s}, X={X}")
    if not offset_in_range(s, X, h):
        return 0.0
    n1, n2, n3 = grid
    if n1 * n2 * n3 > config.GRID_POINT_BUDGET:
        raise BudgetExceeded(f"grid {grid} exceeds the point budget")
    x = np.arange(1, X + 1, dtype=np.int64)

    def waves(n, power):
        k = np.arange(n, dtype=np.int64)
        return np.exp(TWO_PI_I * (np.outer(k, x ** power) % n) / n)

    def twist(n, hj):
        k = np.arange(n, dtype=np.int64)
        return np.exp(-TWO_PI_I * ((k * hj) % n) / n)

    e1, e2, e3 = waves(n1, 1), waves(n2, 2), waves(n3, 3)
    t1, t2, t3 = twist(n1, h.h1), twist(n2, h.h2), twist(n3, h.h3)
    total = 0j
    for k in range(n3):
        f = (e1 * e3[k][None, :]) @ e2.T
        total += t3[k] * (t1 @ (np.abs(f) ** (2 * s)) @ t2)
    return float(total.real / (n1 * n2 * n3))


def psi(alpha3: Real, X: int) -> float:
    """(q + X^3 |q alpha - a|)^-1 on the major arc M(q, a) of M(X), else 0."""
    from arc_dissection import classify_one_dim

    label = classify_one_dim(alpha3, X, X)
    if not label.is_major:
        return 0.0
    return float(1.0 / (label.q + X ** 3 * abs(label.q * alpha3 - label.a)))
