"""Singular Integral by Product Quadrature, plus a Real-Density Monte Carlo Oracle"""

import math
import sys
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Tuple

import numpy as np

import config
from exponential_sums import oscillatory_I, oscillatory_I_grid
from moments import ConfigurationError, Offset
from worker_pool import run_jobs

NODES_PER_PANEL = 6
REFINED_EDGES = (0.0, 0.125, 0.25, 0.5, 1.0)


@dataclass(frozen=True)
class NormalizedOffset:
    """n_j = h_j X^-j."""
    n1: float
    n2: float
    n3: float

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.n1, self.n2, self.n3)

    def __neg__(self) -> "NormalizedOffset":
        return NormalizedOffset(-self.n1, -self.n2, -self.n3)

    @classmethod
    def from_offset(cls, h: Offset, X: int) -> "NormalizedOffset":
        return cls(h.h1 / X, h.h2 / X ** 2, h.h3 / X ** 3)

    @classmethod
    def parse(cls, text: str) -> "NormalizedOffset":
        parts = [p.strip() for p in str(text).split(",") if p.strip()]
        if len(parts) != 3:
            raise ConfigurationError(f"normalized offset needs three components, got {text!r}")
        try:
            return cls(*(float(p) for p in parts))
        except ValueError as exc:
            raise ConfigurationError(f"bad normalized offset {text!r}") from exc

    def __str__(self) -> str:
        return ",".join(f"{v:g}" for v in self.as_tuple())


@dataclass
class IntegralReport:
    value: float
    B: float
    tail_estimate: float
    converged: bool
    method: str = "quadrature"
    imag_residue: float = 0.0
    sequence: Dict[float, float] = field(default_factory=dict)
    observed_exponent: float = float("nan")


@dataclass
class MonteCarloReport:
    estimate: float
    std_error: float
    eps: float
    samples: int
    hits: int
    seed: int
    method: str = "monte-carlo"


def half_axis(B: float, nodes: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes on [0, B]: dyadic panels below 1, unit panels above.

    Returns nodes, weights and the right edge of each node's panel.
    """
    edges = [e for e in REFINED_EDGES if e < B] + list(np.arange(2.0, math.ceil(B) + 1.0))
    edges = sorted(set(min(e, B) for e in edges) | {B})
    x, w = np.polynomial.legendre.leggauss(nodes)
    pts, wts, right = [], [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        pts.append(0.5 * (lo + hi) + half * x)
        wts.append(half * w)
        right.append(np.full(nodes, hi))
    return np.concatenate(pts), np.concatenate(wts), np.concatenate(right)


def full_axis(B: float, nodes: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    pts, wts, right = half_axis(B, nodes)
    return np.concatenate([-pts[::-1], pts]), np.concatenate([wts[::-1], wts]), np.concatenate([right[::-1], right])


@lru_cache(maxsize=8)
def _modulus_tensor(B: float, nodes: int) -> Tuple[np.ndarray, ...]:
    """|I(beta)| on the product grid full x full x half (beta_3 > 0)."""
    b1, w1, r1 = full_axis(B, nodes)
    b3, w3, r3 = half_axis(B, nodes)
    print(f"Integral: tabulating |I| on {len(b1)}x{len(b1)}x{len(b3)} nodes (B={B:g})", file=sys.stderr)
    modulus = np.abs(oscillatory_I_grid(b1, b1, b3))
    return b1, w1, r1, b3, w3, r3, modulus


def _panel_nodes(n: NormalizedOffset) -> int:
    """More nodes when the twist e(-beta.n) oscillates faster."""
    return NODES_PER_PANEL + 2 * math.ceil(max(abs(v) for v in n.as_tuple()))


def _twisted_integral(weighted: np.ndarray, axes, n: NormalizedOffset, cutoff: float,
                      eps: float = 0.0) -> complex:
    """Twisted integral up to cutoff; eps > 0 adds the box-window factor sinc(2 eps beta_j)."""
    t1, t2, t3 = (w * (r <= cutoff) * np.exp(-2j * np.pi * b * nj) * np.sinc(2.0 * eps * b)
                  for (b, w, r), nj in zip(axes, n.as_tuple()))
    half = np.einsum("i,j,k,ijk->", t1, t2, t3, weighted)
    # beta -> -beta maps |I|^(2s) to itself and conjugates the twist
    return half + np.conj(half)


def singular_integral_truncated(s: int, n: NormalizedOffset, B: float = config.DEFAULT_B,
                                tol: float = config.DEFAULT_TOL) -> IntegralReport:
    """int over [-B, B]^3 of |I(beta)|^(2s) e(-beta.n) by product Gauss-Legendre quadrature.

    The same tensor yields every dyadic truncation B, B/2, ...; the tail past B
    is estimated from the last increment under decay B^(3 - 2s/3).
    """
    return _dyadic_quadrature(s, n, B, tol, 0.0, "quadrature")


def window_averaged_integral(s: int, n: NormalizedOffset, eps: float, B: float = config.DEFAULT_B,
                             tol: float = config.DEFAULT_TOL) -> IntegralReport:
    """The singular integral averaged over the box |n'_j - n_j| < eps.

    This is the quantity the real-density oracle estimates at the same eps:
    the box average multiplies the integrand by prod_j sinc(2 eps beta_j).
    """
    if eps <= 0:
        raise ConfigurationError("eps must be positive")
    return _dyadic_quadrature(s, n, B, tol, eps, "window-quadrature")


def _dyadic_quadrature(s: int, n: NormalizedOffset, B: float, tol: float, eps: float,
                       method: str) -> IntegralReport:
    if s < 4:
        raise ConfigurationError("the singular integral is evaluated for s >= 4")
    if B <= 0 or tol <= 0:
        raise ConfigurationError("B and tol must be positive")
    nodes = _panel_nodes(n)
    b1, w1, r1, b3, w3, r3, modulus = _modulus_tensor(float(B), nodes)
    weighted = modulus ** (2 * s)
    axes = ((b1, w1, r1), (b1, w1, r1), (b3, w3, r3))

    cutoffs = [B]
    while cutoffs[-1] / 2 >= 1.0 and float(cutoffs[-1] / 2).is_integer():
        cutoffs.append(cutoffs[-1] / 2)
    sequence = {}
    for cutoff in sorted(cutoffs):
        sequence[cutoff] = _twisted_integral(weighted, axes, n, cutoff, eps)
    value = sequence[B]

    exponent = 3.0 - 2.0 * s / 3.0
    tail, observed = float("nan"), float("nan")
    keys = sorted(sequence)
    if len(keys) >= 2 and exponent < 0:
        last = sequence[keys[-1]].real - sequence[keys[-2]].real
        tail = abs(last) / (2.0 ** -exponent - 1.0)
    if len(keys) >= 3:
        d1 = sequence[keys[-2]].real - sequence[keys[-3]].real
        d2 = sequence[keys[-1]].real - sequence[keys[-2]].real
        if d1 and d2 and d1 * d2 > 0:
            observed = math.log2(d2 / d1)

    converged = _spot_check(float(B), tol, nodes)
    return IntegralReport(
        value=float(value.real),
        B=float(B),
        tail_estimate=tail,
        converged=converged,
        method=method,
        imag_residue=float(abs(value.imag)),
        sequence={k: float(v.real) for k, v in sequence.items()},
        observed_exponent=observed,
    )


def _spot_check(B: float, tol: float, nodes: int) -> bool:
    """Compare tabulated |I| against adaptive quadrature at a few grid nodes."""
    b1, _, _, b3, _, _, modulus = _modulus_tensor(B, nodes)
    ok = True
    for i, j, k in ((len(b1) // 2, len(b1) // 2, 0), (0, len(b1) - 1, len(b3) - 1), (len(b1) // 3, 0, len(b3) // 2)):
        reference = abs(oscillatory_I((b1[i], b1[j], b3[k]), tol))
        if abs(reference - modulus[i, j, k]) > 10 * tol + 1e-12:
            print(f"Integral: node ({i},{j},{k}) differs from adaptive value by "
                  f"{abs(reference - modulus[i, j, k]):.2e}", file=sys.stderr)
            ok = False
    return ok


def major_arc_singular_integral(s: int, h: Offset, X: int) -> IntegralReport:
    """The integral over the rescaled major-arc box |beta_j| <= L, L = X^(1/72)."""
    L = X ** (1.0 / 72.0)
    return singular_integral_truncated(s, NormalizedOffset.from_offset(h, X), B=L)


def _monte_carlo_block(s: int, n: Tuple[float, float, float], eps: float, size: int,
                       seed_seq: np.random.SeedSequence) -> int:
    rng = np.random.default_rng(seed_seq)
    x = rng.random((size, s))
    y = rng.random((size, s))
    hit = np.ones(size, dtype=bool)
    for j, nj in enumerate(n, start=1):
        diff = (x ** j).sum(axis=1) - (y ** j).sum(axis=1)
        hit &= np.abs(diff - nj) < eps
    return int(hit.sum())


def real_density_oracle(s: int, n: NormalizedOffset, eps: float, samples: int,
                        seed: int = config.DEFAULT_SEED) -> MonteCarloReport:
    """(2 eps)^-3 vol{(x, y) in [0,1]^(2s): |sum(x^j - y^j) - n_j| < eps}, with binomial error."""
    if eps <= 0:
        raise ConfigurationError("eps must be positive")
    if samples < 10 ** 4:
        raise ConfigurationError("the density oracle needs at least 10^4 samples")
    blocks = math.ceil(samples / config.MONTE_CARLO_BLOCK)
    sizes = [config.MONTE_CARLO_BLOCK] * (blocks - 1) + [samples - config.MONTE_CARLO_BLOCK * (blocks - 1)]
    seeds = np.random.SeedSequence(seed).spawn(blocks)
    hits = sum(run_jobs(_monte_carlo_block, [(s, n.as_tuple(), eps, size, ss) for size, ss in zip(sizes, seeds)]))
    p_hat = hits / samples
    scale = (2.0 * eps) ** 3
    return MonteCarloReport(
        estimate=p_hat / scale,
        std_error=math.sqrt(p_hat * (1.0 - p_hat) / samples) / scale,
        eps=eps,
        samples=samples,
        hits=hits,
        seed=seed,
    )


def truncation_sequence(s: int, n: NormalizedOffset, B: float = config.DEFAULT_B) -> List[Tuple[float, float]]:
    """(B', J(B')) for the dyadic truncations up to B."""
    return sorted(singular_integral_truncated(s, n, B).sequence.items())
