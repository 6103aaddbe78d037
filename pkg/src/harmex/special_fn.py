"""Gamma-ratio coefficients, zonal harmonic values, and radial moment integrals.

Everything downstream (kernels, norms, decompositions) reduces to the three
scalar families implemented here:

* ``frac_deriv_multiplier`` / ``kernel_coefficient`` -- ratios of Gamma
  functions evaluated through log-Gamma differences so that degrees in the
  hundreds never overflow,
* ``zonal_value`` -- the degree-k zonal harmonic as a function of the cosine
  of the angle to its pole, normalized against the probability measure on
  the sphere (``zonal_value(k, n, 1) == harmonic_space_dim(k, n)``),
* ``radial_moment`` -- integrals of (1-rho^2)^alpha rho^(2k+n-1) over a
  union of radius intervals.

The product ``kernel_coefficient(k, a, n) * radial_moment(k, a, n, [0,1))``
equals 1 for every degree; this partition of unity is what makes the
two-piece kernel splitting reproduce the original function exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence, Tuple

import numpy as np
from scipy.special import gammaln, roots_jacobi

from .intervals import IntervalSet

__all__ = [
    "GammaRatioSpec",
    "ZonalPolynomial",
    "log_gamma",
    "frac_deriv_multiplier",
    "frac_deriv_multipliers",
    "kernel_coefficient",
    "kernel_coefficients",
    "harmonic_space_dim",
    "zonal_value",
    "zonal_values_upto",
    "zonal_blocks",
    "radial_moment",
    "radial_moment_vector",
]

# Right endpoints beyond this are treated as touching 1 exactly.
_ONE_CLIP = 1.0 - 1e-12


def log_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0; positive-axis guard around scipy's gammaln."""
    if not x > 0.0:
        raise ValueError(f"log_gamma requires x > 0, got {x}")
    return float(gammaln(x))


@dataclass(frozen=True)
class GammaRatioSpec:
    """Ratio prod Gamma(num_i + k) / prod Gamma(den_j + k), degree-indexed.

    All arguments must stay strictly positive at the requested degree;
    evaluation goes through log-Gamma differences, never raw products.
    """

    numerator_shifts: Tuple[float, ...]
    denominator_shifts: Tuple[float, ...]

    def evaluate(self, k: int) -> float:
        args = [s + k for s in self.numerator_shifts] + [s + k for s in self.denominator_shifts]
        if any(a <= 0.0 for a in args):
            raise ValueError(f"Gamma argument nonpositive at degree {k}: {args}")
        log_num = sum(gammaln(s + k) for s in self.numerator_shifts)
        log_den = sum(gammaln(s + k) for s in self.denominator_shifts)
        return float(math.exp(log_num - log_den))


def frac_deriv_multiplier(k: int, t: float, n: int) -> float:
    """Degree-k coefficient multiplier of the order-t radial derivative.

    Gamma(k+t+n/2) / (Gamma(k+n/2) * Gamma(t+n/2)); identically 1 for t=0
    in dimension 2.
    """
    half = 0.5 * n
    if k + t + half <= 0.0 or t + half <= 0.0 or k + half <= 0.0:
        raise ValueError(f"Gamma pole in multiplier: k={k}, t={t}, n={n}")
    return float(math.exp(gammaln(k + t + half) - gammaln(k + half) - gammaln(t + half)))


def frac_deriv_multipliers(K: int, t: float, n: int) -> np.ndarray:
    """Vector of multipliers for degrees 0..K."""
    half = 0.5 * n
    if t + half <= 0.0:
        raise ValueError(f"Gamma pole in multiplier: t={t}, n={n}")
    k = np.arange(K + 1, dtype=float)
    return np.exp(gammaln(k + t + half) - gammaln(k + half) - gammaln(t + half))


def kernel_coefficient(k: int, alpha: float, n: int) -> float:
    """Degree-k coefficient 2 Gamma(a+1+k+n/2) / (Gamma(a+1) Gamma(k+n/2))."""
    if alpha <= -1.0:
        raise ValueError(f"kernel order must satisfy alpha > -1, got {alpha}")
    half = 0.5 * n
    return float(2.0 * math.exp(gammaln(alpha + 1.0 + k + half) - gammaln(alpha + 1.0) - gammaln(k + half)))


def kernel_coefficients(K: int, alpha: float, n: int) -> np.ndarray:
    """Vector of kernel coefficients for degrees 0..K."""
    if alpha <= -1.0:
        raise ValueError(f"kernel order must satisfy alpha > -1, got {alpha}")
    half = 0.5 * n
    k = np.arange(K + 1, dtype=float)
    return 2.0 * np.exp(gammaln(alpha + 1.0 + k + half) - gammaln(alpha + 1.0) - gammaln(k + half))


def harmonic_space_dim(k: int, n: int) -> float:
    """Dimension of the space of degree-k spherical harmonics in R^n."""
    if n < 2:
        raise ValueError("dimension must be >= 2")
    if k == 0:
        return 1.0
    if n == 2:
        return 2.0
    return (2.0 * k + n - 2.0) / (n - 2.0) * math.comb(k + n - 3, k)


@dataclass(frozen=True)
class ZonalPolynomial:
    """Degree-k zonal harmonic in dimension n, as a function of the cosine."""

    degree: int
    dimension: int

    def __call__(self, s) -> float:
        return zonal_value(self.degree, self.dimension, s)

    def value_at_one(self) -> float:
        return harmonic_space_dim(self.degree, self.dimension)


def _check_cosine(s: np.ndarray) -> np.ndarray:
    if np.any(np.abs(s) > 1.0 + 1e-12):
        raise ValueError("cosine argument outside [-1, 1]")
    return np.clip(s, -1.0, 1.0)


def zonal_value(k: int, n: int, s) -> float:
    """Zonal harmonic Z_k(s), s the cosine of the angle to the pole.

    Normalization: Z_0 = 1 and Z_k(1) equals the degree-k space dimension,
    so that integrating Z_k against any degree-k harmonic w.r.t. the
    probability measure reproduces the harmonic at the pole.
    """
    if k < 0:
        raise ValueError("degree must be >= 0")
    if n < 2:
        raise ValueError("dimension must be >= 2")
    s = float(_check_cosine(np.asarray(s, dtype=float)))
    if k == 0:
        return 1.0
    if n == 2:
        return 2.0 * math.cos(k * math.acos(s))
    lam = 0.5 * (n - 2)
    # three-term Gegenbauer recurrence, rescaled at the end
    c_prev, c_cur = 1.0, 2.0 * lam * s
    for j in range(2, k + 1):
        c_prev, c_cur = c_cur, (2.0 * (j + lam - 1.0) * s * c_cur - (j + 2.0 * lam - 2.0) * c_prev) / j
    c_k = c_cur if k >= 1 else c_prev
    return (2.0 * k + n - 2.0) / (n - 2.0) * c_k


def zonal_values_upto(K: int, n: int, s) -> np.ndarray:
    """Array [Z_0(s), ..., Z_K(s)]; s scalar or 1-d array (result stacked)."""
    s = _check_cosine(np.atleast_1d(np.asarray(s, dtype=float)))
    out = np.empty((K + 1,) + s.shape, dtype=float)
    for k0, block in zonal_blocks(K, n, s, block_size=K + 1):
        out[k0 : k0 + block.shape[0]] = block
    return out


def zonal_blocks(K: int, n: int, s: np.ndarray, block_size: int = 256) -> Iterator[Tuple[int, np.ndarray]]:
    """Yield (k_start, matrix) blocks of Z_k(s_i), k = 0..K, for chunked matmuls.

    Keeps only two recurrence rows alive, so degree K in the thousands with
    thousands of nodes stays within a few MB per block.
    """
    if n < 2:
        raise ValueError("dimension must be >= 2")
    s = _check_cosine(np.atleast_1d(np.asarray(s, dtype=float)))
    N = s.shape[0]
    lam = 0.5 * (n - 2)
    c_prev = None  # T_{k-1} (n=2) or Gegenbauer C_{k-1} (n>=3)
    c_cur = np.ones(N)

    rows = []
    k0 = 0
    for k in range(K + 1):
        if k == 0:
            vals = np.ones(N)
        else:
            if k == 1:
                c_new = s.copy() if n == 2 else (n - 2.0) * s
            elif n == 2:
                c_new = 2.0 * s * c_cur - c_prev
            else:
                c_new = (2.0 * (k + lam - 1.0) * s * c_cur - (k + 2.0 * lam - 2.0) * c_prev) / k
            c_prev, c_cur = c_cur, c_new
            if n == 2:
                vals = 2.0 * c_cur
            else:
                vals = ((2.0 * k + n - 2.0) / (n - 2.0)) * c_cur
        rows.append(vals)
        if len(rows) == block_size or k == K:
            yield k0, np.vstack(rows)
            k0 = k + 1
            rows = []


@lru_cache(maxsize=64)
def _jacobi_rule(npoints: int, alpha: float) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Jacobi nodes/weights on [-1, 1] for weight (1-x)^alpha."""
    x, w = roots_jacobi(npoints, alpha, 0.0)
    return x, w


@lru_cache(maxsize=512)
def _tail_moments(a: float, alpha: float, n: int, K: int) -> np.ndarray:
    """Integrals over [a, 1] of (1-rho^2)^alpha rho^(2k+n-1), k = 0..K.

    The (1-rho)^alpha factor is absorbed into a Gauss-Jacobi weight, so the
    remaining integrand is a polynomial times the analytic (1+rho)^alpha and
    the rule of order K + n/2 + 12 is exact to machine precision.  Powers
    accumulate by repeated multiplication (a K x K power matrix would
    dominate the cost of every kernel splitting).  Cached: callers must not
    mutate the returned array.
    """
    npoints = max(64, K + n // 2 + 12)
    x, w = _jacobi_rule(npoints, alpha)
    half_len = 0.5 * (1.0 - a)
    rho = a + half_len * (x + 1.0)
    scale = half_len ** (alpha + 1.0)
    cur = scale * w * (1.0 + rho) ** alpha * rho ** (n - 1)
    rho2 = rho * rho
    out = np.empty(K + 1)
    out[0] = cur.sum()
    for k in range(1, K + 1):
        cur = cur * rho2
        out[k] = cur.sum()
    return out


def radial_moment_vector(K: int, alpha: float, n: int, intervals: IntervalSet) -> np.ndarray:
    """Moments for all degrees 0..K over the interval set at once.

    Each interval contributes as a difference of two tail integrals [a, 1]
    and [b, 1]; the difference form keeps the absolute error of every
    coefficient multiplier below machine epsilon even at high degree.
    """
    if alpha <= -1.0:
        raise ValueError(f"radial moment requires alpha > -1, got {alpha}")
    out = np.zeros(K + 1)
    for a, b in intervals.intervals:
        if not (0.0 <= a < b <= 1.0):
            raise ValueError(f"interval [{a}, {b}) outside [0, 1]")
        out += _tail_moments(float(a), float(alpha), int(n), int(K))
        if b < _ONE_CLIP:
            out -= _tail_moments(float(b), float(alpha), int(n), int(K))
    return out


def radial_moment(k: int, alpha: float, n: int, intervals: IntervalSet) -> float:
    """Integral of (1-rho^2)^alpha rho^(2k+n-1) over the interval set."""
    if k < 0:
        raise ValueError("degree must be >= 0")
    return float(radial_moment_vector(k, alpha, n, intervals)[k])
