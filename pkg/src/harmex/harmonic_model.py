"""Harmonic functions on the unit ball as degree-indexed zonal expansions.

A function f(r x') = sum_k a_k r^k Z_k(<x', pole>) is stored as its
coefficient vector plus a pole direction.  Every test function used by the
distance experiments (Poisson kernel, reproducing kernels, fractional
derivatives of these, random decaying expansions) lives in this class, in
every dimension n >= 2; rotation-averaged norms never see more than the
coefficients, and general finite expansions about several poles are sums of
these objects.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .special_fn import (
    frac_deriv_multipliers,
    harmonic_space_dim,
    kernel_coefficient,
    kernel_coefficients,
    zonal_blocks,
    zonal_values_upto,
)

__all__ = [
    "ZonalExpansion",
    "TestFunctionSpec",
    "evaluate",
    "evaluate_grid",
    "evaluate_grid_multi",
    "fractional_derivative",
    "bergman_kernel",
    "poisson_expansion",
    "p_alpha_expansion",
    "truncation_degree",
    "poisson_closed_form",
]

_MATMUL_BLOCK = 256


@dataclass(frozen=True)
class ZonalExpansion:
    """f(r x') = sum_{k<=K} coeffs[k] r^k Z_k(<x', pole>), harmonic on the ball."""

    n: int
    coeffs: np.ndarray
    pole: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("dimension must be >= 2")
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.ndim != 1 or coeffs.size == 0:
            raise ValueError("coefficients must form a nonempty 1-d array")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coeffs", coeffs)
        pole = self.pole
        if pole is None:
            pole = np.zeros(self.n)
            pole[0] = 1.0
        else:
            pole = np.asarray(pole, dtype=float)
            if pole.shape != (self.n,):
                raise ValueError(f"pole must be a vector in R^{self.n}")
            if abs(np.linalg.norm(pole) - 1.0) > 1e-14:
                raise ValueError("pole must be a unit vector (|pole| = 1 within 1e-14)")
        object.__setattr__(self, "pole", pole)

    @property
    def K(self) -> int:
        return self.coeffs.size - 1

    def scaled(self, factors: np.ndarray) -> "ZonalExpansion":
        return ZonalExpansion(self.n, self.coeffs * factors, self.pole)

    def __add__(self, other: "ZonalExpansion") -> "ZonalExpansion":
        if self.n != other.n or not np.allclose(self.pole, other.pole):
            raise ValueError("can only add expansions with matching dimension and pole")
        K = max(self.K, other.K)
        c = np.zeros(K + 1)
        c[: self.K + 1] += self.coeffs
        c[: other.K + 1] += other.coeffs
        return ZonalExpansion(self.n, c, self.pole)


def evaluate(f: ZonalExpansion, r: float, s: float) -> float:
    """Pointwise value at radius r and cosine s, summed in ascending degree."""
    if not (0.0 <= r < 1.0):
        raise ValueError(f"radius must lie in [0, 1), got {r}")
    Z = zonal_values_upto(f.K, f.n, s)[:, 0]
    total = 0.0
    rk = 1.0
    for k in range(f.K + 1):
        total += f.coeffs[k] * rk * Z[k]
        rk *= r
    return total


def evaluate_grid(f: ZonalExpansion, radii: np.ndarray, cosines: np.ndarray) -> np.ndarray:
    """Value matrix F[i, j] = f(radii[i], cosines[j]) via blocked matmuls.

    This is the workhorse behind every profile computation; cost is
    O(len(radii) * K * len(cosines)) flops in BLAS-sized chunks.
    """
    return evaluate_grid_multi(f.n, f.coeffs[None, :], radii, cosines)[0]


def evaluate_grid_multi(
    n: int,
    coeff_rows: np.ndarray,
    radii: np.ndarray,
    cosines: np.ndarray,
) -> np.ndarray:
    """Value tensor F[m, i, j] for several coefficient vectors at once.

    Shares one zonal recurrence pass across all rows, which is what makes
    sweeps over many kernel splittings of the same function affordable.
    Trailing all-zero coefficient columns are skipped row-wise.
    """
    coeff_rows = np.atleast_2d(np.asarray(coeff_rows, dtype=float))
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    cosines = np.atleast_1d(np.asarray(cosines, dtype=float))
    if np.any(radii < 0.0) or np.any(radii >= 1.0):
        raise ValueError("radii must lie in [0, 1)")
    m, K1 = coeff_rows.shape
    nonzero = np.nonzero(np.any(coeff_rows != 0.0, axis=0))[0]
    K_eff = int(nonzero[-1]) if nonzero.size else 0
    out = np.zeros((m, radii.size, cosines.size))
    log_r = np.log(np.maximum(radii, 1e-300))
    for k0, block in zonal_blocks(K_eff, n, cosines, block_size=_MATMUL_BLOCK):
        ks = np.arange(k0, k0 + block.shape[0])
        powers = np.exp(np.outer(log_r, ks))
        if k0 == 0:
            powers[:, 0] = 1.0
        for row in range(m):
            active = coeff_rows[row, ks]
            if np.any(active != 0.0):
                out[row] += (powers * active[None, :]) @ block
    return out


def fractional_derivative(f: ZonalExpansion, t: float) -> ZonalExpansion:
    """Order-t radial derivative: degree-k coefficient scaled by the Gamma ratio."""
    return f.scaled(frac_deriv_multipliers(f.K, t, f.n))


def poisson_expansion(n: int, K: int, pole: Optional[np.ndarray] = None) -> ZonalExpansion:
    """Poisson kernel section P(., y') with y' = pole: all coefficients 1."""
    return ZonalExpansion(n, np.ones(K + 1), pole)


def p_alpha_expansion(n: int, alpha: float, K: int, pole: Optional[np.ndarray] = None) -> ZonalExpansion:
    """Derivative kernel: order (alpha - 1) radial derivative of the Poisson kernel."""
    return fractional_derivative(poisson_expansion(n, K, pole), alpha - 1.0)


def bergman_kernel(
    n: int,
    alpha: float,
    y: np.ndarray,
    K: int,
) -> ZonalExpansion:
    """Weighted reproducing kernel section x -> Q_alpha(x, y), |y| <= 1.

    The pole is y/|y| (any direction for y = 0); |y| = 1 is allowed because
    all evaluations happen at radius r |y| < 1, which the caller guarantees.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (n,):
        raise ValueError(f"y must be a point of R^{n}")
    rho0 = float(np.linalg.norm(y))
    if rho0 > 1.0 + 1e-14:
        raise ValueError("kernel pole must lie in the closed ball")
    rho0 = min(rho0, 1.0)
    pole = y / rho0 if rho0 > 0.0 else None
    coeffs = kernel_coefficients(K, alpha, n) * rho0 ** np.arange(K + 1)
    return ZonalExpansion(n, coeffs, pole)


def truncation_degree(n: int, alpha: float, rho_max: float, tol: float) -> int:
    """Smallest K with the dominated tail sum of the order-alpha kernel < tol.

    Bounds |Z_k| by the space dimension alpha_k, so the tail of the series at
    radius product rho_max is below sum_{k>K} c_k alpha_k rho_max^k, which is
    estimated geometrically once the term ratio falls below 1.
    """
    if not (0.0 <= rho_max < 1.0):
        raise ValueError("series truncation needs rho_max in [0, 1)")
    if tol <= 0.0:
        raise ValueError("tolerance must be positive")
    if rho_max == 0.0:
        return 0

    def term(k: int) -> float:
        return kernel_coefficient(k, alpha, n) * harmonic_space_dim(k, n) * rho_max**k

    def ratio(k: int) -> float:
        # term(k)/term(k-1); decreasing in k with limit rho_max
        c = (alpha + k + 0.5 * n) / (k - 1 + 0.5 * n)
        d = harmonic_space_dim(k, n) / harmonic_space_dim(k - 1, n)
        return rho_max * c * d

    def tail_bound(K: int) -> float:
        # explicit terms until the ratio drops below 1, then geometric remainder
        total = 0.0
        k = K + 1
        while True:
            q = ratio(k + 1)
            if q < 1.0:
                return total + term(k) / (1.0 - q)
            total += term(k)
            k += 1
            if k - K > 10_000_000:
                raise RuntimeError("truncation tail bound did not converge")

    K = 0
    while tail_bound(K) >= tol:
        K += 1
        if K > 10_000_000:
            raise RuntimeError("truncation degree search did not converge")
    return K


def poisson_closed_form(n: int, r, s):
    """(1 - r^2) / |x - y'|^n with |x| = r and s the cosine between x and y'."""
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    return (1.0 - r**2) / (1.0 - 2.0 * r * s + r**2) ** (0.5 * n)


_KINDS = ("poisson", "q_kernel", "p_alpha", "polynomial", "random")


@dataclass(frozen=True)
class TestFunctionSpec:
    """Declarative description of a corpus member, JSON round-trippable."""

    kind: str
    n: int
    K: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown test function kind {self.kind!r}; choose from {_KINDS}")
        if self.n < 2:
            raise ValueError("dimension must be >= 2")
        if self.K < 0:
            raise ValueError("truncation degree must be >= 0")
        if self.kind == "q_kernel":
            beta = self.params.get("beta")
            rho0 = self.params.get("rho0", 1.0)
            if beta is None or beta <= -1.0:
                raise ValueError("q_kernel requires beta > -1")
            if not (0.0 < rho0 <= 1.0):
                raise ValueError("q_kernel requires 0 < rho0 <= 1")
        if self.kind == "p_alpha" and "alpha" not in self.params:
            raise ValueError("p_alpha requires an alpha parameter")
        if self.kind == "polynomial" and not self.params.get("coeffs"):
            raise ValueError("polynomial requires a nonempty coefficient list")
        if self.kind == "random" and "seed" not in self.params:
            raise ValueError("random test functions require an explicit seed")

    def label(self) -> str:
        inner = ",".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.kind}({inner})[n={self.n},K={self.K}]"

    def to_expansion(self) -> ZonalExpansion:
        if self.kind == "poisson":
            return poisson_expansion(self.n, self.K)
        if self.kind == "q_kernel":
            beta = float(self.params["beta"])
            rho0 = float(self.params.get("rho0", 1.0))
            y = np.zeros(self.n)
            y[0] = rho0
            return bergman_kernel(self.n, beta, y, self.K)
        if self.kind == "p_alpha":
            return p_alpha_expansion(self.n, float(self.params["alpha"]), self.K)
        if self.kind == "polynomial":
            coeffs = np.asarray(self.params["coeffs"], dtype=float)
            padded = np.zeros(self.K + 1)
            padded[: coeffs.size] = coeffs[: self.K + 1]
            return ZonalExpansion(self.n, padded)
        if self.kind == "random":
            rng = np.random.default_rng(int(self.params["seed"]))
            decay = float(self.params.get("decay", 2.0))
            coeffs = rng.standard_normal(self.K + 1) * (np.arange(self.K + 1) + 1.0) ** (-decay)
            return ZonalExpansion(self.n, coeffs)
        raise AssertionError("unreachable")

    def to_json(self) -> str:
        return json.dumps(
            {"kind": self.kind, "n": self.n, "K": self.K, "params": self.params},
            sort_keys=True,
        )

    @staticmethod
    def from_json(text: str) -> "TestFunctionSpec":
        obj = json.loads(text)
        return TestFunctionSpec(
            kind=obj["kind"], n=int(obj["n"]), K=int(obj["K"]), params=dict(obj.get("params", {}))
        )
