"""Quadrature on the sphere, the radius [0, 1), and the ball.

Sphere integrals of zonal integrands reduce to one dimension in the cosine
variable: the circle uses midpoint sampling in the angle (spectrally exact
for trigonometric polynomials), higher dimensions use Gauss-Jacobi with the
weight (1-s^2)^((n-3)/2).  Radial integrals run on a boundary-clustered
dyadic grid: annulus j is [1-2^-j, 1-2^-(j+1)) with a fixed Gauss rule per
annulus, plus a Gauss-Jacobi treatment of the final sliver so that weights
(1-r)^gamma with gamma near -1 still integrate to full accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence, Tuple

import numpy as np
from scipy.special import roots_jacobi

__all__ = [
    "SphereRule",
    "RadialGrid",
    "RadialIntegralResult",
    "sphere_rule",
    "sphere_integral",
    "radial_grid",
    "radial_integral",
    "ball_integral_from_means",
    "graded_edges",
    "product_sphere_nodes",
]


@dataclass(frozen=True)
class SphereRule:
    """Nodes s_i in [-1, 1] and positive weights summing to exactly 1.

    Integrates zonal harmonics of degree up to ``degree`` exactly: to 1 for
    degree 0 and to 0 for every higher degree.
    """

    n: int
    nodes: np.ndarray
    weights: np.ndarray
    degree: int

    def integrate(self, values: np.ndarray) -> float:
        # compensated summation: single-section integrands can be large and
        # sharply peaked while the integral is order one
        return math.fsum(self.weights * np.asarray(values, dtype=float))


@lru_cache(maxsize=128)
def _sphere_rule_cached(n: int, degree: int) -> Tuple[np.ndarray, np.ndarray]:
    if degree < 1:
        raise ValueError("rule degree must be >= 1")
    npoints = degree // 2 + 1
    if n == 2:
        theta = (np.arange(npoints) + 0.5) * math.pi / npoints
        nodes = np.cos(theta)[::-1].copy()
        weights = np.full(npoints, 1.0 / npoints)
    else:
        a = 0.5 * (n - 3)
        nodes, weights = roots_jacobi(npoints, a, a)
        weights = weights / weights.sum()
    return nodes, weights


def sphere_rule(n: int, degree: int) -> SphereRule:
    nodes, weights = _sphere_rule_cached(n, degree)
    return SphereRule(n=n, nodes=nodes, weights=weights, degree=degree)


def sphere_integral(g: Callable[[np.ndarray], np.ndarray], n: int, degree: int) -> float:
    """Probability-measure integral over the sphere of g(<x', pole>)."""
    rule = sphere_rule(n, degree)
    return rule.integrate(np.asarray(g(rule.nodes), dtype=float))


def product_sphere_nodes(n: int, degree: int) -> Tuple[np.ndarray, np.ndarray]:
    """Full product rule on the sphere (points as vectors, weights sum to 1).

    Needed only when the integrand is not zonal (e.g. kernels with different
    poles multiplied together); implemented for n = 2 and n = 3.
    """
    if n == 2:
        m = degree + 1
        theta = 2.0 * math.pi * (np.arange(m) + 0.5) / m
        pts = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        w = np.full(m, 1.0 / m)
        return pts, w
    if n == 3:
        nt = degree // 2 + 1
        t, wt = np.polynomial.legendre.leggauss(nt)
        npng = degree + 1
        phi = 2.0 * math.pi * (np.arange(npng) + 0.5) / npng
        st = np.sqrt(1.0 - t**2)
        pts = np.empty((nt * npng, 3))
        pts[:, 0] = np.repeat(t, npng)
        pts[:, 1] = np.repeat(st, npng) * np.tile(np.cos(phi), nt)
        pts[:, 2] = np.repeat(st, npng) * np.tile(np.sin(phi), nt)
        w = np.repeat(wt, npng) / (2.0 * npng)
        return pts, w / w.sum()
    raise ValueError("product sphere rule implemented for n = 2, 3 only")


@dataclass(frozen=True)
class RadialGrid:
    """Dyadic-annulus grid on [0, 1) with M Gauss-Legendre nodes per annulus.

    ``one_minus_nodes`` stores 1 - r computed in annulus-local arithmetic;
    at level 40 the naive difference 1.0 - r would lose four decimal digits,
    which is fatal for weights like (1-r)^gamma.
    """

    levels: int
    points_per_annulus: int
    nodes: np.ndarray = field(repr=False)
    one_minus_nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    annulus_of_node: np.ndarray = field(repr=False)

    @property
    def boundaries(self) -> np.ndarray:
        """Annulus edges 1 - 2^-j, j = 0..levels."""
        return 1.0 - 0.5 ** np.arange(self.levels + 1, dtype=float)

    def annulus_slice(self, j: int) -> slice:
        m = self.points_per_annulus
        return slice(j * m, (j + 1) * m)

    def refine(self) -> "RadialGrid":
        """One refinement step: double the per-annulus rule and add a level."""
        return radial_grid(self.levels + 1, 2 * self.points_per_annulus)


@lru_cache(maxsize=32)
def _gl_rule(m: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(m)
    return x, w


def radial_grid(levels: int = 40, points_per_annulus: int = 8) -> RadialGrid:
    if levels < 1 or points_per_annulus < 1:
        raise ValueError("grid needs at least one level and one point per annulus")
    x, w = _gl_rule(points_per_annulus)
    nodes = []
    one_minus = []
    weights = []
    annulus = []
    for j in range(levels):
        scale = 0.5**j
        # r = 1 - scale * (1 - (x+1)/4), so 1 - r is exact in local arithmetic
        local = 1.0 - 0.25 * (x + 1.0)
        one_minus.append(scale * local)
        nodes.append(1.0 - scale * local)
        weights.append(0.25 * scale * w)
        annulus.append(np.full(points_per_annulus, j))
    return RadialGrid(
        levels=levels,
        points_per_annulus=points_per_annulus,
        nodes=np.concatenate(nodes),
        one_minus_nodes=np.concatenate(one_minus),
        weights=np.concatenate(weights),
        annulus_of_node=np.concatenate(annulus),
    )


@dataclass
class RadialIntegralResult:
    value: float
    annulus_sums: np.ndarray
    tail: float
    divergent: bool

    def __float__(self) -> float:
        return self.value


def radial_integral(
    h: Callable[[np.ndarray], np.ndarray],
    gamma: float,
    grid: RadialGrid,
    tail_points: int = 24,
) -> RadialIntegralResult:
    """Integral of h(r) (1-r)^gamma dr over [0, 1) on the dyadic grid.

    The weight is smooth inside every annulus and is folded into the
    integrand there; the final sliver [1-2^-J, 1) gets a Gauss-Jacobi rule
    with the exact weight (reported separately as ``tail``).  For
    gamma <= -1 the integral can only be finite when h vanishes near 1; if
    it does not, the result is flagged divergent with value +inf.
    """
    vals = np.asarray(h(grid.nodes), dtype=float)
    contrib = grid.weights * vals * grid.one_minus_nodes**gamma
    m = grid.points_per_annulus
    annulus_sums = contrib.reshape(grid.levels, m).sum(axis=1)

    last_width = 0.5**grid.levels
    r_last = 1.0 - last_width
    if gamma <= -1.0:
        probe = np.asarray(h(np.array([r_last, 0.5 * (1.0 + r_last)])), dtype=float)
        if np.max(np.abs(probe)) > 1e-300:
            return RadialIntegralResult(math.inf, annulus_sums, math.inf, True)
        tail = 0.0
    else:
        x, w = _jacobi01(tail_points, gamma)
        rho = 1.0 - last_width * x
        tail = float(last_width ** (gamma + 1.0) * (w @ np.asarray(h(rho), dtype=float)))
    return RadialIntegralResult(float(annulus_sums.sum() + tail), annulus_sums, tail, False)


@lru_cache(maxsize=64)
def _jacobi01(npoints: int, gamma: float) -> Tuple[np.ndarray, np.ndarray]:
    """Rule for integral over [0, 1] of x^gamma f(x) dx: returns (x, w)."""
    t, w = roots_jacobi(npoints, gamma, 0.0)
    x = 0.5 * (1.0 - t)
    scale = 0.5 ** (gamma + 1.0)
    return x, scale * w


def ball_integral_from_means(
    sphere_means: Callable[[float], float],
    n: int,
    alpha: float,
    r_max: float,
    max_panels: int = 60,
    points: int = 24,
) -> float:
    """Integral over the ball |w| <= r_max of a rotation-averaged integrand.

    ``sphere_means(r)`` must return the spherical mean at radius r of the
    integrand (e.g. the mean of |f|^p); the ball measure is r^(n-1) dr dsigma
    with total ball mass 1/n.  Panels are graded toward r_max so that the
    (1-r)^alpha factor stays resolved as r_max -> 1.
    """
    if alpha <= -1.0:
        raise ValueError("ball weight requires alpha > -1")
    if not (0.0 <= r_max < 1.0):
        raise ValueError("r_max must lie in [0, 1)")
    if r_max == 0.0:
        return 0.0
    edges = graded_edges(0.0, r_max, max_panels)
    x, w = _gl_rule(points)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        r = lo + half * (x + 1.0)
        vals = np.array([sphere_means(float(ri)) for ri in r])
        total += half * float(w @ (vals * (1.0 - r) ** alpha * r ** (n - 1)))
    return total


def graded_edges(a: float, b: float, max_panels: int = 60) -> np.ndarray:
    """Panel edges on [a, b] with lengths shrinking toward b like 1 - b.

    Guarantees every panel is at least as far from the weight singularity at
    r = 1 as it is long, which makes fixed-order Gauss rules uniformly
    accurate for integrands analytic on [a, 1).
    """
    if not a < b:
        raise ValueError("need a < b")
    edges = [b]
    e = b
    while e > a and len(edges) <= max_panels:
        e = max(a, e - max(1.0 - e, 1e-15))
        edges.append(e)
    edges[-1] = a
    return np.array(edges[::-1])
