"""Integral means, mixed-norm functionals, and ball-average profiles.

Two evaluation regimes coexist:

* small truncation degrees (norm checks, embedding sweeps) use kink-splitting
  quadrature for spherical p-means: the zonal section is sampled, its sign
  changes are located by bisection, and each sign-constant panel gets a Gauss
  rule carrying the |f|^p endpoint exponent.  This keeps means of |f| at full
  accuracy, which the monotonicity and embedding tolerances require.
* large-degree kernel profiles (distance experiments) go through one blocked
  matrix evaluation per profile and a fixed sphere rule; the resulting few
  tenths of a percent at the deepest annuli are far inside the bracket
  tolerances of the level-set diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import roots_jacobi

from .harmonic_model import ZonalExpansion, evaluate_grid
from .quadrature import (
    RadialGrid,
    SphereRule,
    graded_edges,
    radial_grid,
    radial_integral,
    sphere_rule,
)

__all__ = [
    "SpaceParams",
    "RadialProfile",
    "NormResult",
    "integral_mean",
    "mean_profile",
    "space_norm",
    "ball_average_profile",
    "ball_integral",
    "profile_grows",
    "default_sphere_rule",
]

_FAMILIES = (
    "A_p_alpha",
    "A_inf_alpha",
    "B_pq",
    "B_inf_q",
    "B_p_inf",
    "M_beta_alpha",
    "M_p_beta_alpha",
)

_EXACT_MEAN_MAX_DEGREE = 200


@dataclass(frozen=True)
class SpaceParams:
    """Selects one norm family and its exponents, with the paper's ranges."""

    family: str
    p: Optional[float] = None
    q: Optional[float] = None
    alpha: Optional[float] = None
    beta: Optional[float] = None
    t: Optional[float] = None

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown norm family {self.family!r}; choose from {_FAMILIES}")
        f = self.family
        if f == "A_p_alpha":
            self._need("p", lambda v: 0.0 < v < math.inf, "p in (0, inf)")
            self._need("alpha", lambda v: v >= 0.0, "alpha >= 0")
        elif f == "A_inf_alpha":
            self._need("alpha", lambda v: v >= 0.0, "alpha >= 0")
        elif f in ("B_pq", "B_p_inf"):
            self._need("p", lambda v: 0.0 < v < math.inf, "p in (0, inf)")
            self._need("alpha", lambda v: v > 0.0, "alpha > 0")
            if f == "B_pq":
                self._need("q", lambda v: 1.0 <= v < math.inf, "q in [1, inf)")
        elif f == "B_inf_q":
            self._need("q", lambda v: 1.0 <= v < math.inf, "q in [1, inf)")
            self._need("alpha", lambda v: v > 0.0, "alpha > 0")
        elif f in ("M_beta_alpha", "M_p_beta_alpha"):
            self._need("alpha", lambda v: v > -1.0, "alpha > -1")
            self._need("beta", lambda v: v > 0.0, "beta > 0")
            if f == "M_p_beta_alpha":
                self._need("p", lambda v: 0.0 < v < math.inf, "p in (0, inf)")
        if self.t is not None and self.alpha is not None and self.t <= self.alpha - 1.0:
            raise ValueError(f"auxiliary order must satisfy t > alpha - 1, got t={self.t}, alpha={self.alpha}")

    def _need(self, name: str, ok: Callable[[float], bool], desc: str):
        v = getattr(self, name)
        if v is None or not ok(v):
            raise ValueError(f"family {self.family} requires {desc}, got {name}={v}")


@dataclass
class RadialProfile:
    """Nonnegative profile values g(r) on an increasing radius grid.

    ``one_minus`` carries 1 - r at full precision (the radii cluster at 1).
    """

    radii: np.ndarray
    one_minus: np.ndarray
    values: np.ndarray
    grid: Optional[RadialGrid] = None
    label: str = ""

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if np.any(~np.isfinite(v)) or np.any(v < 0.0):
            raise ValueError("profile values must be finite and nonnegative")

    def max_value(self) -> float:
        return float(np.max(self.values)) if self.values.size else 0.0


@dataclass
class NormResult:
    value: float
    divergent: bool = False
    annulus_sums: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __float__(self) -> float:
        return self.value

    def to_record(self, params: SpaceParams) -> dict:
        rec = {
            "family": params.family,
            "params": {
                k: v for k, v in vars(params).items() if k != "family" and v is not None
            },
            "value": "divergent" if self.divergent else self.value,
        }
        rec.update({f"grid_{k}": v for k, v in self.meta.items()})
        return rec


def default_sphere_rule(f: ZonalExpansion, oversample: int = 4) -> SphereRule:
    return sphere_rule(f.n, max(oversample * f.K + 64, 64))


# ---------------------------------------------------------------------------
# spherical p-means
# ---------------------------------------------------------------------------


def _section_chebyshev(f: ZonalExpansion, r: float) -> np.polynomial.chebyshev.Chebyshev:
    """Exact Chebyshev form of s -> f(r, s): every zonal section is a
    polynomial of degree K in the cosine, so interpolation is lossless."""
    deg = f.K + 2
    j = np.arange(deg + 1)
    nodes = np.cos(math.pi * (2 * j + 1) / (2 * (deg + 1)))
    vals = evaluate_grid(f, np.array([r]), nodes)[0]
    series = np.polynomial.chebyshev.Chebyshev.fit(nodes, vals, deg, domain=[-1.0, 1.0])
    return series


def _crossing_points(series, lo: float, hi: float) -> list[float]:
    """Strictly interior sign-change roots of a Chebyshev series."""
    roots = series.roots()
    real = sorted(float(z.real) for z in roots if abs(z.imag) < 1e-9 and lo < z.real < hi)
    out = []
    for z in real:
        if out and z - out[-1] < 1e-12:
            continue
        step = max(1e-9, 1e-9 * (hi - lo))
        left = float(series(max(lo, z - step)))
        right = float(series(min(hi, z + step)))
        if left * right < 0.0:
            out.append(z)
    return out


def _panel_rule(npoints: int, expo_lo: float, expo_hi: float):
    """Nodes/weights on [0, 1] for weight x^expo_lo (1-x)^expo_hi."""
    if expo_lo == 0.0 and expo_hi == 0.0:
        x, w = np.polynomial.legendre.leggauss(npoints)
        return 0.5 * (x + 1.0), 0.5 * w
    t, w = roots_jacobi(npoints, expo_hi, expo_lo)
    return 0.5 * (t + 1.0), w * 0.5 ** (expo_lo + expo_hi + 1.0)


def _split_mean(
    section: Callable[[np.ndarray], np.ndarray],
    weight: Callable[[np.ndarray], np.ndarray],
    crossings: Sequence[float],
    lo: float,
    hi: float,
    p: float,
    degree: int,
) -> float:
    """Integral of |section|^p * weight over [lo, hi], split at the zeros.

    On a panel with simple zeros at its endpoints, |section|^p carries the
    endpoint exponent p, which is folded into a Gauss-Jacobi weight so the
    remaining factor is smooth.  Panel rules are sized by the share of the
    section's polynomial degree that the panel covers.
    """
    edges = [lo] + list(crossings) + [hi]
    total = 0.0
    for i in range(len(edges) - 1):
        a, b = edges[i], edges[i + 1]
        if b - a < 1e-14:
            continue
        e_lo = p if i > 0 else 0.0
        e_hi = p if i < len(edges) - 2 else 0.0
        npts = min(420, max(24, int(0.75 * degree * (b - a) / (hi - lo)) + 16))
        x01, w01 = _panel_rule(npts, e_lo, e_hi)
        x = a + (b - a) * x01
        vals = np.abs(section(x))
        base = np.ones_like(x)
        if e_lo:
            base = base * (x - a)
        if e_hi:
            base = base * (b - x)
        # |f|^p = (|f| / base)^p * base^p; the second factor is the rule weight
        ratio = np.where(base > 0.0, vals / np.where(base > 0.0, base, 1.0), 0.0)
        total += (b - a) ** (1.0 + e_lo + e_hi) * float(w01 @ (ratio**p * weight(x)))
    return total


def _mean_p_exact(f: ZonalExpansion, p: float, r: float) -> float:
    """Zero-splitting p-mean for n in {2, 3}; near machine accuracy."""
    series = _section_chebyshev(f, r)
    zeros_s = _crossing_points(series, -1.0, 1.0)
    if f.n == 2:
        # theta variable on [0, pi], probability weight 1/pi
        crossings = sorted(math.acos(z) for z in zeros_s)
        val = _split_mean(
            lambda th: series(np.cos(th)),
            lambda th: np.full_like(th, 1.0 / math.pi),
            crossings, 0.0, math.pi, p, f.K,
        )
    elif f.n == 3:
        # cosine variable on [-1, 1], probability weight 1/2
        val = _split_mean(
            lambda s: series(s),
            lambda s: np.full_like(s, 0.5),
            zeros_s, -1.0, 1.0, p, f.K,
        )
    else:
        raise ValueError("exact means implemented for n in {2, 3}")
    return val ** (1.0 / p)


def _sup_on_section(f: ZonalExpansion, r: float, rule: SphereRule, zoom_rounds: int = 3) -> float:
    """Sup of |f(r, .)| over the sphere: dense scan plus local zoom refinement."""
    cands = np.concatenate([rule.nodes, [-1.0, 1.0]])
    vals = np.abs(evaluate_grid(f, np.array([r]), cands)[0])
    i = int(np.argmax(vals))
    best = float(vals[i])
    order = np.argsort(cands)
    sorted_c = cands[order]
    pos = int(np.searchsorted(sorted_c, cands[i]))
    lo = sorted_c[max(pos - 1, 0)]
    hi = sorted_c[min(pos + 1, sorted_c.size - 1)]
    for _ in range(zoom_rounds):
        grid = np.linspace(lo, hi, 17)
        v = np.abs(evaluate_grid(f, np.array([r]), grid)[0])
        j = int(np.argmax(v))
        best = max(best, float(v[j]))
        lo, hi = grid[max(j - 1, 0)], grid[min(j + 1, 16)]
    return best


def integral_mean(
    f: ZonalExpansion,
    p: float,
    r: float,
    rule: Optional[SphereRule] = None,
    exact: Optional[bool] = None,
) -> float:
    """Spherical p-mean M_p(f, r); p = inf gives the sup over the sphere."""
    if not (0.0 <= r < 1.0):
        raise ValueError("radius must lie in [0, 1)")
    if p == math.inf:
        return _sup_on_section(f, r, rule or default_sphere_rule(f))
    if p <= 0.0:
        raise ValueError("mean exponent must be positive")
    if exact is None:
        exact = f.K <= _EXACT_MEAN_MAX_DEGREE and f.n in (2, 3)
    if exact:
        return _mean_p_exact(f, p, r)
    rule = rule or default_sphere_rule(f)
    vals = np.abs(evaluate_grid(f, np.array([r]), rule.nodes)[0])
    return float(rule.weights @ vals**p) ** (1.0 / p)


def mean_profile(
    f: ZonalExpansion,
    p: float,
    grid: RadialGrid,
    rule: Optional[SphereRule] = None,
    field_values: Optional[np.ndarray] = None,
) -> RadialProfile:
    """M_p(f, r) at every grid node through one blocked matrix evaluation.

    ``field_values`` lets callers reuse a precomputed value matrix (e.g. to
    form means of f - f1 by subtracting matrices).
    """
    rule = rule or default_sphere_rule(f)
    if field_values is None:
        field_values = evaluate_grid(f, grid.nodes, rule.nodes)
    if p == math.inf:
        vals = np.abs(field_values).max(axis=1)
        vals = np.maximum(vals, np.abs(evaluate_grid(f, grid.nodes, np.array([-1.0, 1.0]))).max(axis=1))
    elif p == 1.0:
        vals = np.abs(field_values) @ rule.weights
    else:
        vals = (np.abs(field_values) ** p @ rule.weights) ** (1.0 / p)
    return RadialProfile(
        radii=grid.nodes,
        one_minus=grid.one_minus_nodes,
        values=vals,
        grid=grid,
        label=f"M_{p}",
    )


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------


def _golden_max(fun: Callable[[float], float], lo: float, hi: float, iters: int = 40) -> float:
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    fc, fd = fun(c), fun(d)
    best = max(fc, fd)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = fun(d)
        best = max(best, fc, fd)
    return best


def _sup_weighted(
    gfun: Callable[[float], float],
    grid: RadialGrid,
    node_values: np.ndarray,
    refine: bool = True,
) -> float:
    """Sup over r in [0, 1) of a continuous profile: grid max plus a
    golden-section pass in the bracketing interval (r = 0 included)."""
    radii = np.concatenate([[0.0], grid.nodes])
    values = np.concatenate([[gfun(0.0)], node_values])
    i = int(np.argmax(values))
    best = float(values[i])
    if not refine:
        return best
    lo = radii[max(i - 1, 0)]
    hi = radii[i + 1] if i + 1 < radii.size else min(1.0 - 1e-12, 1.0 - 0.5 * float(grid.one_minus_nodes[-1]))
    return max(best, _golden_max(gfun, lo, hi))


def _ratio_test(annulus_sums: np.ndarray, window: int = 5, threshold: float = 0.97) -> bool:
    """True when the last annulus contributions stop decaying geometrically."""
    tailv = annulus_sums[-(window + 1):]
    if np.all(tailv == 0.0):
        return False
    ratios = []
    for a, b in zip(tailv[:-1], tailv[1:]):
        if a > 0.0:
            ratios.append(b / a)
    return bool(ratios) and max(ratios) >= threshold


def profile_grows(profile: RadialProfile, tail_levels: int = 5) -> bool:
    """True when per-annulus profile maxima keep growing geometrically.

    Distinguishes functions outside a weighted sup space (persistent
    geometric growth of the weighted profile) from members approaching their
    boundary plateau from below, whose growth ratios decelerate.
    """
    if profile.grid is None:
        return False
    boundaries = profile.grid.boundaries
    maxima = []
    for j in range(profile.grid.levels):
        mask = (profile.radii >= boundaries[j]) & (profile.radii < boundaries[j + 1] + 1e-300)
        if np.any(mask):
            maxima.append(float(np.max(profile.values[mask])))
    maxima = np.array(maxima[-(tail_levels + 1):])
    if maxima.size < 3 or np.any(maxima <= 0.0):
        return False
    ratios = maxima[1:] / maxima[:-1]
    return bool(np.median(ratios) >= 1.2 and np.min(ratios) >= 1.1)


def space_norm(
    f: ZonalExpansion,
    params: SpaceParams,
    grid: Optional[RadialGrid] = None,
    rule: Optional[SphereRule] = None,
) -> NormResult:
    """The selected (quasi-)norm of a zonal expansion.

    Integral-type norms report per-annulus partial sums and come back flagged
    divergent (value inf, never an exception) when those sums stop decaying;
    sup-type norms refine the grid maximum by golden-section search.
    """
    grid = grid or radial_grid()
    rule = rule or default_sphere_rule(f)
    fam = params.family
    meta = {"levels": grid.levels, "points": grid.points_per_annulus, "sphere_degree": rule.degree}

    def mean_at(p):
        cache: dict[float, float] = {}

        def h(r_arr):
            out = np.empty_like(r_arr)
            for i, r in enumerate(np.atleast_1d(r_arr)):
                key = float(r)
                if key not in cache:
                    cache[key] = integral_mean(f, p, key, rule=rule)
                out[i] = cache[key]
            return out

        return h

    if fam == "A_p_alpha":
        h = mean_at(params.p)
        res = radial_integral(lambda r: h(r) ** params.p * r ** (f.n - 1), params.alpha, grid)
        return _integral_result(res, 1.0 / params.p, meta)
    if fam == "A_inf_alpha":
        def g(r):
            return (1.0 - r) ** params.alpha * integral_mean(f, math.inf, r, rule=rule)

        prof = mean_profile(f, math.inf, grid, rule)
        vals = prof.one_minus**params.alpha * prof.values
        weighted = RadialProfile(prof.radii, prof.one_minus, vals, grid=grid)
        if profile_grows(weighted):
            return NormResult(math.inf, divergent=True, meta=meta)
        return NormResult(_sup_weighted(g, grid, vals), meta=meta)
    if fam in ("B_pq", "B_p_inf"):
        qq = params.q if fam == "B_pq" else math.inf
        h = mean_at(qq)
        res = radial_integral(lambda r: h(r) ** params.p, params.alpha * params.p - 1.0, grid)
        return _integral_result(res, 1.0 / params.p, meta)
    if fam == "B_inf_q":
        def g(r):
            return (1.0 - r) ** params.alpha * integral_mean(f, params.q, r, rule=rule)

        prof = mean_profile(f, params.q, grid, rule)
        vals = prof.one_minus**params.alpha * prof.values
        weighted = RadialProfile(prof.radii, prof.one_minus, vals, grid=grid)
        if profile_grows(weighted):
            return NormResult(math.inf, divergent=True, meta=meta)
        return NormResult(_sup_weighted(g, grid, vals), meta=meta)
    if fam in ("M_beta_alpha", "M_p_beta_alpha"):
        ball = _cumulative_ball_average(f, params.alpha, grid, rule)
        if fam == "M_beta_alpha":
            def g(r):
                return (1.0 - r) ** params.beta * ball(r)

            vals = np.array([g(r) for r in grid.nodes])
            weighted = RadialProfile(grid.nodes, grid.one_minus_nodes, vals, grid=grid)
            if profile_grows(weighted):
                return NormResult(math.inf, divergent=True, meta=meta)
            return NormResult(_sup_weighted(g, grid, vals, refine=True), meta=meta)
        res = radial_integral(
            lambda r: np.array([ball(x) for x in np.atleast_1d(r)]) ** params.p,
            params.beta * params.p - 1.0,
            grid,
        )
        return _integral_result(res, 1.0 / params.p, meta)
    raise AssertionError("unreachable")


def _integral_result(res, invp: float, meta: dict) -> NormResult:
    if res.divergent or _ratio_test(res.annulus_sums):
        return NormResult(math.inf, divergent=True, annulus_sums=res.annulus_sums, meta=meta)
    return NormResult(res.value**invp, annulus_sums=res.annulus_sums, meta=meta)


# ---------------------------------------------------------------------------
# ball averages
# ---------------------------------------------------------------------------


def _cumulative_ball_average(
    f: ZonalExpansion,
    alpha: float,
    grid: RadialGrid,
    rule: SphereRule,
) -> Callable[[float], float]:
    """Returns r -> integral over |w| <= r of |f| (1-|w|)^alpha dw.

    Precomputes cumulative sums at graded checkpoints; each query integrates
    the remaining partial panel with a fresh Gauss rule, so values at
    arbitrary radii stay accurate.
    """
    mean_cache: dict[float, float] = {}

    def m1(r: float) -> float:
        if r not in mean_cache:
            mean_cache[r] = integral_mean(f, 1.0, r, rule=rule)
        return mean_cache[r]

    x24, w24 = np.polynomial.legendre.leggauss(24)

    def piece(a: float, b: float) -> float:
        if b - a < 1e-300:
            return 0.0
        edges = graded_edges(a, b) if 1.0 - b < 0.25 * (b - a) else np.array([a, b])
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            half = 0.5 * (hi - lo)
            r = lo + half * (x24 + 1.0)
            vals = np.array([m1(float(ri)) for ri in r])
            total += half * float(w24 @ (vals * (1.0 - r) ** alpha * r ** (f.n - 1)))
        return total

    checkpoints = np.concatenate([[0.0], grid.boundaries[1:]])
    cum = np.zeros(checkpoints.size)
    for i in range(1, checkpoints.size):
        cum[i] = cum[i - 1] + piece(checkpoints[i - 1], checkpoints[i])

    def A(r: float) -> float:
        if r <= 0.0:
            return 0.0
        i = int(np.searchsorted(checkpoints, r, side="right")) - 1
        i = min(i, checkpoints.size - 1)
        return float(cum[i] + piece(checkpoints[i], r))

    return A


def ball_average_profile(
    f: ZonalExpansion,
    alpha: float,
    grid: Optional[RadialGrid] = None,
    rule: Optional[SphereRule] = None,
) -> RadialProfile:
    """A_alpha(f, r) at every grid node; nondecreasing in r by construction."""
    if alpha <= -1.0:
        raise ValueError("ball average requires alpha > -1")
    grid = grid or radial_grid()
    rule = rule or default_sphere_rule(f)
    A = _cumulative_ball_average(f, alpha, grid, rule)
    vals = np.array([A(float(r)) for r in grid.nodes])
    return RadialProfile(
        radii=grid.nodes,
        one_minus=grid.one_minus_nodes,
        values=vals,
        grid=grid,
        label=f"A_{alpha}",
    )


def ball_integral(
    f: ZonalExpansion,
    p: float,
    alpha: float,
    r_max: float,
    rule: Optional[SphereRule] = None,
) -> float:
    """Integral over |w| <= r_max of |f(w)|^p (1-|w|)^alpha dw."""
    if alpha <= -1.0:
        raise ValueError("ball weight requires alpha > -1")
    if not (0.0 <= r_max < 1.0):
        raise ValueError("r_max must lie in [0, 1)")
    rule = rule or default_sphere_rule(f)
    if r_max == 0.0:
        return 0.0
    x24, w24 = np.polynomial.legendre.leggauss(24)
    edges = graded_edges(0.0, r_max)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        r = lo + half * (x24 + 1.0)
        vals = np.array([integral_mean(f, p, float(ri), rule=rule) ** p for ri in r])
        total += half * float(w24 @ (vals * (1.0 - r) ** alpha * r ** (f.n - 1)))
    return total
