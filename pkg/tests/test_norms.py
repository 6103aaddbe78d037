import math

import numpy as np
import pytest

from harmex.harmonic_model import (
    TestFunctionSpec,
    ZonalExpansion,
    poisson_expansion,
    truncation_degree,
)
from harmex.norms import (
    SpaceParams,
    ball_average_profile,
    ball_integral,
    integral_mean,
    mean_profile,
    space_norm,
)
from harmex.quadrature import radial_grid, sphere_rule
from harmex.verify import bruteforce_oracle_n2


class TestSpaceParams:
    def test_valid(self):
        SpaceParams("B_pq", p=0.5, q=1.0, alpha=2.0)
        SpaceParams("A_inf_alpha", alpha=0.0)
        SpaceParams("M_p_beta_alpha", p=1.0, alpha=-0.5, beta=0.1)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(family="B_pq", p=2.0, q=1.0, alpha=-2.0),
            dict(family="B_pq", p=2.0, q=0.5, alpha=1.0),
            dict(family="B_pq", p=0.0, q=1.0, alpha=1.0),
            dict(family="A_p_alpha", p=1.0, alpha=-0.1),
            dict(family="M_beta_alpha", alpha=-1.5, beta=1.0),
            dict(family="M_beta_alpha", alpha=0.0, beta=0.0),
            dict(family="B_pq", p=1.0, q=1.0, alpha=1.0, t=-0.5),
            dict(family="nonsense", p=1.0),
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            SpaceParams(**kwargs)


class TestIntegralMean:
    def test_constant_all_exponents(self):
        f = ZonalExpansion(3, np.array([-2.5]))
        for p in (0.5, 1.0, 2.0, math.inf):
            assert integral_mean(f, p, 0.4) == pytest.approx(2.5, abs=1e-12)

    def test_poisson_unit_mean(self):
        for n in (2, 3):
            K = truncation_degree(n, 0.0, 0.8, 1e-13)
            f = poisson_expansion(n, K)
            for r in (0.1, 0.45, 0.75):
                assert integral_mean(f, 1.0, r) == pytest.approx(1.0, abs=1e-11)

    def test_poisson_sup(self):
        for n in (2, 3):
            K = truncation_degree(n, 0.0, 0.8, 1e-13)
            f = poisson_expansion(n, K)
            for r in (0.3, 0.7):
                expected = (1 + r) / (1 - r) ** (n - 1)
                assert integral_mean(f, math.inf, r) == pytest.approx(expected, rel=1e-9)

    def test_matches_bruteforce_oracle(self):
        f = TestFunctionSpec("random", 2, 20, {"seed": 42, "decay": 1.0}).to_expansion()
        got = integral_mean(f, 1.0, 0.7)
        oracle = bruteforce_oracle_n2(f, "m1", 4096, r=0.7)
        assert got == pytest.approx(oracle, abs=2e-7)

    def test_monotone_in_radius(self, rng):
        # subharmonicity: p-means nondecreasing for p >= 1
        for n in (2, 3):
            f = ZonalExpansion(n, rng.standard_normal(15))
            for p in (1.0, 2.0):
                vals = [integral_mean(f, p, r) for r in np.linspace(0.02, 0.93, 24)]
                assert np.min(np.diff(vals)) > -1e-12

    def test_quasi_exponent(self):
        f = TestFunctionSpec("random", 2, 12, {"seed": 3, "decay": 1.0}).to_expansion()
        v = integral_mean(f, 0.5, 0.6)
        assert v > 0 and math.isfinite(v)

    def test_radius_validation(self):
        f = ZonalExpansion(2, np.array([1.0]))
        with pytest.raises(ValueError):
            integral_mean(f, 1.0, 1.0)
        with pytest.raises(ValueError):
            integral_mean(f, -0.5, 0.5)


class TestMeanProfile:
    def test_profile_matches_pointwise(self, grid24, rng):
        # a dense rule isolates the plumbing; the default matrix-path rule is
        # documented as percent-level on |f| sections
        f = ZonalExpansion(2, rng.standard_normal(10))
        rule = sphere_rule(2, 40000)
        prof = mean_profile(f, 1.0, grid24, rule)
        for i in (0, 40, 100):
            r = float(prof.radii[i])
            assert prof.values[i] == pytest.approx(integral_mean(f, 1.0, r), rel=1e-6)

    def test_sup_profile_includes_pole(self, grid24):
        # positive-coefficient expansions peak exactly at the pole
        f = ZonalExpansion(3, np.array([1.0, 1.0, 1.0, 1.0]))
        prof = mean_profile(f, math.inf, grid24)
        r = float(prof.radii[50])
        direct = sum(float(f.coeffs[k]) * r**k * (2 * k + 1) for k in range(4))
        assert prof.values[50] == pytest.approx(direct, rel=1e-12)


class TestSpaceNorm:
    def test_integral_family_constant(self, grid40):
        one = ZonalExpansion(2, np.array([1.0]))
        for p, q, alpha in [(0.5, 1.0, 0.5), (1.0, 2.0, 1.0), (2.0, 1.0, 2.0)]:
            res = space_norm(one, SpaceParams("B_pq", p=p, q=q, alpha=alpha), grid40)
            assert res.value == pytest.approx((alpha * p) ** (-1.0 / p), rel=1e-10)

    def test_sup_family_constant(self, grid40):
        one = ZonalExpansion(3, np.array([1.0]))
        for q, alpha in [(1.0, 0.5), (2.0, 2.0)]:
            res = space_norm(one, SpaceParams("B_inf_q", q=q, alpha=alpha), grid40)
            assert res.value == pytest.approx(1.0, abs=1e-12)

    def test_bergman_family_constant(self, grid40):
        from scipy.special import beta as beta_fn

        for n in (2, 3):
            one = ZonalExpansion(n, np.array([1.0]))
            res = space_norm(one, SpaceParams("A_p_alpha", p=1.0, alpha=1.5), grid40)
            assert res.value == pytest.approx(beta_fn(n, 2.5), rel=1e-12)

    def test_boundary_kernel_mean_profile_two_sided(self, grid24):
        # the weighted L1 mean profile of the boundary kernel stays bounded
        # above and below through the last annuli, and the sup-type norm in
        # that family is finite
        alpha = 1.0
        K = 4864
        spec = TestFunctionSpec("q_kernel", 2, K, {"beta": alpha - 1.0, "rho0": 1.0})
        f = spec.to_expansion()
        grid = radial_grid(8, 6)
        rule = sphere_rule(2, 3 * K + 64)
        prof = mean_profile(f, 1.0, grid, rule)
        weighted = prof.one_minus**alpha * prof.values
        tail = weighted[grid.nodes >= 1 - 2.0**-4]
        assert np.min(tail) > 0.3 * np.max(weighted)
        res = space_norm(f, SpaceParams("B_inf_q", q=1.0, alpha=alpha), grid, rule)
        assert math.isfinite(res.value) and res.value > 0

    def test_sup_norm_divergence_flag(self):
        # the same kernel is NOT in the weighted sup space: its sup grows
        # like (1-r)^(1-n-alpha), and the norm must come back flagged
        alpha = 1.0
        K = 4864
        f = TestFunctionSpec("q_kernel", 2, K, {"beta": alpha - 1.0, "rho0": 1.0}).to_expansion()
        grid = radial_grid(8, 6)
        rule = sphere_rule(2, 3 * K + 64)
        res = space_norm(f, SpaceParams("A_inf_alpha", alpha=alpha), grid, rule)
        assert res.divergent and res.value == math.inf

    def test_integral_divergence_flag(self):
        alpha = 1.0
        K = 4864
        f = TestFunctionSpec("q_kernel", 2, K, {"beta": alpha - 1.0, "rho0": 1.0}).to_expansion()
        grid = radial_grid(8, 6)
        rule = sphere_rule(2, 3 * K + 64)
        # B^{p,1}_alpha integral of this kernel diverges (log blow-up)
        res = space_norm(f, SpaceParams("B_pq", p=1.0, q=1.0, alpha=alpha), grid, rule)
        assert res.divergent

    def test_embedding_inequality_spot(self, grid24, rng):
        f = ZonalExpansion(2, rng.standard_normal(8))
        for p, q, alpha in [(0.5, 1.0, 1.0), (2.0, 2.0, 0.5)]:
            sup_norm = space_norm(f, SpaceParams("B_inf_q", q=q, alpha=alpha), grid24).value
            int_norm = space_norm(f, SpaceParams("B_pq", p=p, q=q, alpha=alpha), grid24).value
            assert sup_norm**p <= alpha * p * int_norm**p + 1e-10


class TestBallAverages:
    def test_zero_function(self, grid24):
        f = ZonalExpansion(2, np.array([0.0]))
        prof = ball_average_profile(f, 0.5, grid24)
        assert np.all(prof.values == 0.0)

    def test_constant_disk_analytic(self, grid24):
        f = ZonalExpansion(2, np.array([1.0]))
        prof = ball_average_profile(f, 0.0, grid24)
        assert np.max(np.abs(prof.values - prof.radii**2 / 2.0)) < 1e-12

    def test_nondecreasing(self, grid24, rng):
        f = ZonalExpansion(2, rng.standard_normal(7))
        prof = ball_average_profile(f, 1.0, grid24)
        assert np.min(np.diff(prof.values)) >= -1e-15

    def test_poisson_matches_bruteforce(self):
        K = truncation_degree(2, 0.0, 0.95, 1e-12)
        f = poisson_expansion(2, K)
        grid = radial_grid(6, 4)
        prof = ball_average_profile(f, 1.0, grid)
        i = 12
        r = float(prof.radii[i])
        oracle = bruteforce_oracle_n2(f, "ball_average", 2048, alpha=1.0, r=r)
        assert prof.values[i] == pytest.approx(oracle, abs=1e-8)

    def test_ball_integral_cases(self):
        one = ZonalExpansion(2, np.array([1.0]))
        assert ball_integral(one, 1.0, 0.0, 0.0) == 0.0
        got = ball_integral(one, 1.0, 0.0, 0.9)
        assert got == pytest.approx(0.9**2 / 2.0, rel=1e-12)
        c = ZonalExpansion(2, np.array([-3.0]))
        assert ball_integral(c, 2.0, 0.5, 0.7) == pytest.approx(
            9.0 * ball_integral(one, 2.0, 0.5, 0.7), rel=1e-12
        )

    def test_single_mode_orthogonality(self):
        # |a_k r^k Z_k|^2 integrates by orthogonality; brute-force 2-d oracle
        k, a = 3, 0.7
        f = ZonalExpansion(2, np.concatenate([np.zeros(k), [a]]))
        got = ball_integral(f, 2.0, 1.0, 0.8)
        # oracle: dense polar Riemann sums of |f|^2 (1-r) r dr dtheta / 2pi
        m = 4096
        theta = math.pi * (np.arange(m) + 0.5) / m
        vals2 = None
        total = 0.0
        r = 0.8 * (np.arange(m) + 0.5) / m
        from harmex.harmonic_model import evaluate_grid

        F = evaluate_grid(f, r, np.cos(theta))
        m2 = (F**2).mean(axis=1)
        total = 0.8 / m * float(np.sum(m2 * (1 - r) * r))
        assert got == pytest.approx(total, abs=1e-9)
