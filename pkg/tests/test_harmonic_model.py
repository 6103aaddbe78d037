import json
import math

import numpy as np
import pytest

from harmex.harmonic_model import (
    TestFunctionSpec,
    ZonalExpansion,
    bergman_kernel,
    evaluate,
    evaluate_grid,
    evaluate_grid_multi,
    fractional_derivative,
    p_alpha_expansion,
    poisson_closed_form,
    poisson_expansion,
    truncation_degree,
)
from harmex.quadrature import sphere_rule
from harmex.special_fn import frac_deriv_multiplier, harmonic_space_dim, kernel_coefficient


class TestZonalExpansion:
    def test_constant(self):
        f = ZonalExpansion(3, np.array([4.25]))
        for r, s in [(0.0, 1.0), (0.5, -0.2), (0.99, 0.7)]:
            assert evaluate(f, r, s) == pytest.approx(4.25, abs=1e-14)

    def test_radius_domain(self):
        f = ZonalExpansion(2, np.array([1.0, 2.0]))
        with pytest.raises(ValueError):
            evaluate(f, 1.0, 0.5)
        with pytest.raises(ValueError):
            evaluate_grid(f, np.array([0.5, 1.01]), np.array([0.0]))

    def test_pole_validation(self):
        with pytest.raises(ValueError):
            ZonalExpansion(2, np.array([1.0]), pole=np.array([1.0, 1.0]))
        with pytest.raises(ValueError):
            ZonalExpansion(2, np.array([np.nan]))

    def test_addition(self):
        f = ZonalExpansion(2, np.array([1.0, 2.0]))
        g = ZonalExpansion(2, np.array([0.5, -1.0, 3.0]))
        h = f + g
        assert np.allclose(h.coeffs, [1.5, 1.0, 3.0])

    def test_grid_matches_scalar(self, rng):
        f = ZonalExpansion(3, rng.standard_normal(13))
        radii = np.array([0.0, 0.2, 0.77, 0.96])
        cosines = np.array([-1.0, -0.1, 0.5, 1.0])
        G = evaluate_grid(f, radii, cosines)
        for i, r in enumerate(radii):
            for j, s in enumerate(cosines):
                assert G[i, j] == pytest.approx(evaluate(f, float(r), float(s)), abs=1e-11)

    def test_multi_rows(self, rng):
        c1 = rng.standard_normal(9)
        c2 = np.zeros(9)
        c2[:3] = rng.standard_normal(3)
        out = evaluate_grid_multi(2, np.vstack([c1, c2]), np.array([0.3, 0.8]), np.array([0.1, -0.6]))
        f1, f2 = ZonalExpansion(2, c1), ZonalExpansion(2, c2)
        assert out[0][1, 1] == pytest.approx(evaluate(f1, 0.8, -0.6), abs=1e-12)
        assert out[1][0, 0] == pytest.approx(evaluate(f2, 0.3, 0.1), abs=1e-12)


class TestPoissonKernel:
    def test_disk_closed_form(self):
        K = truncation_degree(2, 0.0, 0.9, 1e-12)
        assert K >= 200
        f = poisson_expansion(2, K)
        rng = np.random.default_rng(0)
        for _ in range(50):
            r = float(rng.uniform(0.0, 0.9))
            theta = float(rng.uniform(0.0, math.pi))
            closed = (1 - r**2) / (1 - 2 * r * math.cos(theta) + r**2)
            assert evaluate(f, r, math.cos(theta)) == pytest.approx(closed, abs=1e-10)

    def test_ball_closed_form_on_axis(self):
        K = truncation_degree(3, 0.0, 0.9, 1e-12)
        f = poisson_expansion(3, K)
        for r in (0.3, 0.6, 0.85):
            assert evaluate(f, r, 1.0) == pytest.approx((1 + r) / (1 - r) ** 2, rel=1e-11)

    def test_closed_form_helper(self):
        assert poisson_closed_form(2, 0.5, 1.0) == pytest.approx((1 - 0.25) / 0.25)

    def test_mean_value_property(self):
        # integral over the sphere of f(r .) equals the degree-0 coefficient
        rng = np.random.default_rng(3)
        for n in (2, 3, 4):
            f = ZonalExpansion(n, rng.standard_normal(11))
            rule = sphere_rule(n, 64)
            for r in (0.2, 0.7, 0.95):
                vals = evaluate_grid(f, np.array([r]), rule.nodes)[0]
                assert rule.integrate(vals) == pytest.approx(float(f.coeffs[0]), abs=1e-10)

    def test_poisson_unit_mass(self):
        for n in (2, 3):
            K = truncation_degree(n, 0.0, 0.99, 1e-12)
            f = poisson_expansion(n, K)
            rule = sphere_rule(n, 2 * K + 8)
            for r in (0.1, 0.5, 0.9, 0.95):
                vals = evaluate_grid(f, np.array([r]), rule.nodes)[0]
                assert rule.integrate(vals) == pytest.approx(1.0, abs=1e-10)
            # at r = 0.99 the integrand is nearly singular and size-5000
            # Gauss rules hit their double-precision floor (~1e-9, measured
            # on the closed form as well); the mathematical rule error is
            # e^-50 there
            series = rule.integrate(evaluate_grid(f, np.array([0.99]), rule.nodes)[0])
            assert series == pytest.approx(1.0, abs=2e-9)

    def test_harmonicity_discrete_laplacian(self, rng):
        # O(h^2) decay of the 5-point (n=2) / 7-point (n=3) Laplacian
        for n in (2, 3):
            f = ZonalExpansion(n, rng.standard_normal(9) * 0.5 ** np.arange(9))
            pole = f.pole

            def value_at(x):
                r = np.linalg.norm(x)
                s = float(x @ pole / r) if r > 0 else 1.0
                return evaluate(f, float(r), s)

            x0 = np.zeros(n)
            x0[0], x0[-1] = 0.35, 0.2
            laps = []
            for h in (1e-2, 5e-3):
                total = -2.0 * n * value_at(x0)
                for j in range(n):
                    e = np.zeros(n)
                    e[j] = h
                    total += value_at(x0 + e) + value_at(x0 - e)
                laps.append(abs(total / h**2))
            assert laps[0] < 1e-3
            assert laps[1] < 0.5 * laps[0] + 1e-10


class TestFractionalDerivative:
    def test_identity_dimension_two(self):
        f = poisson_expansion(2, 20)
        g = fractional_derivative(f, 0.0)
        assert np.allclose(g.coeffs, f.coeffs, atol=0, rtol=0)

    def test_derivative_kernel_relation(self):
        # order (alpha - 1) derivative of the Poisson kernel
        for n, alpha in [(2, 1.7), (3, 2.5)]:
            direct = p_alpha_expansion(n, alpha, 15)
            via = fractional_derivative(poisson_expansion(n, 15), alpha - 1.0)
            assert np.allclose(direct.coeffs, via.coeffs, rtol=1e-14)

    def test_composition_multiplier_product(self, rng):
        f = ZonalExpansion(3, rng.standard_normal(12))
        t1, t2 = 0.6, -0.2
        twice = fractional_derivative(fractional_derivative(f, t1), t2)
        product = np.array(
            [
                frac_deriv_multiplier(k, t1, 3) * frac_deriv_multiplier(k, t2, 3)
                for k in range(f.K + 1)
            ]
        )
        assert np.max(np.abs(twice.coeffs - f.coeffs * product)) < 1e-12 * np.max(np.abs(f.coeffs))

    def test_linearity_exact(self, rng):
        f = ZonalExpansion(2, rng.standard_normal(9))
        g = ZonalExpansion(2, rng.standard_normal(9))
        lhs = fractional_derivative(ZonalExpansion(2, 2.5 * f.coeffs + g.coeffs), 0.8)
        rhs = 2.5 * fractional_derivative(f, 0.8).coeffs + fractional_derivative(g, 0.8).coeffs
        assert np.max(np.abs(lhs.coeffs - rhs)) < 1e-14 * np.max(np.abs(rhs))

    def test_gamma_pole(self):
        f = poisson_expansion(2, 5)
        with pytest.raises(ValueError):
            fractional_derivative(f, -1.0)


class TestBergmanKernel:
    def test_center_pole_is_constant(self):
        q = bergman_kernel(2, 0.0, np.zeros(2), 10)
        assert q.coeffs[0] == pytest.approx(2.0, rel=1e-13)
        assert np.all(q.coeffs[1:] == 0.0)
        assert evaluate(q, 0.5, -0.3) == pytest.approx(2.0, abs=1e-13)

    def test_symmetry_in_arguments(self, rng):
        for n in (2, 3):
            for _ in range(10):
                x = rng.standard_normal(n)
                y = rng.standard_normal(n)
                x *= rng.uniform(0.1, 0.85) / np.linalg.norm(x)
                y *= rng.uniform(0.1, 0.85) / np.linalg.norm(y)
                rx, ry = np.linalg.norm(x), np.linalg.norm(y)
                s = float(x @ y / (rx * ry))
                K = 420
                q_xy = evaluate(bergman_kernel(n, 0.75, y, K), float(rx), s)
                q_yx = evaluate(bergman_kernel(n, 0.75, x, K), float(ry), s)
                assert q_xy == pytest.approx(q_yx, rel=1e-10, abs=1e-10)

    def test_boundary_pole_continuity(self):
        # rho0 = 1 section is the radial limit of interior-pole sections
        K = 600
        r, s = 0.55, 0.4
        target = evaluate(bergman_kernel(2, 0.5, np.array([1.0, 0.0]), K), r, s)
        seq = []
        for rho0 in (0.9, 0.99, 0.999, 0.9999):
            q = bergman_kernel(2, 0.5, np.array([rho0, 0.0]), K)
            seq.append(evaluate(q, r / rho0 * rho0, s))  # same radius, interior pole
        diffs = np.abs(np.array(seq) - target)
        assert diffs[-1] < 5e-3 and np.all(np.diff(diffs) < 0)

    def test_pole_outside_ball(self):
        with pytest.raises(ValueError):
            bergman_kernel(2, 0.0, np.array([1.5, 0.0]), 5)

    def test_order_validation(self):
        with pytest.raises(ValueError):
            bergman_kernel(2, -1.0, np.array([0.5, 0.0]), 5)


class TestTruncationDegree:
    def test_trivial_cases(self):
        assert truncation_degree(2, 1.0, 0.5, 1e6) == 0
        assert truncation_degree(2, 1.0, 0.0, 1e-12) == 0

    def test_tail_verified_by_extended_sums(self):
        n, alpha, rho, tol = 2, 1.0, 0.9, 1e-10
        K = truncation_degree(n, alpha, rho, tol)
        tail = sum(
            kernel_coefficient(k, alpha, n) * harmonic_space_dim(k, n) * rho**k
            for k in range(K + 1, 11 * K)
        )
        assert tail < tol
        # minimality within a small margin: a much smaller K fails
        K_small = int(0.8 * K)
        tail_small = sum(
            kernel_coefficient(k, alpha, n) * harmonic_space_dim(k, n) * rho**k
            for k in range(K_small + 1, 11 * K)
        )
        assert tail_small > tol

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            truncation_degree(2, 0.0, 1.0, 1e-8)
        with pytest.raises(ValueError):
            truncation_degree(2, 0.0, 0.5, -1.0)


class TestTestFunctionSpec:
    def test_json_roundtrip(self):
        spec = TestFunctionSpec("q_kernel", 3, 50, {"beta": 0.5, "rho0": 1.0})
        again = TestFunctionSpec.from_json(spec.to_json())
        assert again == spec
        obj = json.loads(spec.to_json())
        assert obj["kind"] == "q_kernel" and obj["n"] == 3

    def test_expansions(self):
        assert np.all(TestFunctionSpec("poisson", 2, 6).to_expansion().coeffs == 1.0)
        q = TestFunctionSpec("q_kernel", 2, 4, {"beta": 0.0, "rho0": 0.5}).to_expansion()
        assert q.coeffs[1] == pytest.approx(kernel_coefficient(1, 0.0, 2) * 0.5)
        poly = TestFunctionSpec("polynomial", 2, 5, {"coeffs": [1.0, 2.0]}).to_expansion()
        assert poly.K == 5 and poly.coeffs[1] == 2.0 and poly.coeffs[5] == 0.0

    def test_random_seed_reproducible(self):
        a = TestFunctionSpec("random", 2, 9, {"seed": 11, "decay": 1.0}).to_expansion()
        b = TestFunctionSpec("random", 2, 9, {"seed": 11, "decay": 1.0}).to_expansion()
        assert np.array_equal(a.coeffs, b.coeffs)

    @pytest.mark.parametrize(
        "kind,params",
        [
            ("q_kernel", {"beta": -1.5, "rho0": 1.0}),
            ("q_kernel", {"beta": 0.0, "rho0": 0.0}),
            ("p_alpha", {}),
            ("polynomial", {"coeffs": []}),
            ("random", {}),
        ],
    )
    def test_validation(self, kind, params):
        with pytest.raises(ValueError):
            TestFunctionSpec(kind, 2, 5, params)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            TestFunctionSpec("mystery", 2, 5, {})
