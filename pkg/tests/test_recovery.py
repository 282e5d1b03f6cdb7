"""Nearest-point solvers, error-bound records, adversarial construction."""

import math

import numpy as np
import pytest

from mcslab import (
    InvalidArgumentError,
    PreconditionViolatedError,
    apply_operator,
    check_deterministic_bound,
    check_geodesic_bound,
    check_probabilistic_bound,
    construct_adversarial_instance,
    draw_gaussian_operator,
    estimate_parameter,
    make_circle,
    make_line_segment,
    nearest_point_on_manifold,
    recover_signal,
)
from mcslab.measurement import MeasurementOperator


class TestNearestPoint:
    def test_on_manifold_point(self):
        model = make_circle(1.0, 8)
        x = model.chart(2.345)
        res = nearest_point_on_manifold(model, x)
        assert res.distance <= 1e-9
        assert model.domain.distance([res.theta_star], [2.345]) <= 1e-6

    def test_radial_projection(self):
        model = make_circle(1.0, 4)
        x = np.array([2.0, 0.0, 0.0, 0.0])
        res = nearest_point_on_manifold(model, x)
        assert res.distance == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(res.x_star, [1, 0, 0, 0], atol=1e-9)

    def test_center_tie_breaks_to_domain_origin(self):
        model = make_circle(1.0, 3)
        res = nearest_point_on_manifold(model, np.zeros(3))
        assert res.theta_star == 0.0
        assert res.distance == pytest.approx(1.0, abs=1e-12)

    def test_oracle_consistency_random_parameters(self):
        model = make_circle(1.0, 6)
        rng = np.random.default_rng(7)
        for theta in rng.uniform(0, 2 * math.pi, size=100):
            res = nearest_point_on_manifold(model, model.chart(theta))
            assert res.distance <= 1e-9

    def test_grid_minimum(self):
        with pytest.raises(InvalidArgumentError):
            nearest_point_on_manifold(make_circle(1.0, 3), np.zeros(3), grid=7)

    def test_shape_validation(self):
        with pytest.raises(InvalidArgumentError):
            nearest_point_on_manifold(make_circle(1.0, 3), np.zeros(4))


class TestRecoverSignal:
    def test_clean_recovery(self):
        model = make_circle(1.0, 64)
        op = draw_gaussian_operator(16, 64, seed=5)
        x = model.chart(1.0)
        res = recover_signal(model, op, apply_operator(op, x), tol=1e-9 * 2 * math.pi)
        assert np.linalg.norm(x - res.x_hat) <= 1e-6

    def test_matches_brute_force(self):
        model = make_circle(1.0, 32)
        rng = np.random.default_rng(8)
        for seed in range(3):
            op = draw_gaussian_operator(8, 32, seed=seed)
            y = rng.standard_normal(8) * 0.5
            res = recover_signal(model, op, y)
            thetas = np.linspace(0, 2 * math.pi, 100_000, endpoint=False)
            vals = np.linalg.norm(
                apply_operator(op, model.chart_many(thetas)) - y[None, :], axis=1
            )
            assert res.residual <= float(vals.min()) + 1e-9

    def test_zero_operator_tie_breaks(self):
        model = make_circle(1.0, 3)
        zero = MeasurementOperator(m_rows=4, n_cols=3, matrix=np.zeros((4, 3)), seed=0)
        res = recover_signal(model, zero, np.zeros(4))
        assert res.theta_hat == 0.0

    def test_residual_beats_grid_candidates(self):
        model = make_circle(1.0, 16)
        op = draw_gaussian_operator(6, 16, seed=9)
        y = np.ones(6)
        res = recover_signal(model, op, y, grid=64)
        assert res.residual <= res.grid_residual + 1e-15

    def test_length_mismatch(self):
        model = make_circle(1.0, 16)
        op = draw_gaussian_operator(6, 16, seed=9)
        with pytest.raises(InvalidArgumentError):
            recover_signal(model, op, np.zeros(5))


class TestEstimateParameter:
    def test_exact_consistency(self):
        model = make_circle(1.0, 32)
        op = draw_gaussian_operator(16, 32, seed=10)
        theta = 0.789
        y = apply_operator(op, model.chart(theta))
        theta_hat, res = estimate_parameter(model, op, y)
        assert model.domain.distance([theta_hat], [theta]) <= 1e-9 * 2 * math.pi * 10
        assert theta_hat == res.theta_hat

    def test_shared_solver_with_recovery(self):
        model = make_circle(1.0, 32)
        op = draw_gaussian_operator(8, 32, seed=11)
        y = np.linspace(-1, 1, 8)
        theta_hat, _ = estimate_parameter(model, op, y)
        assert theta_hat == recover_signal(model, op, y).theta_hat

    def test_circle_isometry(self, circle_2000):
        # kappa = 1: arc distance between recovered and oracle parameters
        # matches the graph geodesic between their chart points within 1%
        from mcslab import geodesic_between

        model = circle_2000.model
        op = draw_gaussian_operator(32, 3, seed=12)
        y = apply_operator(op, model.chart(1.5))
        theta_hat, res = estimate_parameter(model, op, y)
        star = nearest_point_on_manifold(model, model.chart(2.5))
        d_theta = model.domain.distance([theta_hat], [star.theta_star])
        assert d_theta > 0.5
        d_m = geodesic_between(circle_2000, res.x_hat, star.x_star)
        assert abs(d_m - 1.0 * d_theta) / (1.0 * d_theta) <= 0.01


class TestDeterministicBound:
    def test_constant_arithmetic(self):
        x = np.array([1.0, 0.0])
        x_star = np.array([0.0, 0.0])
        rec = check_deterministic_bound(x, x, x_star, noise=np.zeros(2), eps=0.0, sigma_max=1.0)
        assert rec.rhs == pytest.approx(3.0, abs=1e-15)
        assert rec.lhs == 0.0
        assert rec.passed and rec.applicable

    def test_noise_strictly_raises_rhs(self):
        x = np.array([1.0, 0.0])
        lo = check_deterministic_bound(x, x, x, noise=np.array([0.01, 0.0]), eps=0.1, sigma_max=2.0)
        hi = check_deterministic_bound(x, x, x, noise=np.array([0.02, 0.0]), eps=0.1, sigma_max=2.0)
        assert hi.rhs > lo.rhs

    def test_record_contents(self):
        x = np.array([1.0, 0.0])
        rec = check_deterministic_bound(
            x, np.zeros(2), np.zeros(2), noise=np.zeros(2), eps=0.2, sigma_max=1.5
        )
        assert rec.theorem == "deterministic"
        assert rec.lhs == pytest.approx(1.0)
        assert rec.rhs == pytest.approx((1 + 0.4) * 4.0 * 1.0, rel=1e-15)
        d = rec.to_dict()
        assert d["sigma_max"] == 1.5
        assert d["dist_to_nearest"] == 1.0


class TestProbabilisticBound:
    def test_zero_distance_uses_operator_norm_branch(self):
        x = np.array([1.0, 0.0, 0.0])
        rec = check_probabilistic_bound(
            x, x, x, noise=np.zeros(3), eps=0.2, n_cols=256, m_rows=64, tau=1.0
        )
        assert rec.branch == "operator-norm"
        assert rec.rhs == pytest.approx(0.0, abs=1e-15)
        assert rec.passed

    def test_far_regime_uses_near_optimal_branch(self):
        x = np.array([10.0, 0.0])
        x_star = np.zeros(2)
        rec = check_probabilistic_bound(
            x, x_star, x_star, noise=np.zeros(2), eps=0.2, n_cols=256, m_rows=64, tau=1.0
        )
        assert rec.branch == "near-optimal"
        # (1 + 3 eps) * 10 + eps tau / 40
        assert rec.rhs == pytest.approx(1.6 * 10 + 0.2 / 40, rel=1e-15)

    def test_large_measured_eps_is_carried(self):
        x = np.array([1.0, 0.0])
        rec = check_probabilistic_bound(
            x, x, x, noise=np.zeros(2), eps=0.9, n_cols=16, m_rows=4, tau=1.0
        )
        assert rec.eps_used == 0.9

    def test_noise_strictly_raises_rhs(self):
        x = np.array([1.0, 0.0])
        args = dict(eps=0.1, n_cols=64, m_rows=16, tau=1.0)
        lo = check_probabilistic_bound(x, x, x, noise=np.array([0.01, 0.0]), **args)
        hi = check_probabilistic_bound(x, x, x, noise=np.array([0.03, 0.0]), **args)
        assert hi.rhs > lo.rhs


class TestGeodesicBound:
    def test_same_point_passes(self, circle_400):
        # a sample point snaps to itself, so the graph readout is exactly 0
        star = circle_400.points[17]
        x = star * 1.01
        rec = check_geodesic_bound(
            circle_400, x, star, star, noise=np.zeros(3), eps=0.2, n_cols=3, m_rows=2, tau=1.0
        )
        assert rec.applicable
        assert rec.lhs == pytest.approx(0.0, abs=1e-12)
        assert rec.passed

    def test_violated_precondition_not_applicable(self, circle_400):
        model = circle_400.model
        star = model.chart(0.0)
        x = star * 2.0  # distance 1 = tau, far over the 0.163 tau gate
        rec = check_geodesic_bound(
            circle_400, x, star, star, noise=np.zeros(3), eps=0.2, n_cols=3, m_rows=2, tau=1.0
        )
        assert not rec.applicable
        assert not rec.passed
        assert math.isnan(rec.lhs) and math.isnan(rec.rhs)

    def test_applicable_trials_bounded_by_half_circumference(self, circle_400):
        # the precondition keeps the geodesic readout finite and the
        # bound's argument sane on the circle
        model = circle_400.model
        rng = np.random.default_rng(13)
        seen = 0
        for _ in range(20):
            theta = rng.uniform(0, 2 * math.pi)
            star = model.chart(theta)
            x = star * (1 + 0.1)  # radial offset 0.1 < 0.163 tau
            hat = model.chart(theta + rng.uniform(-0.05, 0.05))
            rec = check_geodesic_bound(
                circle_400, x, hat, star, noise=np.zeros(3), eps=0.3, n_cols=3, m_rows=2, tau=1.0
            )
            if rec.applicable:
                seen += 1
                assert rec.lhs <= math.pi * 1.0 + 0.1
                assert math.isfinite(rec.rhs)
        assert seen == 20


class TestAdversarialInstance:
    def test_construction_properties(self):
        op = draw_gaussian_operator(16, 400, seed=3)
        inst = construct_adversarial_instance(op, eps=1 / 3)
        assert inst.sigma_min >= 8 / 3
        assert inst.u_norm <= 1.0 + 1e-12
        assert inst.null_residual <= 1e-10
        assert inst.ratio >= inst.ratio_bound - 1e-9
        assert inst.record.passed
        assert inst.valid

    def test_recovered_point_is_origin(self):
        op = draw_gaussian_operator(16, 400, seed=4)
        inst = construct_adversarial_instance(op, eps=1 / 3)
        assert inst.theta_hat == 0.0
        assert np.array_equal(inst.x_hat, np.zeros(400))

    def test_nu_scaling(self):
        op = draw_gaussian_operator(16, 400, seed=5)
        inst = construct_adversarial_instance(op, eps=0.25)
        assert inst.nu == pytest.approx((1 + 0.25) / inst.sigma_min, rel=1e-15)
        # x = e1 + nu u holds exactly as constructed
        e1 = np.zeros(400)
        e1[0] = 1.0
        assert np.allclose(inst.x, e1 + inst.nu * inst.u, atol=1e-15)

    def test_narrow_operator_rejected(self):
        op = draw_gaussian_operator(64, 100, seed=6)
        with pytest.raises(PreconditionViolatedError):
            construct_adversarial_instance(op, eps=1 / 3)

    def test_eps_range(self):
        op = draw_gaussian_operator(16, 400, seed=7)
        with pytest.raises(InvalidArgumentError):
            construct_adversarial_instance(op, eps=0.5)
