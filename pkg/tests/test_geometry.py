"""Reach estimation, principal angles, kernels, volumes, and lemma checks."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcslab import (
    InsufficientSampleError,
    InvalidArgumentError,
    NoApplicablePairsError,
    PROPERTY_IDS,
    check_toolbox_property,
    dirichlet_kernel,
    estimate_reach,
    geodesic_distance,
    make_circle,
    make_complex_exponential,
    make_line_segment,
    principal_angle,
    run_toolbox_suite,
    sample_manifold,
    unit_ball_volume,
)
from mcslab.manifolds import connectivity_radius

# brute-force Federer quotient on the f_c=3 exponential curve, 2000 points
CEXP3_REACH = 1.7157199165405317

# max |D_N(z)| over |z| in (2/N, 1/2], pinned from a 10^6-point scan
DIRICHLET_SIDELOBE = {7: 1.1126117909223792, 31: 4.021116071948709, 127: 16.31362704526538}

BALL_VOLUME_5 = 5.263789013914324  # 8 pi^2 / 15


class TestReach:
    def test_circle_reach_near_kappa(self, circle_2000):
        est = estimate_reach(circle_2000)
        assert 0.99 <= est.tau_hat <= 1.01
        assert est.pairs_used > 0

    def test_flat_segment_gives_infinity(self):
        model = make_line_segment(4)
        sample = sample_manifold(model, 50, graph_radius=0.1)
        est = estimate_reach(sample)
        assert est.tau_hat == math.inf

    def test_complex_exponential_value_and_upper_bound(self, cexp3_2000):
        est = estimate_reach(cexp3_2000)
        assert est.tau_hat == pytest.approx(CEXP3_REACH, rel=1e-12)
        assert est.tau_hat <= math.sqrt(7) * 1.02

    def test_requires_ten_points(self):
        model = make_circle(1.0, 3)
        sample = sample_manifold(model, 8, graph_radius=2.0)
        with pytest.raises(InsufficientSampleError):
            estimate_reach(sample)

    def test_monotone_under_refinement(self):
        # the 500-point circle grid contains the 250-point grid, so the
        # pairwise minimum can only go down
        model = make_circle(1.0, 3)
        coarse = sample_manifold(model, 250, connectivity_radius(model, 250))
        fine = sample_manifold(model, 500, connectivity_radius(model, 500))
        assert estimate_reach(fine).tau_hat <= estimate_reach(coarse).tau_hat + 1e-12


class TestPrincipalAngle:
    def test_identical_frames(self):
        f = np.array([[1.0, 0.0]])
        angle, opnorm = principal_angle(f, f)
        assert angle == 0.0
        assert opnorm == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal_frames(self):
        angle, opnorm = principal_angle(np.array([[1.0, 0.0]]), np.array([[0.0, 1.0]]))
        assert angle == pytest.approx(math.pi / 2, abs=1e-12)
        assert opnorm == pytest.approx(1.0, abs=1e-10)

    def test_forty_five_degrees(self):
        s = math.sqrt(0.5)
        angle, opnorm = principal_angle(np.array([[1.0, 0.0]]), np.array([[s, s]]))
        assert angle == pytest.approx(math.pi / 4, abs=1e-12)
        assert opnorm == pytest.approx(s, abs=1e-10)

    def test_norm_equals_sine_of_angle(self, circle_400):
        rng = np.random.default_rng(3)
        n = len(circle_400)
        for _ in range(25):
            i, j = rng.integers(0, n, size=2)
            angle, opnorm = principal_angle(circle_400.frames[i], circle_400.frames[j])
            assert abs(math.sin(angle) - opnorm) <= 1e-8

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            principal_angle(np.array([[1.0, 0.0]]), np.array([[1.0, 0.0, 0.0]]))

    def test_projector_idempotent_and_symmetric(self, circle_400):
        # the projector onto a frame's span is symmetric with P^2 = P
        f = circle_400.frames[13]
        p = f.T @ f
        assert np.max(np.abs(p - p.T)) <= 1e-12
        assert np.linalg.norm(p @ p - p, 2) <= 1e-10


class TestDirichletKernel:
    def test_limit_at_zero(self):
        assert dirichlet_kernel(7, 0.0) == 7.0

    def test_half_point(self):
        assert dirichlet_kernel(7, 0.5) == pytest.approx(-1.0, abs=1e-12)

    def test_even_n_rejected(self):
        with pytest.raises(InvalidArgumentError):
            dirichlet_kernel(8, 0.1)
        with pytest.raises(InvalidArgumentError):
            dirichlet_kernel(1, 0.1)

    @given(z=st.floats(-0.5, 0.5, allow_nan=False, allow_subnormal=False))
    @settings(max_examples=300, deadline=None)
    def test_even_function_and_global_bound(self, z):
        # subnormal z is excluded: pi * z drops bits there and the ratio
        # loses all meaning, while every representable normal z is fine
        v = float(dirichlet_kernel(9, z))
        assert v == pytest.approx(float(dirichlet_kernel(9, -z)), abs=1e-12)
        assert abs(v) <= 9.0 * (1.0 + 1e-9)

    @pytest.mark.parametrize("n", [7, 31, 127])
    def test_side_lobe_bound(self, n):
        z = np.linspace(2.0 / n, 0.5, 100_001)[1:]
        peak = float(np.abs(dirichlet_kernel(n, z)).max())
        assert peak <= 0.24 * n
        assert peak <= DIRICHLET_SIDELOBE[n] + 1e-9


class TestUnitBallVolume:
    def test_closed_forms(self):
        assert unit_ball_volume(1) == pytest.approx(2.0, abs=1e-15)
        assert unit_ball_volume(2) == pytest.approx(math.pi, rel=1e-15)
        assert unit_ball_volume(5) == pytest.approx(BALL_VOLUME_5, rel=1e-15)

    def test_sandwich_for_k_at_least_two(self):
        for k in range(2, 11):
            v = unit_ball_volume(k)
            lower = (4 * math.pi / (k + 2)) ** (k / 2)
            upper = (2 * math.e * math.pi / (k + 2)) ** (k / 2)
            assert lower <= v <= upper

    def test_invalid_dimension(self):
        with pytest.raises(InvalidArgumentError):
            unit_ball_volume(0)


class TestToolboxProperties:
    def test_unknown_property_id(self, circle_400):
        with pytest.raises(InvalidArgumentError):
            check_toolbox_property(circle_400, "A.3")

    def test_equality_case_on_circle(self, circle_2000):
        # chords of a circle meet the angle bound with equality
        report = check_toolbox_property(circle_2000, "A.2", pair_budget=50_000)
        assert report.passed
        assert abs(report.worst_slack) <= 1e-9

    def test_no_applicable_pairs(self):
        # 4 points at right angles: every chord exceeds tau/2
        model = make_circle(1.0, 3)
        sparse = sample_manifold(model, 4, graph_radius=1.5)
        with pytest.raises(NoApplicablePairsError):
            check_toolbox_property(sparse, "A.6", pair_budget=100)

    def test_geodesic_arc_value(self, circle_2000):
        # arc between points a chord 0.5 apart: 2 asin(1/4)
        i = 0
        target = 2 * math.asin(0.25)
        angles = circle_2000.params[:, 0]
        j = int(np.argmin(np.abs(angles - target)))
        d = geodesic_distance(circle_2000, i, j)
        assert d == pytest.approx(0.5053605102841573, rel=5e-3)

    def test_suite_passes_on_circle(self, circle_2000):
        reports = run_toolbox_suite(circle_2000, pair_budget=50_000)
        assert [r.property_id for r in reports] == list(PROPERTY_IDS)
        for r in reports:
            assert r.passed, f"{r.property_id} slack {r.worst_slack}"
            assert r.worst_slack >= -1e-9
            assert r.pairs_tested > 0

    def test_report_serialization(self, circle_400):
        report = check_toolbox_property(circle_400, "A.9", pair_budget=1000)
        d = report.to_dict()
        assert d["property_id"] == "A.9"
        assert isinstance(d["passed"], bool)
        assert set(d) == {"property_id", "pairs_tested", "worst_slack", "passed", "detail"}

    def test_pair_budget_validation(self, circle_400):
        with pytest.raises(InvalidArgumentError):
            check_toolbox_property(circle_400, "A.2", pair_budget=0)
