"""Operators, the measurement-count calculator, tails, spectra, chaining."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcslab import (
    DegenerateSpectrumError,
    InvalidArgumentError,
    OutOfRangeError,
    UnsupportedShapeError,
    apply_operator,
    chaining_failure_bound,
    draw_gaussian_operator,
    embedding_distortion,
    empirical_tail_check,
    required_measurements,
    sample_secants,
    singular_value_range,
)
from mcslab.measurement import MeasurementOperator
from mcslab.rng import standard_normals

# pinned outputs of the measurement-count formula
M_MIN_BASE = 5308        # K=1, tau=1, V=2pi, eps=1/3, rho=0.01
M_MIN_TINY_RHO = 7798    # same but rho=1e-20
M_MIN_V100 = 6205        # K=1, tau=1, V=100, eps=1/3, rho=0.1
M_MIN_V1 = 4713          # K=1, tau=1, V=1, eps=1/3, rho=0.01

# certificate total at M = 6205 (independent evaluation, see the
# chaining tests below for the consistency cross-check)
CERT_TOTAL_6205 = 3.582320474365756e-18


def formula_oracle(k, tau, v, eps, rho):
    geometry = 24 * k + 2 * k * math.log(math.sqrt(k) / (tau * eps**2)) + math.log(2 * v**2)
    return math.ceil(18 / eps**2 * max(geometry, math.log(8 / rho)))


def identity_operator(n):
    return MeasurementOperator(m_rows=n, n_cols=n, matrix=np.eye(n), seed=0)


class TestDrawOperator:
    def test_determinism(self):
        a = draw_gaussian_operator(3, 1024, seed=7)
        b = draw_gaussian_operator(3, 1024, seed=7)
        assert np.array_equal(a.matrix, b.matrix)

    def test_seed_sensitivity(self):
        a = draw_gaussian_operator(4, 64, seed=1)
        b = draw_gaussian_operator(4, 64, seed=2)
        assert not np.array_equal(a.matrix, b.matrix)

    def test_moments(self):
        op = draw_gaussian_operator(100, 1000, seed=5)
        entries = op.matrix.ravel()
        assert abs(entries.mean()) <= 3.0 / math.sqrt(100 * 1000) / 10  # 3 SE of N(0, 0.01)
        assert abs(entries.var() - 0.01) / 0.01 <= 0.05

    def test_entries_follow_stream_order(self):
        # entry (r, c) sits at stream position r * N + c, scaled by 1/sqrt(M)
        op = draw_gaussian_operator(5, 7, seed=11, trial=2)
        z = standard_normals(11, 35, trial=2) / math.sqrt(5)
        assert np.array_equal(op.matrix, z.reshape(5, 7))

    def test_invalid_shapes(self):
        with pytest.raises(InvalidArgumentError):
            draw_gaussian_operator(0, 8, seed=1)
        with pytest.raises(InvalidArgumentError):
            draw_gaussian_operator(8, 0, seed=1)


class TestApply:
    def test_zero_vector(self):
        op = draw_gaussian_operator(4, 16, seed=3)
        assert np.array_equal(apply_operator(op, np.zeros(16)), np.zeros(4))

    def test_single_column(self):
        op = identity_operator(4)
        matrix = np.zeros((3, 4))
        matrix[:, 2] = [1.0, 2.0, 3.0]
        col_op = MeasurementOperator(m_rows=3, n_cols=4, matrix=matrix, seed=0)
        x = np.zeros(4)
        x[2] = 2.5
        assert np.allclose(apply_operator(col_op, x), 2.5 * matrix[:, 2], atol=0)

    @given(scale=st.floats(-8, 8, allow_nan=False))
    @settings(max_examples=50, deadline=None)
    def test_linearity(self, scale):
        op = draw_gaussian_operator(8, 32, seed=9)
        rng = np.random.default_rng(0)
        x1 = rng.standard_normal(32)
        x2 = rng.standard_normal(32)
        lhs = apply_operator(op, scale * x1 + x2)
        rhs = scale * apply_operator(op, x1) + apply_operator(op, x2)
        denom = max(1.0, float(np.linalg.norm(rhs)))
        assert np.linalg.norm(lhs - rhs) / denom <= 1e-12

    def test_length_mismatch(self):
        op = draw_gaussian_operator(4, 16, seed=3)
        with pytest.raises(InvalidArgumentError):
            apply_operator(op, np.zeros(15))


class TestRequiredMeasurements:
    def test_pinned_values(self):
        rep = required_measurements(1, 1.0, 2 * math.pi, 1 / 3, 0.01)
        assert rep.m_min == M_MIN_BASE == formula_oracle(1, 1.0, 2 * math.pi, 1 / 3, 0.01)
        assert rep.branch == "geometry"
        assert not rep.assumption_ok  # 2 pi < 21/2

        rep = required_measurements(1, 1.0, 2 * math.pi, 1 / 3, 1e-20)
        assert rep.m_min == M_MIN_TINY_RHO == formula_oracle(1, 1.0, 2 * math.pi, 1 / 3, 1e-20)
        assert rep.branch == "probability"

        rep = required_measurements(1, 1.0, 100.0, 1 / 3, 0.1)
        assert rep.m_min == M_MIN_V100
        assert rep.assumption_ok

        rep = required_measurements(1, 1.0, 1.0, 1 / 3, 0.01)
        assert rep.m_min == M_MIN_V1
        assert not rep.assumption_ok

    def test_out_of_range(self):
        with pytest.raises(OutOfRangeError):
            required_measurements(1, 1.0, 2 * math.pi, 0.34, 0.01)
        with pytest.raises(OutOfRangeError):
            required_measurements(1, 1.0, 2 * math.pi, 0.0, 0.01)
        with pytest.raises(OutOfRangeError):
            required_measurements(1, 1.0, 2 * math.pi, 1 / 3, 1.0)
        with pytest.raises(InvalidArgumentError):
            required_measurements(0, 1.0, 2 * math.pi, 1 / 3, 0.01)

    def test_monotonicity(self):
        base = required_measurements(1, 1.0, 100.0, 0.2, 0.01).m_min
        assert required_measurements(1, 1.0, 200.0, 0.2, 0.01).m_min >= base  # V up
        assert required_measurements(2, 1.0, 100.0, 0.2, 0.01).m_min >= base  # K up
        assert required_measurements(1, 1.0, 100.0, 0.25, 0.01).m_min <= base  # eps up
        assert required_measurements(1, 1.0, 100.0, 0.2, 0.05).m_min <= base  # rho up
        assert required_measurements(1, 2.0, 100.0, 0.2, 0.01).m_min <= base  # tau up

    def test_runs_under_a_millisecond(self):
        import time

        required_measurements(1, 1.0, 2 * math.pi, 1 / 3, 0.01)  # warm up
        t0 = time.perf_counter()
        required_measurements(1, 1.0, 2 * math.pi, 1 / 3, 0.01)
        assert time.perf_counter() - t0 < 1e-3


class TestEmbeddingDistortion:
    def test_identity_is_isometric(self, circle_400):
        sec = sample_secants(circle_400, max_pairs=500)
        rep = embedding_distortion(identity_operator(3), sec)
        assert rep.eps_hat == pytest.approx(0.0, abs=1e-12)

    def test_zero_operator(self, circle_400):
        sec = sample_secants(circle_400, max_pairs=10)
        zero = MeasurementOperator(m_rows=2, n_cols=3, matrix=np.zeros((2, 3)), seed=0)
        rep = embedding_distortion(zero, sec)
        assert rep.eps_hat == pytest.approx(1.0, abs=1e-15)

    def test_monotone_in_secant_count(self, circle_400):
        op = draw_gaussian_operator(8, 3, seed=21)
        small = embedding_distortion(op, sample_secants(circle_400, max_pairs=100))
        large = embedding_distortion(op, sample_secants(circle_400, max_pairs=10_000))
        assert large.eps_hat >= small.eps_hat
        assert large.count >= small.count

    def test_surrogates_reported_separately(self, circle_400):
        op = draw_gaussian_operator(8, 3, seed=22)
        sec = sample_secants(circle_400, delta1=0.001, tau=1.0, max_pairs=20_000)
        rep = embedding_distortion(op, sec)
        assert rep.eps_surrogate is not None
        assert rep.eps_hat == max(rep.eps_secant, rep.eps_surrogate)
        no_ctx = embedding_distortion(op, sample_secants(circle_400, max_pairs=20_000))
        assert no_ctx.eps_surrogate is None


class TestTailCheck:
    def test_vacuous_bound_always_passes(self):
        rep = empirical_tail_check(24, lam=1 / 3, lam_prime=0.2, trials=1000, seed=1)
        assert rep.bound_two_sided == pytest.approx(2 * math.exp(-24 / 54), rel=1e-15)
        assert rep.bound_two_sided > 1.0
        assert rep.passed_two_sided
        assert rep.passed

    def test_bound_formulas(self):
        rep = empirical_tail_check(600, lam=0.3, lam_prime=0.5, trials=1000, seed=1)
        assert rep.bound_two_sided == pytest.approx(2 * math.exp(-9.0), rel=1e-15)
        assert rep.bound_one_sided == pytest.approx(math.exp(-600 * 0.5 / 7), rel=1e-15)

    def test_determinism(self):
        a = empirical_tail_check(50, lam=0.3, lam_prime=0.5, trials=2000, seed=3)
        b = empirical_tail_check(50, lam=0.3, lam_prime=0.5, trials=2000, seed=3)
        assert a.freq_two_sided == b.freq_two_sided
        assert a.freq_one_sided == b.freq_one_sided

    def test_range_validation(self):
        with pytest.raises(InvalidArgumentError):
            empirical_tail_check(10, lam=0.3, lam_prime=0.5, trials=999, seed=1)
        with pytest.raises(OutOfRangeError):
            empirical_tail_check(10, lam=0.4, lam_prime=0.5, trials=1000, seed=1)
        with pytest.raises(OutOfRangeError):
            empirical_tail_check(10, lam=0.3, lam_prime=0.1, trials=1000, seed=1)


class TestSingularValues:
    def test_identity(self):
        rep = singular_value_range(identity_operator(6))
        assert rep.sigma_max == pytest.approx(1.0, rel=1e-8)
        assert rep.sigma_min == pytest.approx(1.0, rel=1e-8)

    def test_matches_dense_svd(self):
        op = draw_gaussian_operator(12, 40, seed=13)
        rep = singular_value_range(op)
        svals = np.linalg.svd(op.matrix, compute_uv=False)
        assert rep.sigma_max == pytest.approx(float(svals[0]), rel=1e-7)
        assert rep.sigma_min == pytest.approx(float(svals[-1]), rel=1e-7)
        assert rep.upper_bound == pytest.approx(math.sqrt(40 / 12) + 2, rel=1e-15)
        assert rep.lower_bound == pytest.approx(math.sqrt(40 / 12) - 2, rel=1e-15)

    def test_norm_dominates_random_images(self):
        op = draw_gaussian_operator(16, 64, seed=17)
        rep = singular_value_range(op)
        rng = np.random.default_rng(6)
        xs = rng.standard_normal((1000, 64))
        xs /= np.linalg.norm(xs, axis=1, keepdims=True)
        images = np.linalg.norm(xs @ op.matrix.T, axis=1)
        assert float(images.max()) <= rep.sigma_max + 1e-6

    def test_wide_only(self):
        with pytest.raises(UnsupportedShapeError):
            singular_value_range(draw_gaussian_operator(8, 4, seed=1))

    def test_zero_matrix_degenerate(self):
        zero = MeasurementOperator(m_rows=3, n_cols=5, matrix=np.zeros((3, 5)), seed=0)
        with pytest.raises(DegenerateSpectrumError):
            singular_value_range(zero)


class TestChaining:
    def test_weight_identity(self):
        cert = chaining_failure_bound(1, 1.0, 100.0, 1 / 3, 6205, depth=60)
        assert abs(cert.chain_weight_sum - 1.0) <= 1e-12

    def test_certificate_at_required_m(self):
        m_req = required_measurements(1, 1.0, 100.0, 1 / 3, 0.1).m_min
        assert m_req == M_MIN_V100
        cert = chaining_failure_bound(1, 1.0, 100.0, 1 / 3, m_req, depth=60)
        assert cert.total == pytest.approx(CERT_TOTAL_6205, rel=1e-12)
        assert cert.total <= 0.1
        eps1 = 0.9 / 3
        assert cert.total <= 8 * math.exp(-m_req * eps1**2 / 14)
        assert cert.remainder < 1e-12
        assert cert.informative
        assert cert.epsilon1 == pytest.approx(eps1, rel=1e-15)
        assert cert.delta == pytest.approx((1 / 3) / 160, rel=1e-15)

    def test_single_measurement_vacuous(self):
        cert = chaining_failure_bound(1, 1.0, 100.0, 1 / 3, 1, depth=60)
        assert cert.total >= 1.0
        assert not cert.informative

    def test_monotone_in_m(self):
        total = None
        for m in (500, 2000, 6205, 9000):
            cert = chaining_failure_bound(1, 1.0, 100.0, 1 / 3, m, depth=60)
            if total is not None:
                assert cert.total <= total
            total = cert.total

    def test_level_terms_positive_and_tail_decays(self):
        cert = chaining_failure_bound(1, 1.0, 100.0, 1 / 3, 6205, depth=60)
        terms = np.array(cert.level_terms)
        assert (terms >= 0).all()
        assert terms[0] > 0
        nonzero = terms[terms > 0]
        # geometric decay once past the first few levels
        assert nonzero[-1] <= nonzero[0]
        partial = float(terms.sum())
        assert cert.total >= partial or cert.total == pytest.approx(partial, rel=1e-15)
