import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from conftest import random_spd
from tpqsf.errors import DofTooSmall, NotPositiveDefinite
from tpqsf.stats import (
    GaussianDist, GaussianMixture, StudentDist, chol_solve, cholesky_jitter, cholesky_spd,
    sample_gaussian, sample_mixture, sample_student, student_from_covariance, tri_solve,
)


class TestCholesky:
    def test_identity(self):
        assert_array_equal(cholesky_spd(np.eye(3)), np.eye(3))

    def test_diagonal(self):
        assert_allclose(cholesky_spd(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))

    def test_random_spd_reconstructs(self, rng):
        B = rng.standard_normal((5, 5))
        A = B @ B.T
        L = cholesky_spd(A)
        assert np.linalg.norm(L @ L.T - A) < 1e-10 * np.linalg.norm(A)
        assert_array_equal(L, np.tril(L))
        assert np.all(np.diag(L) > 0)

    def test_jitter_rescues_semidefinite(self):
        v = np.array([1.0, 2.0, 3.0])
        L, jitter = cholesky_jitter(np.outer(v, v))
        assert jitter > 0
        assert jitter <= 1e-6 * 14.0 / 3
        assert_allclose(L @ L.T, np.outer(v, v) + jitter * np.eye(3), atol=1e-12)

    def test_no_jitter_when_pd(self):
        assert cholesky_jitter(np.eye(2))[1] == 0.0

    def test_indefinite_fails(self):
        with pytest.raises(NotPositiveDefinite):
            cholesky_spd(np.diag([1.0, -1.0]))

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError):
            cholesky_spd(np.array([[1.0, 0.5], [0.0, 1.0]]))

    def test_solves(self, rng):
        A = random_spd(rng, 4)
        b = rng.standard_normal(4)
        L = cholesky_spd(A)
        assert_allclose(A @ chol_solve(L, b), b, atol=1e-12)
        assert_allclose(L @ tri_solve(L, b), b, atol=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 6), st.integers(0, 2 ** 32 - 1))
    def test_property_lower_positive_diagonal(self, d, seed):
        A = random_spd(np.random.default_rng(seed), d, cond=1e6)
        L = cholesky_spd(A)
        assert_array_equal(L, np.tril(L))
        assert np.all(np.diag(L) > 0)
        assert np.linalg.norm(L @ L.T - A) <= 1e-10 * np.linalg.norm(A)


class TestStudent:
    def test_scale_scalar(self):
        s = student_from_covariance([0.0], [[1.0]], 4.0)
        assert_allclose(s.scale, [[0.5]])

    def test_scale_matrix(self):
        assert_allclose(student_from_covariance(np.zeros(2), np.eye(2), 4).scale, 0.5 * np.eye(2))

    def test_covariance_exact(self):
        cov = np.array([[2.0, 0.3], [0.3, 1.0]])
        assert_array_equal(StudentDist(np.zeros(2), cov, 7.0).covariance(), cov)

    def test_dof_too_small(self):
        with pytest.raises(DofTooSmall):
            student_from_covariance([0.0], [[1.0]], 2.0)

    def test_immutable(self):
        s = StudentDist([0.0], [[1.0]], 4.0)
        with pytest.raises(AttributeError):
            s.dof = 5.0

    @settings(max_examples=50, deadline=None)
    @given(st.floats(2.01, 1e6), st.integers(0, 2 ** 32 - 1))
    def test_property_round_trip(self, dof, seed):
        cov = random_spd(np.random.default_rng(seed), 3)
        s = StudentDist(np.zeros(3), cov, dof)
        assert_allclose(s.covariance(), dof / (dof - 2) * s.scale, rtol=1e-12)
        s2 = student_from_covariance(np.zeros(3), s.covariance(), dof)
        assert_allclose(s2.scale, s.scale, rtol=1e-12)

    def test_sample_covariance(self):
        s = student_from_covariance(np.zeros(2), np.eye(2), 4.0)
        X = sample_student(s, 10 ** 6, 11)
        C = X.T @ X / X.shape[0]
        # the MC error of a 4-dof second moment is dominated by the heavy tail;
        # use the empirical spread of the products for the standard error
        se = np.array([[np.std(X[:, i] * X[:, j]) for j in range(2)] for i in range(2)]) / np.sqrt(X.shape[0])
        assert np.all(np.abs(C - np.eye(2)) < 3 * se)

    def test_sample_deterministic(self):
        s = student_from_covariance([1.0, 2.0], np.eye(2), 5.0)
        assert_array_equal(sample_student(s, 1, 3), sample_student(s, 1, 3))

    def test_sample_gaussian_limit_kurtosis(self):
        s = student_from_covariance([1.0, -1.0], [[2.0, 0.5], [0.5, 1.0]], 1e6)
        X = sample_student(s, 10 ** 6, 5)
        z = (X - X.mean(0)) / X.std(0)
        kurt = np.mean(z ** 4, axis=0)
        se = np.sqrt(96.0 / X.shape[0])  # asymptotic SE of the sample kurtosis
        assert np.all(np.abs(kurt - 3.0) < 3 * se)


class TestMixture:
    def test_variance_28(self):
        mix = GaussianMixture(((0.8, GaussianDist([0.0], [[10.0]])), (0.2, GaussianDist([0.0], [[100.0]]))))
        assert_allclose(mix.covariance(), [[28.0]])
        x = sample_mixture(mix, 10 ** 6, 2)[:, 0]
        se = np.std(x * x) / np.sqrt(x.size)
        assert abs(np.mean(x * x) - 28.0) < 3 * se

    def test_single_component_is_gaussian(self):
        g = GaussianDist([1.0, 2.0], [[2.0, 0.1], [0.1, 1.0]])
        mix = GaussianMixture(((1.0, g),))
        ss = np.random.SeedSequence(9)
        direct = sample_gaussian(g, 50, np.random.SeedSequence(9).spawn(2)[1])
        assert_array_equal(sample_mixture(mix, 50, ss), direct)

    def test_zero_weight_component_unused(self):
        a = GaussianDist([0.0], [[1.0]])
        b = GaussianDist([1e6], [[1.0]])
        x = sample_mixture(GaussianMixture(((1.0, a), (0.0, b))), 10 ** 4, 1)
        assert np.all(np.abs(x) < 100)

    def test_weights_validated(self):
        a = GaussianDist([0.0], [[1.0]])
        with pytest.raises(ValueError):
            GaussianMixture(((0.5, a), (0.4, a)))

    def test_dimension_validated(self):
        with pytest.raises(ValueError):
            GaussianMixture(((0.5, GaussianDist([0.0], [[1.0]])), (0.5, GaussianDist(np.zeros(2), np.eye(2)))))

    def test_moments_converge(self):
        mix = GaussianMixture(((0.3, GaussianDist([1.0, 0.0], np.eye(2))),
                               (0.7, GaussianDist([-1.0, 2.0], [[2.0, 0.5], [0.5, 1.0]]))))
        X = sample_mixture(mix, 10 ** 6, 4)
        se = X.std(0) / np.sqrt(X.shape[0])
        assert np.all(np.abs(X.mean(0) - mix.mean()) < 3 * se)

    def test_pure_function_of_seed(self):
        mix = GaussianMixture(((0.5, GaussianDist([0.0], [[1.0]])), (0.5, GaussianDist([3.0], [[1.0]]))))
        assert_array_equal(sample_mixture(mix, 100, 8), sample_mixture(mix, 100, 8))
        assert not np.array_equal(sample_mixture(mix, 100, 8), sample_mixture(mix, 100, 9))
