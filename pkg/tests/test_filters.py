import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from conftest import kalman, linear_model, random_spd, simulate_linear
from tpqsf.errors import FilterFailure, SingularInnovationCovariance
from tpqsf.filters import (
    FilterConfig, StateSpaceModel, StudentFilterState, predict, run_filter, run_ukf, student_update, ukf_step,
    update,
)
from tpqsf.harness.scenarios import cv_matrices, radar_model, ungm_model
from tpqsf.kernels import RbfParams, gram_matrix, mixture_expectations
from tpqsf.quadrature import bq_weights, fully_symmetric_points, ut_weights
from tpqsf.stats import GaussianDist
from tpqsf.transforms import BayesQuadMT, ClassicalMT


def ut_cfg(d, dof, kappa=0.0):
    mt = ClassicalMT(fully_symmetric_points(d, kappa), ut_weights(d, kappa))
    return FilterConfig(mt, mt, dof)


def bq_cfg(d, dof, theta, model_dof):
    pts = fully_symmetric_points(d)
    p = RbfParams.from_theta(theta)
    w = bq_weights(mixture_expectations(p, pts.points, dof), gram_matrix(p, pts.points), model_dof)
    mt = BayesQuadMT(w, pts, use_gamma=np.isfinite(model_dof))
    return FilterConfig(mt, mt, dof)


class TestPredict:
    def test_identity_dynamics(self, rng):
        P, Q = random_spd(rng, 2), random_spd(rng, 2)
        model = linear_model(np.eye(2), np.eye(2), Q, np.eye(2))
        st_ = StudentFilterState(rng.standard_normal(2), P, 5.0)
        m, C = predict(st_, model, ut_cfg(2, 5.0))
        assert_allclose(m, st_.mean, atol=1e-12)
        assert_allclose(C, P + Q, atol=1e-12)

    def test_radar_cv(self, rng):
        model = radar_model()
        F, G = cv_matrices(0.5)
        P = random_spd(rng, 4, cond=100) * 50
        m = np.array([1e4, 300, 1e3, -40])
        mp, Pp = predict(StudentFilterState(m, P, 1000.0), model, ut_cfg(4, 1000.0))
        assert_allclose(mp, F @ m, rtol=1e-8)
        assert_allclose(Pp, F @ P @ F.T + G @ model.process_noise_cov @ G.T, rtol=1e-8, atol=1e-8)

    def test_tpq_limit_matches_gpq(self, rng):
        model = ungm_model()
        st_ = StudentFilterState([0.5], [[2.0]], 4.0)
        a = predict(st_, model, bq_cfg(1, 4.0, [3.0, 1.0], 1e9), 1)
        b = predict(st_, model, bq_cfg(1, 4.0, [3.0, 1.0], np.inf), 1)
        assert_allclose(a[0], b[0], rtol=1e-6)
        assert_allclose(a[1], b[1], rtol=1e-6)

    def test_augmented_matches_additive_for_linear(self, rng):
        F = rng.standard_normal((2, 2))
        Q = random_spd(rng, 2)
        add = linear_model(F, np.eye(2), Q, np.eye(2))
        aug = StateSpaceModel(lambda x, q, k: F @ x + q, lambda x, r, k: x + r, Q, np.eye(2), 2, 2,
                              dynamics_additive=False)
        st_ = StudentFilterState(rng.standard_normal(2), random_spd(rng, 2), 6.0)
        cfg_add = ut_cfg(2, 6.0)
        mt4 = ClassicalMT(fully_symmetric_points(4), ut_weights(4))
        cfg_aug = FilterConfig(mt4, cfg_add.transform_measurement, 6.0)
        a, b = predict(st_, add, cfg_add), predict(st_, aug, cfg_aug)
        assert_allclose(a[0], b[0], atol=1e-12)
        assert_allclose(a[1], b[1], atol=1e-12)


class TestStudentUpdate:
    def case(self, r, n=3, dz=2):
        P = random_spd(r, n)
        H = r.standard_normal((dz, n))
        S = H @ P @ H.T + random_spd(r, dz)
        C = P @ H.T
        return r.standard_normal(n), P, S, C

    def test_zero_innovation(self, rng):
        m, P, S, C = self.case(rng)
        mp, Pp, beta, nu2 = student_update(m, P, np.zeros(2), S, C, np.zeros(2), 5.0)
        assert beta == 0.0
        assert_array_equal(mp, m)
        assert_allclose(Pp, 3.0 / 5.0 * (P - C @ np.linalg.solve(S, C.T)), rtol=1e-10)
        assert nu2 == 7.0

    def test_unit_factor(self, rng):
        m, P, S, C = self.case(rng)
        L = np.linalg.cholesky(S)
        e = L @ np.array([1.0, 1.0])  # beta = 2 = d_z
        _, Pp, beta, _ = student_update(m, P, np.zeros(2), S, C, e, 4.0)
        assert_allclose(beta, 2.0, rtol=1e-12)
        assert_allclose(Pp, P - C @ np.linalg.solve(S, C.T), rtol=1e-10)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1), st.floats(2.05, 1e4), st.integers(1, 4), st.integers(1, 3))
    def test_reconstruction(self, seed, nu, n, dz):
        r = np.random.default_rng(seed)
        m, P, S, C = self.case(r, n, dz)
        e = r.standard_normal(dz) * 3
        _, Pp, beta, _ = student_update(m, P, np.zeros(dz), S, C, e, nu)
        rebuilt = Pp * (nu - 2 + dz) / (nu - 2 + beta) + C @ np.linalg.solve(S, C.T)
        assert np.max(np.abs(rebuilt - P)) <= 1e-8 * np.max(np.abs(P))

    def test_singular_innovation(self, rng):
        m, P, _, C = self.case(rng)
        with pytest.raises(SingularInnovationCovariance):
            student_update(m, P, np.zeros(2), -np.eye(2), C, np.ones(2), 4.0)


class TestUpdateAndDof:
    def test_dof_reset_every_step(self, rng):
        model = ungm_model()
        Z = rng.standard_normal((30, 1)) * 5
        states = run_filter(model, bq_cfg(1, 4.0, [3.0, 3.0], 4.0), Z, StudentFilterState([0.0], [[1.0]], 4.0))
        assert all(s.dof == 4.0 for s in states)

    def test_zero_innovation_keeps_mean(self):
        model = linear_model(np.eye(1), np.eye(1), [[1.0]], [[1.0]])
        cfg = ut_cfg(1, 6.0)
        pred = (np.array([2.0]), np.array([[3.0]]))
        st_ = update(pred, model, cfg, [2.0])
        assert_allclose(st_.mean, [2.0])
        assert st_.cov[0, 0] < 3.0 * 0.75 / 1.0


class TestAgainstKalman:
    def setup_model(self, rng, n=2):
        F = np.eye(n) + 0.1 * rng.standard_normal((n, n))
        H = rng.standard_normal((1, n))
        Q, R = 0.1 * random_spd(rng, n), np.array([[0.5]])
        return F, H, Q, R

    def run_near_gaussian(self, rng):
        F, H, Q, R = self.setup_model(rng)
        m0, P0 = np.zeros(2), np.eye(2)
        Z = simulate_linear(rng, F, H, Q, R, m0, P0, 50)
        states = run_filter(linear_model(F, H, Q, R), ut_cfg(2, 1e6), Z, StudentFilterState(m0, P0, 1e6))
        return (F, H, Q, R, m0, P0, Z), states

    def test_student_near_gaussian_means(self, rng):
        args, states = self.run_near_gaussian(rng)
        km, _ = kalman(*args)
        for s, m in zip(states, km):
            assert np.linalg.norm(s.mean - m) <= 1e-6 * np.linalg.norm(m)

    @pytest.mark.xfail(strict=True, reason="the Student factor (nu-2+beta)/(nu-2+d_z) departs from 1 by "
                       "(beta-d_z)/1e6, i.e. up to ~6e-6 on this run")
    def test_student_near_gaussian_covariances(self, rng):
        args, states = self.run_near_gaussian(rng)
        _, kP = kalman(*args)
        for s, P in zip(states, kP):
            assert np.linalg.norm(s.cov - P) <= 1e-6 * np.linalg.norm(P)

    def test_student_matches_scaled_kalman(self, rng):
        # Kalman recursion with the Student covariance factor applied by hand
        (F, H, Q, R, m0, P0, Z), states = self.run_near_gaussian(rng)
        nu = 1e6
        m, P = m0, P0
        for z, s in zip(Z, states):
            m, P = F @ m, F @ P @ F.T + Q
            S = H @ P @ H.T + R
            e = z - H @ m
            beta = float(e @ np.linalg.solve(S, e))
            G = np.linalg.solve(S, H @ P).T
            m = m + G @ e
            P = (nu - 2 + beta) / (nu - 1) * (P - G @ S @ G.T)
            assert_allclose(s.mean, m, rtol=1e-9, atol=1e-12)
            assert_allclose(s.cov, P, rtol=1e-9, atol=1e-12)

    def test_ukf_exact(self, rng):
        F, H, Q, R = self.setup_model(rng, 3)
        m0, P0 = np.zeros(3), np.eye(3)
        Z = simulate_linear(rng, F, H, Q, R, m0, P0, 40)
        km, kP = kalman(F, H, Q, R, m0, P0, Z)
        out = run_ukf(linear_model(F, H, Q, R), 0.0, Z, GaussianDist(m0, P0))
        assert_allclose([s.mean for s in out], km, rtol=1e-8, atol=1e-8)
        assert_allclose([s.cov for s in out], kP, rtol=1e-8, atol=1e-10)

    def test_trace_non_increasing_static(self):
        model = linear_model(np.eye(2), np.eye(2), 1e-12 * np.eye(2), np.eye(2))
        Z = np.tile([1.0, -1.0], (20, 1))
        out = run_ukf(model, 0.0, Z, GaussianDist(np.zeros(2), 4 * np.eye(2)))
        tr = [np.trace(s.cov) for s in out]
        assert all(b <= a + 1e-12 for a, b in zip(tr[1:], tr[2:]))


class TestUkf:
    def test_zero_innovation(self):
        model = linear_model(np.eye(1), np.eye(1), [[1.0]], [[1.0]])
        out = ukf_step(GaussianDist([1.5], [[1.0]]), model, 2.0, [1.5])
        assert_allclose(out.mean, [1.5])

    def test_ungm_reproducible(self):
        model = ungm_model()
        a = ukf_step(GaussianDist([0.0], [[1.0]]), model, 2.0, [0.7], 1)
        b = ukf_step(GaussianDist([0.0], [[1.0]]), model, 2.0, [0.7], 1)
        assert np.all(np.isfinite(a.mean)) and np.all(np.isfinite(a.cov))
        assert_array_equal(a.mean, b.mean)


class TestRunFilter:
    def test_empty(self):
        assert run_filter(ungm_model(), ut_cfg(1, 4.0), np.zeros((0, 1)), StudentFilterState([0.0], [[1.0]], 4.0)) == []

    def test_ungm_250_pd(self):
        from tpqsf.harness.scenarios import simulate, ungm_scenario

        _, Z = simulate(ungm_scenario(n_trajectories=1, n_steps=250, master_seed=3))
        states = run_filter(ungm_model(), bq_cfg(1, 4.0, [3.0, 3.0], 10.0), Z[0],
                            StudentFilterState([0.0], [[1.0]], 4.0))
        assert len(states) == 250
        assert all(np.linalg.eigvalsh(s.cov)[0] > 0 for s in states)

    def test_failure_reports_step(self):
        def bad_h(x, r, k):
            return np.full((1, x.shape[1]), np.nan) if k == 3 else x + r

        model = StateSpaceModel(lambda x, q, k: x + q, bad_h, [[1.0]], [[1.0]], 1, 1)
        with pytest.raises(FilterFailure) as exc:
            run_filter(model, ut_cfg(1, 5.0), np.zeros((5, 1)), StudentFilterState([0.0], [[1.0]], 5.0))
        assert exc.value.step == 2
        assert len(exc.value.states) == 2

    def test_interchangeable_transforms(self, rng):
        model = ungm_model()
        Z = rng.standard_normal((10, 1))
        init = StudentFilterState([0.0], [[1.0]], 4.0)
        for cfg in (ut_cfg(1, 4.0), bq_cfg(1, 4.0, [3.0, 1.0], 5.0), bq_cfg(1, 4.0, [3.0, 1.0], np.inf)):
            out = run_filter(model, cfg, Z, init)
            assert [s.mean.shape for s in out] == [(1,)] * 10
            assert all(s.dof == 4.0 for s in out)

    def test_angle_wrapping(self):
        model = radar_model()
        e = model.wrap_innovation(np.array([0.0, 2 * np.pi - 0.1]))
        assert_allclose(e, [0.0, -0.1])
        assert model.wrap_innovation(np.array([0.0, np.pi]))[1] == pytest.approx(np.pi)
        assert model.wrap_innovation(np.array([0.0, -np.pi]))[1] == pytest.approx(np.pi)
