"""Student-t sigma-point filter with pluggable moment transforms, and a UKF."""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import block_diag

from .errors import DofTooSmall, FilterFailure, NotPositiveDefinite, SingularInnovationCovariance
from .quadrature import fully_symmetric_points, ut_weights
from .stats import GaussianDist, chol_solve, cholesky_spd, tri_solve
from .transforms import ClassicalMT, TransformInput, psd_repair


@dataclass(frozen=True)
class StateSpaceModel:
    """Discrete-time model ``x_k = f(x_{k-1}, q_{k-1}, k)``, ``z_k = h(x_k, r_k, k)``.

    Evaluators are vectorized over columns. ``process_noise_cov`` and
    ``measurement_noise_cov`` are the covariances the filter *assumes*. For
    additive models the noise enters as ``G q`` (``process_noise_gain``, default
    identity) and ``r``. ``angle_indices`` lists measurement components whose
    innovations are wrapped to ``(-pi, pi]``.
    """

    dynamics: object
    measurement: object
    process_noise_cov: np.ndarray
    measurement_noise_cov: np.ndarray
    dim_state: int
    dim_meas: int
    dynamics_additive: bool = True
    measurement_additive: bool = True
    process_noise_gain: np.ndarray = None
    angle_indices: tuple = ()

    def __post_init__(self):
        Q = np.atleast_2d(np.asarray(self.process_noise_cov, dtype=float))
        R = np.atleast_2d(np.asarray(self.measurement_noise_cov, dtype=float))
        cholesky_spd(Q)
        cholesky_spd(R)
        object.__setattr__(self, "process_noise_cov", Q)
        object.__setattr__(self, "measurement_noise_cov", R)
        G = self.process_noise_gain
        G = np.eye(self.dim_state, Q.shape[0]) if G is None else np.atleast_2d(np.asarray(G, float))
        object.__setattr__(self, "process_noise_gain", G)

    @property
    def dim_process_noise(self):
        return self.process_noise_cov.shape[0]

    @property
    def dim_meas_noise(self):
        return self.measurement_noise_cov.shape[0]

    def additive_process_cov(self):
        G = self.process_noise_gain
        return G @ self.process_noise_cov @ G.T

    def wrap_innovation(self, e):
        if self.angle_indices:
            e = e.copy()
            idx = list(self.angle_indices)
            # wrap to (-pi, pi]
            e[idx] = -((-e[idx] + np.pi) % (2 * np.pi) - np.pi)
        return e


@dataclass(frozen=True)
class StudentFilterState:
    mean: np.ndarray
    cov: np.ndarray
    dof: float

    def __post_init__(self):
        if not float(self.dof) > 2:
            raise DofTooSmall("filter dof must be > 2")
        object.__setattr__(self, "mean", np.atleast_1d(np.asarray(self.mean, dtype=float)))
        object.__setattr__(self, "cov", np.atleast_2d(np.asarray(self.cov, dtype=float)))
        object.__setattr__(self, "dof", float(self.dof))


@dataclass
class FilterConfig:
    """Transforms for the two filter stages and the operating dof.

    A transform is any callable ``TransformInput -> MomentTriple`` exposing
    ``dim``; see :class:`tpqsf.transforms.ClassicalMT` and
    :class:`tpqsf.transforms.BayesQuadMT`.
    """

    transform_dynamics: object
    transform_measurement: object
    operating_dof: float
    label: str = field(default="")


def _dynamics_input(state, model, cfg, k):
    n = model.dim_state
    if model.dynamics_additive:
        zeros = np.zeros((model.dim_process_noise, 1))
        fn = lambda X: model.dynamics(X, np.broadcast_to(zeros, (zeros.shape[0], X.shape[1])), k)
        return TransformInput(state.mean, state.cov, cfg.operating_dof, fn, "additive",
                              model.additive_process_cov())
    m = np.concatenate([state.mean, np.zeros(model.dim_process_noise)])
    P = block_diag(state.cov, model.process_noise_cov)
    fn = lambda XQ: model.dynamics(XQ[:n], XQ[n:], k)
    return TransformInput(m, P, cfg.operating_dof, fn, "augmented")


def _measurement_input(mean, cov, model, dof, k):
    n = model.dim_state
    if model.measurement_additive:
        zeros = np.zeros((model.dim_meas_noise, 1))
        fn = lambda X: model.measurement(X, np.broadcast_to(zeros, (zeros.shape[0], X.shape[1])), k)
        return TransformInput(mean, cov, dof, fn, "additive", model.measurement_noise_cov)
    m = np.concatenate([mean, np.zeros(model.dim_meas_noise)])
    P = block_diag(cov, model.measurement_noise_cov)
    fn = lambda XR: model.measurement(XR[:n], XR[n:], k)
    return TransformInput(m, P, dof, fn, "augmented")


def predict(state, model, cfg, k=1):
    """Predictive state mean and covariance through the dynamics transform."""
    mt = cfg.transform_dynamics(_dynamics_input(state, model, cfg, k))
    return mt.mean, mt.cov


def measurement_moments(pred, model, transform, dof, k=1):
    """Predicted measurement mean, covariance and state-measurement cross-covariance."""
    mean, cov = pred
    mt = transform(_measurement_input(mean, cov, model, dof, k))
    return mt.mean, mt.cov, mt.cross_cov[: model.dim_state]


def student_update(mean, cov, z_mean, z_cov, cross, innovation, dof):
    """Student-t conditioning of the state on one measurement.

    Returns
    -------
    mean_post : ndarray
    cov_post : ndarray
        ``(dof - 2 + beta) / (dof - 2 + d_z) * (P - C S^{-1} C')`` before any repair.
    beta : float
        Squared Mahalanobis norm of the innovation.
    dof_post : float
        ``dof + d_z``.

    Raises
    ------
    SingularInnovationCovariance
    """
    try:
        Ls = cholesky_spd(z_cov)
    except NotPositiveDefinite as exc:
        raise SingularInnovationCovariance(str(exc)) from exc
    gain = chol_solve(Ls, np.ascontiguousarray(cross.T)).T
    w = tri_solve(Ls, innovation)
    beta = float(w @ w)
    d_z = innovation.size
    m = mean + gain @ innovation
    if np.isinf(dof):
        factor = 1.0
    else:
        factor = (dof - 2.0 + beta) / (dof - 2.0 + d_z)
    P = factor * (cov - gain @ cross.T)
    return m, P, beta, dof + d_z


def update(pred, model, cfg, z, k=1):
    """Measurement update; the dof is reset to the operating value afterwards."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    mz, Sz, C = measurement_moments(pred, model, cfg.transform_measurement, cfg.operating_dof, k)
    e = model.wrap_innovation(z - mz)
    m, P, _, _ = student_update(pred[0], pred[1], mz, Sz, C, e, cfg.operating_dof)
    P = psd_repair(0.5 * (P + P.T))
    # moment-matched dof reset: covariance is kept, only the nominal dof changes
    return StudentFilterState(m, P, cfg.operating_dof)


def run_filter(model, cfg, z_sequence, init):
    """Iterate predict/update over ``z_sequence`` (shape ``(K, d_z)``).

    Raises
    ------
    FilterFailure
        Carrying the failing step index and the states computed before it.
    """
    states = []
    state = init
    for k, z in enumerate(z_sequence, start=1):
        try:
            pred = predict(state, model, cfg, k)
            state = update(pred, model, cfg, z, k)
            if not (np.all(np.isfinite(state.mean)) and np.all(np.isfinite(state.cov))):
                raise FloatingPointError("non-finite filter state")
        except (np.linalg.LinAlgError, FloatingPointError, ValueError) as exc:
            raise FilterFailure(k - 1, states, exc) from exc
        states.append(state)
    return states


@lru_cache(maxsize=None)
def _ukf_transform(dim, kappa):
    return ClassicalMT(fully_symmetric_points(dim, kappa), ut_weights(dim, kappa))


def ukf_step(state, model, kappa, z, k=1):
    """One unscented Kalman filter step (UT predict, Kalman-form update)."""
    mt_dyn = _ukf_transform(model.dim_state if model.dynamics_additive
                            else model.dim_state + model.dim_process_noise, kappa)
    cfg = FilterConfig(mt_dyn, None, np.inf)
    st = StudentFilterState(state.mean, state.cov, np.inf)
    pred = predict(st, model, cfg, k)
    mt_meas = _ukf_transform(model.dim_state if model.measurement_additive
                             else model.dim_state + model.dim_meas_noise, kappa)
    z = np.atleast_1d(np.asarray(z, dtype=float))
    mz, Sz, C = measurement_moments(pred, model, mt_meas, np.inf, k)
    e = model.wrap_innovation(z - mz)
    m, P, _, _ = student_update(pred[0], pred[1], mz, Sz, C, e, np.inf)
    return GaussianDist(m, psd_repair(0.5 * (P + P.T)))


def run_ukf(model, kappa, z_sequence, init):
    """UKF recursion; returns a list of :class:`GaussianDist`."""
    states = []
    state = init
    for k, z in enumerate(z_sequence, start=1):
        try:
            state = ukf_step(state, model, kappa, z, k)
            if not (np.all(np.isfinite(state.mean)) and np.all(np.isfinite(state.cov))):
                raise FloatingPointError("non-finite filter state")
        except (np.linalg.LinAlgError, FloatingPointError, ValueError) as exc:
            raise FilterFailure(k - 1, states, exc) from exc
        states.append(state)
    return states
