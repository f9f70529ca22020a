"""Benchmark scenarios: the non-stationary growth model and CV radar with glint."""

from dataclasses import dataclass, field, replace

import numpy as np

from ..filters import StateSpaceModel
from ..stats import GaussianDist, GaussianMixture, sample_gaussian, sample_mixture

MASK64 = (1 << 64) - 1
MRAD2 = 1e-6  # mrad^2 -> rad^2


def splitmix64(x):
    """One splitmix64 output for the 64-bit state ``x``."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def trajectory_seed(master_seed, index):
    """Sub-seed of trajectory ``index``: ``splitmix64(splitmix64(master) + index)``."""
    return splitmix64((splitmix64(int(master_seed) & MASK64) + int(index)) & MASK64)


# ---------------------------------------------------------------- models

def ungm_dynamics(x, q, k):
    return 0.5 * x + 25.0 * x / (1.0 + x * x) + 8.0 * np.cos(1.2 * k) + q


def ungm_measurement(x, r, k):
    return 0.05 * x * x + r


def cv_matrices(tau):
    F = np.array([[1.0, tau, 0.0, 0.0],
                  [0.0, 1.0, 0.0, 0.0],
                  [0.0, 0.0, 1.0, tau],
                  [0.0, 0.0, 0.0, 1.0]])
    G = np.array([[0.5 * tau ** 2, 0.0],
                  [tau, 0.0],
                  [0.0, 0.5 * tau ** 2],
                  [0.0, tau]])
    return F, G


def make_cv_dynamics(tau):
    F, G = cv_matrices(tau)

    def dynamics(x, q, k):
        return F @ x + G @ q

    return dynamics


def radar_measurement(x, r, k):
    px, py = x[0], x[2]
    return np.vstack([np.sqrt(px * px + py * py), np.arctan2(py, px)]) + r


def ungm_model(process_noise_cov=10.0, measurement_noise_cov=0.01):
    return StateSpaceModel(ungm_dynamics, ungm_measurement, [[process_noise_cov]],
                           [[measurement_noise_cov]], dim_state=1, dim_meas=1)


def radar_model(tau=0.5, process_noise_cov=None, measurement_noise_cov=None):
    Q = np.diag([50.0, 5.0]) if process_noise_cov is None else process_noise_cov
    R = np.diag([50.0, 0.4 * MRAD2]) if measurement_noise_cov is None else measurement_noise_cov
    _, G = cv_matrices(tau)
    return StateSpaceModel(make_cv_dynamics(tau), radar_measurement, Q, R, dim_state=4, dim_meas=2,
                           process_noise_gain=G, angle_indices=(1,))


# ---------------------------------------------------------------- scenario

@dataclass(frozen=True)
class Scenario:
    """Ground-truth simulation setup; noise laws are the *true* mixtures."""

    kind: str
    n_trajectories: int
    n_steps: int
    master_seed: int
    x0: GaussianDist
    process_noise: GaussianMixture
    measurement_noise: GaussianMixture
    tau: float = 0.5
    glint_probability: float = 0.0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("ungm", "radar_cv"):
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if self.n_trajectories < 1 or self.n_steps < 1:
            raise ValueError("trajectory and step counts must be >= 1")
        if not 0.0 <= self.glint_probability <= 1.0:
            raise ValueError("glint probability must lie in [0, 1]")

    def truth_model(self):
        if self.kind == "ungm":
            return ungm_model()
        return radar_model(self.tau)

    def filter_model(self, process_noise_cov, measurement_noise_cov):
        """Model with the scenario's dynamics and the given *assumed* noise covariances."""
        if self.kind == "ungm":
            return ungm_model(float(np.ravel(process_noise_cov)[0]), float(np.ravel(measurement_noise_cov)[0]))
        return radar_model(self.tau, np.atleast_2d(process_noise_cov), np.atleast_2d(measurement_noise_cov))

    @property
    def dim_state(self):
        return self.x0.dim

    def with_overrides(self, **kw):
        return replace(self, **kw)


def _scalar_mixture(weights_scales, base):
    return GaussianMixture(tuple((w, GaussianDist([0.0], [[s * base]])) for w, s in weights_scales))


def ungm_scenario(n_trajectories=500, n_steps=250, master_seed=0, Q=10.0, R=0.01,
                  process_outlier=(0.2, 10.0), measurement_outlier=(0.2, 100.0),
                  x0_mean=0.0, x0_var=1.0):
    """UNGM truth: ``(1-w) N(0, Q) + w N(0, s Q)`` for both noises with ``(w, s)`` outlier pairs."""
    wq, sq = process_outlier
    wr, sr = measurement_outlier
    return Scenario(
        kind="ungm", n_trajectories=n_trajectories, n_steps=n_steps, master_seed=master_seed,
        x0=GaussianDist([x0_mean], [[x0_var]]),
        process_noise=_scalar_mixture(((1.0 - wq, 1.0), (wq, sq)), Q),
        measurement_noise=_scalar_mixture(((1.0 - wr, 1.0), (wr, sr)), R),
    )


def glint_mixture(beta, R1=None, R2=None):
    """``(1 - beta) N(0, R1) + beta N(0, R2)``; bearings in rad^2."""
    R1 = np.diag([50.0, 0.4 * MRAD2]) if R1 is None else np.atleast_2d(R1)
    R2 = np.diag([5000.0, 16.0 * MRAD2]) if R2 is None else np.atleast_2d(R2)
    z = np.zeros(2)
    return GaussianMixture(((1.0 - beta, GaussianDist(z, R1)), (beta, GaussianDist(z, R2))))


RADAR_M0 = (10000.0, 300.0, 1000.0, -40.0)
RADAR_P0 = (10000.0, 100.0, 10000.0, 100.0)


def radar_scenario(n_trajectories=1000, n_steps=100, master_seed=0, glint_probability=0.15, tau=0.5,
                   Q=None, R1=None, R2=None, x0_mean=RADAR_M0, x0_cov=None):
    Q = np.diag([50.0, 5.0]) if Q is None else np.atleast_2d(Q)
    x0_cov = np.diag(RADAR_P0) if x0_cov is None else np.atleast_2d(x0_cov)
    return Scenario(
        kind="radar_cv", n_trajectories=n_trajectories, n_steps=n_steps, master_seed=master_seed,
        x0=GaussianDist(np.asarray(x0_mean, float), x0_cov),
        process_noise=GaussianMixture(((1.0, GaussianDist(np.zeros(2), Q)),)),
        measurement_noise=glint_mixture(glint_probability, R1, R2),
        tau=tau, glint_probability=glint_probability,
    )


# ---------------------------------------------------------------- simulation

def propagate(model, x0, q_seq, r_seq):
    """Deterministic trajectory from given initial state and noise sequences.

    ``q_seq[k-1]`` drives the transition into step ``k`` and ``r_seq[k-1]``
    corrupts the measurement at step ``k`` for ``k = 1..K``.
    """
    K = len(q_seq)
    x = np.asarray(x0, dtype=float)[:, None]
    X = np.empty((K, model.dim_state))
    Z = np.empty((K, model.dim_meas))
    for k in range(1, K + 1):
        x = model.dynamics(x, q_seq[k - 1][:, None], k)
        X[k - 1] = x[:, 0]
        Z[k - 1] = model.measurement(x, r_seq[k - 1][:, None], k)[:, 0]
    return X, Z


def simulate_trajectory(s, index):
    streams = np.random.SeedSequence(trajectory_seed(s.master_seed, index)).spawn(3)
    x0 = sample_gaussian(s.x0, 1, streams[0])[0]
    q = sample_mixture(s.process_noise, s.n_steps, streams[1])
    r = sample_mixture(s.measurement_noise, s.n_steps, streams[2])
    return propagate(s.truth_model(), x0, q, r)


def simulate(s):
    """Simulate every trajectory; returns ``(X, Z)`` of shapes ``(M, K, n)`` and ``(M, K, d_z)``."""
    X, Z = zip(*(simulate_trajectory(s, i) for i in range(s.n_trajectories)))
    return np.stack(X), np.stack(Z)
