import numpy as np
import pytest

from tpqsf.filters import StateSpaceModel


def random_spd(rng, d, cond=10.0):
    Qm, _ = np.linalg.qr(rng.standard_normal((d, d)))
    lam = np.exp(rng.uniform(0.0, np.log(cond), size=d))
    return (Qm * lam) @ Qm.T


def linear_model(F, H, Q, R):
    """Linear model with additive noise, vectorized over columns."""
    F = np.asarray(F, float)
    H = np.asarray(H, float)
    return StateSpaceModel(lambda x, q, k: F @ x + q, lambda x, r, k: H @ x + r, Q, R,
                           dim_state=F.shape[0], dim_meas=H.shape[0])


def kalman(F, H, Q, R, m0, P0, Z):
    """Textbook Kalman filter, written independently of the package."""
    m, P = np.asarray(m0, float), np.asarray(P0, float)
    means, covs = [], []
    for z in Z:
        m = F @ m
        P = F @ P @ F.T + Q
        S = H @ P @ H.T + R
        G = np.linalg.solve(S, H @ P).T
        m = m + G @ (z - H @ m)
        P = P - G @ S @ G.T
        means.append(m)
        covs.append(P)
    return np.array(means), np.array(covs)


def simulate_linear(rng, F, H, Q, R, m0, P0, K):
    x = rng.multivariate_normal(m0, P0)
    Z = []
    for _ in range(K):
        x = F @ x + rng.multivariate_normal(np.zeros(len(x)), Q)
        Z.append(H @ x + rng.multivariate_normal(np.zeros(H.shape[0]), R))
    return np.array(Z)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


# one summary line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
