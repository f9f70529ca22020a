"""Scoring of filter runs: RMSE, the inclination indicator (INC) and bootstrap spread."""

import numpy as np

from ..errors import LengthMismatch, NotPositiveDefinite, SingularMatrix, TooFewValues
from ..stats import cholesky_jitter

BOOTSTRAP_RESAMPLES = 10_000
_BOOTSTRAP_CHUNK = 500


def _as_steps(a):
    """View a trajectory as ``(K, n)``; a 1-D input is a scalar state per step."""
    a = np.asarray(a, dtype=float)
    return a[:, None] if a.ndim == 1 else a


def rmse(truth, estimates):
    """Root mean squared error ``sqrt(mean_k ||x_k - m_k||^2)`` over one trajectory."""
    x = _as_steps(truth)
    m = _as_steps(estimates)
    if x.shape != m.shape:
        raise LengthMismatch(f"truth {x.shape} and estimates {m.shape} differ")
    e = x - m
    return float(np.sqrt(np.mean(np.sum(e * e, axis=1))))


def mse_matrices(truth, estimates):
    """Per-step sample MSE matrices across an ensemble.

    ``truth`` and ``estimates`` have shape ``(M, K, n)``; the result has shape
    ``(K, n, n)`` with ``Sigma_k = mean_i e_ik e_ik'``.
    """
    e = np.asarray(truth, dtype=float) - np.asarray(estimates, dtype=float)
    if e.ndim != 3:
        raise LengthMismatch("expected arrays of shape (M, K, n)")
    return np.einsum("mki,mkj->kij", e, e) / e.shape[0]


def _factor_all(mats, what):
    out = np.empty_like(mats)
    for k, S in enumerate(mats):
        try:
            out[k] = cholesky_jitter(0.5 * (S + S.T))[0]
        except NotPositiveDefinite as exc:
            raise SingularMatrix(f"{what} at step {k} is not positive definite") from exc
    return out


def _quad_forms(factors, e):
    # ||L^{-1} e||^2 for every step, using the lower-triangular factors
    v = np.linalg.solve(factors, e[..., None])[..., 0]
    return np.sum(v * v, axis=-1)


def inc(truth, estimates, covariances, mse):
    """Inclination indicator of one trajectory.

    ``10/K * sum_k log10(e_k' P_k^{-1} e_k / e_k' Sigma_k^{-1} e_k)`` with
    ``e_k = x_k - m_k``. Positive values flag an optimistic filter, negative
    ones a pessimistic filter, and zero a balanced one.

    Parameters
    ----------
    truth, estimates : array_like, shape (K, n) or (K,)
    covariances : array_like, shape (K, n, n) or (K,)
        Filter covariances ``P_k``.
    mse : array_like, shape (K, n, n) or (K,)
        Ensemble MSE matrices ``Sigma_k``, see :func:`mse_matrices`.
    """
    x = _as_steps(truth)
    m = _as_steps(estimates)
    P = np.asarray(covariances, dtype=float)
    S = np.asarray(mse, dtype=float)
    K, n = x.shape
    P = P.reshape(K, n, n)
    S = S.reshape(K, n, n)
    if m.shape != x.shape:
        raise LengthMismatch(f"truth {x.shape} and estimates {m.shape} differ")
    e = x - m
    num = _quad_forms(_factor_all(P, "filter covariance"), e)
    den = _quad_forms(_factor_all(S, "MSE matrix"), e)
    return float(10.0 * np.mean(np.log10(num / den)))


def bootstrap_std(values, n_resamples=BOOTSTRAP_RESAMPLES, seed=0):
    """Standard deviation of the mean over with-replacement resamples of ``values``."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size < 2:
        raise TooFewValues("bootstrap needs at least two values")
    rng = np.random.default_rng(seed)
    means = np.empty(int(n_resamples))
    for start in range(0, means.size, _BOOTSTRAP_CHUNK):
        stop = min(start + _BOOTSTRAP_CHUNK, means.size)
        idx = rng.integers(0, v.size, size=(stop - start, v.size))
        means[start:stop] = v[idx].mean(axis=1)
    return float(np.std(means))
