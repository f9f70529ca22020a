"""Moment transforms: classical quadrature, GPQ and TPQ.

Functions passed to a transform are vectorized over sigma-points: they take a
``(d, N)`` array of points as columns and return an ``(e, N)`` array.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ModelDofTooSmall
from .stats import cholesky_spd

NOISE_MODES = ("none", "additive", "augmented")


@dataclass(frozen=True)
class MomentTriple:
    mean: np.ndarray
    cov: np.ndarray
    cross_cov: np.ndarray


@dataclass(frozen=True)
class TransformInput:
    """Input law and nonlinearity of a moment transform.

    ``cov`` is the input covariance. In ``additive`` mode ``noise_cov`` is added
    to the transformed covariance; in ``augmented`` mode the input already
    stacks state and noise coordinates.
    """

    mean: np.ndarray
    cov: np.ndarray
    dof: float
    function: object
    noise_mode: str = "none"
    noise_cov: np.ndarray = None

    def __post_init__(self):
        if self.noise_mode not in NOISE_MODES:
            raise ValueError(f"noise_mode must be one of {NOISE_MODES}")
        if self.noise_mode == "additive" and self.noise_cov is None:
            raise ValueError("additive noise mode needs noise_cov")
        object.__setattr__(self, "mean", np.atleast_1d(np.asarray(self.mean, dtype=float)))
        object.__setattr__(self, "cov", np.atleast_2d(np.asarray(self.cov, dtype=float)))


def psd_repair(M):
    """Clip eigenvalues below ``1e-10 * max(eig)`` up to that floor.

    Returns ``M`` itself when it is already positive definite above the floor.
    """
    M = np.asarray(M, dtype=float)
    lam = np.linalg.eigvalsh(M)
    top = lam[-1]
    eps = 1e-10 * top if top > 0 else 1e-10
    if lam[0] >= eps:
        return M
    lam, V = np.linalg.eigh(M)
    lam = np.maximum(lam, eps)
    out = (V * lam) @ V.T
    return 0.5 * (out + out.T)


def _sigma_points(inp, unit_points):
    L = cholesky_spd(inp.cov)
    X = inp.mean[:, None] + L @ unit_points
    Y = np.atleast_2d(inp.function(X))
    if Y.shape[1] != unit_points.shape[1]:
        raise ValueError("function must map (d, N) points to (e, N) values")
    return L, X, Y.T  # Y as (N, e)


def _finish(inp, mean, cov, cross):
    cov = 0.5 * (cov + cov.T)
    if inp.noise_mode == "additive":
        cov = cov + inp.noise_cov
    cov = psd_repair(cov)
    return MomentTriple(mean, cov, cross)


def classical_transform(points, weights, inp):
    """Sigma-point transform ``mu = sum w_i f(x_i)`` with ``x_i = m + L xi_i``."""
    xi = points.points if hasattr(points, "points") else np.asarray(points, float)
    w = np.asarray(weights, dtype=float)
    if w.size != xi.shape[1]:
        raise ValueError("one weight per sigma-point required")
    L, X, Y = _sigma_points(inp, xi)
    mu = Y.T @ w
    dY = Y - mu
    dX = X - inp.mean[:, None]
    cov = (dY.T * w) @ dY
    cross = (dX * w) @ dY
    return _finish(inp, mu, cov, cross)


def _bq_transform(w, inp, unit_points, use_gamma):
    L, X, Y = _sigma_points(inp, unit_points)
    mu = Y.T @ w.wm
    cov = Y.T @ w.Wc @ Y - np.outer(mu, mu)
    gamma = w.gamma(Y) if use_gamma else np.ones(Y.shape[1])
    cov = cov + np.diag(gamma * w.expected_model_variance)
    cross = L @ (w.Wcc @ Y)
    return _finish(inp, mu, cov, cross)


def _unit_points(w, points):
    if points is None:
        points = w.points
    if points is None:
        raise ValueError("unit points must be supplied or stored in the weights")
    return points.points if hasattr(points, "points") else np.asarray(points, float)


def tpq_transform(w, inp, points=None):
    """Student-t process quadrature transform.

    Adds ``diag(gamma_e * (kbar - trace(Q K^{-1})))`` to the covariance with a
    separate data factor ``gamma_e`` for each output.
    """
    if not w.model_dof > 2:
        raise ModelDofTooSmall("model dof must be > 2")
    return _bq_transform(w, inp, _unit_points(w, points), use_gamma=True)


def gpq_transform(w, inp, points=None):
    """Gaussian process quadrature transform (``tpq_transform`` with ``gamma_e = 1``)."""
    return _bq_transform(w, inp, _unit_points(w, points), use_gamma=False)


class ClassicalMT:
    """Transform description for a classical sigma-point rule."""

    kind = "classical"

    def __init__(self, points, weights):
        self.points = points
        self.weights = np.asarray(weights, dtype=float)

    @property
    def dim(self):
        return self.points.dim

    def __call__(self, inp):
        return classical_transform(self.points, self.weights, inp)


class BayesQuadMT:
    """Transform description for GPQ (``gamma=False``) or TPQ (``gamma=True``)."""

    def __init__(self, weights, points, use_gamma=True):
        self.weights = weights
        self.points = points
        self.use_gamma = use_gamma
        self.kind = "tpq" if use_gamma else "gpq"

    @property
    def dim(self):
        return self.points.dim

    def __call__(self, inp):
        if self.use_gamma:
            return tpq_transform(self.weights, inp, self.points)
        return gpq_transform(self.weights, inp, self.points)
