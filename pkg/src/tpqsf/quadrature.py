"""Unit sigma-point sets, Bayesian-quadrature weights and TP regression."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch, ModelDofTooSmall
from .kernels import gram_matrix, kernel_eval, kernel_matrix
from .stats import chol_solve, cholesky_jitter, tri_solve


@dataclass(frozen=True)
class UnitSigmaSet:
    """Unit-space sigma-points as columns of a ``(d, N)`` array."""

    points: np.ndarray
    kappa: float = 0.0
    generator: str = "explicit"

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if len({tuple(c) for c in pts.T}) != pts.shape[1]:
            raise ValueError("sigma-point set has duplicate columns")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def dim(self):
        return self.points.shape[0]

    @property
    def num_points(self):
        return self.points.shape[1]


def fully_symmetric_points(d, kappa=0.0):
    """Third-degree fully symmetric set ``{0} U {+-sqrt(d + kappa) e_i}``, ``N = 2d + 1``."""
    if d < 1 or d + kappa <= 0:
        raise ValueError("need d >= 1 and d + kappa > 0")
    c = math.sqrt(d + kappa)
    eye = np.eye(d)
    pts = np.hstack([np.zeros((d, 1)), c * eye, -c * eye])
    return UnitSigmaSet(pts, kappa=float(kappa), generator="fully-symmetric-3")


def ut_weights(d, kappa=0.0):
    """Unscented-transform weights matching :func:`fully_symmetric_points`."""
    if d + kappa <= 0:
        raise ValueError("need d + kappa > 0")
    w = np.full(2 * d + 1, 1.0 / (2.0 * (d + kappa)))
    w[0] = kappa / (d + kappa)
    return w


@dataclass(frozen=True)
class BqWeights:
    """Bayesian-quadrature weights of a fixed unit point set.

    ``wm = K^{-1} q``, ``Wc = K^{-1} Q K^{-1}`` and ``Wcc = R K^{-1}``.
    ``model_dof = inf`` encodes the Gaussian-process model.
    ``expected_model_variance`` is ``kbar - trace(Q K^{-1})``, the bracket that
    scales the covariance inflation.
    """

    wm: np.ndarray
    Wc: np.ndarray
    Wcc: np.ndarray
    kbar: float
    kbar2: float
    gram_inverse_factor: np.ndarray
    input_dof: float
    model_dof: float
    expected_model_variance: float
    q: np.ndarray
    points: np.ndarray = None
    theta: np.ndarray = None

    @property
    def num_points(self):
        return self.wm.size

    def solve_gram(self, b):
        """``K^{-1} b`` through the stored lower factor."""
        return chol_solve(self.gram_inverse_factor, b)

    def gram_quad(self, Y):
        """Column-wise ``y_e' K^{-1} y_e`` for ``Y`` of shape ``(N,)`` or ``(N, e)``."""
        Z = tri_solve(self.gram_inverse_factor, Y)
        return np.sum(Z * Z, axis=0)

    def gamma(self, Y):
        """Data-dependent variance factor ``(nu - 2 + y'K^{-1}y) / (nu - 2 + N)`` per output."""
        if np.isinf(self.model_dof):
            return np.ones(np.shape(Y)[1:] or ())
        nu = self.model_dof
        return (nu - 2.0 + self.gram_quad(Y)) / (nu - 2.0 + self.num_points)

    def with_model_dof(self, model_dof):
        model_dof = float(model_dof)
        if not model_dof > 2:
            raise ModelDofTooSmall(f"model dof must be > 2, got {model_dof}")
        fields = dict(self.__dict__)
        fields["model_dof"] = model_dof
        return BqWeights(**fields)


def bq_weights(ke, K, model_dof=np.inf, points=None, theta=None):
    """Quadrature weights from kernel expectations ``ke`` and Gram matrix ``K``.

    All solves go through the Cholesky factor of ``K``; no explicit inverse is formed.
    """
    model_dof = float(model_dof)
    if not model_dof > 2:
        raise ModelDofTooSmall(f"model dof must be > 2, got {model_dof}")
    K = np.asarray(K, dtype=float)
    if K.shape != (ke.num_points, ke.num_points):
        raise LengthMismatch("Gram matrix does not match the expectation point count")
    L, jitter = cholesky_jitter(K)
    wm = chol_solve(L, ke.q)
    iKQ = chol_solve(L, ke.Qm)
    Wc = chol_solve(L, np.ascontiguousarray(iKQ.T))
    Wc = 0.5 * (Wc + Wc.T)
    Wcc = chol_solve(L, np.ascontiguousarray(ke.Rm.T)).T
    # trace(Q K^{-1}) = trace(L^{-1} Q L^{-T}), symmetric and better conditioned
    A = tri_solve(L, ke.Qm)
    A = tri_solve(L, np.ascontiguousarray(A.T))
    emv = ke.kbar - float(np.trace(A))
    return BqWeights(
        wm=wm, Wc=Wc, Wcc=Wcc, kbar=ke.kbar, kbar2=ke.kbar2, gram_inverse_factor=L,
        input_dof=ke.input_dof, model_dof=model_dof, expected_model_variance=emv, q=ke.q,
        points=None if points is None else np.asarray(points, float),
        theta=None if theta is None else np.asarray(theta, float),
    )


@dataclass(frozen=True)
class RegressionData:
    inputs: np.ndarray
    observations: np.ndarray
    kernel: object
    model_dof: float = np.inf

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        y = np.atleast_1d(np.asarray(self.observations, dtype=float))
        if X.shape[1] != y.size or y.size < 1:
            raise LengthMismatch("need one observation per input column")
        if not np.all(np.isfinite(y)):
            raise ValueError("observations must be finite")
        if not float(self.model_dof) > 2:
            raise ModelDofTooSmall("model dof must be > 2")
        object.__setattr__(self, "inputs", X)
        object.__setattr__(self, "observations", y)
        object.__setattr__(self, "model_dof", float(self.model_dof))


def _posterior(data, query, use_gamma):
    K = gram_matrix(data.kernel, data.inputs)
    L = cholesky_jitter(K)[0]
    query = np.atleast_1d(np.asarray(query, dtype=float))
    k = kernel_matrix(data.kernel, data.inputs, query[:, None])[:, 0]
    alpha = chol_solve(L, data.observations)
    mean = float(k @ alpha)
    v = tri_solve(L, k)
    var = kernel_eval(data.kernel, query, query) - float(v @ v)
    if use_gamma:
        var *= tp_gamma(data, L)
    return mean, max(var, 0.0)


def tp_gamma(data, factor=None):
    """``(nu - 2 + y'K^{-1}y) / (nu - 2 + N)`` for regression data (1 in the GP limit)."""
    if np.isinf(data.model_dof):
        return 1.0
    L = factor if factor is not None else cholesky_jitter(gram_matrix(data.kernel, data.inputs))[0]
    z = tri_solve(L, data.observations)
    nu = data.model_dof
    return (nu - 2.0 + float(z @ z)) / (nu - 2.0 + data.observations.size)


def tp_posterior(data, query):
    """Student-t process posterior mean and variance at a single query point."""
    return _posterior(data, query, use_gamma=True)


def gp_posterior(data, query):
    """Gaussian-process posterior (the TP posterior with the data factor fixed at 1)."""
    return _posterior(data, query, use_gamma=False)


def integral_moments(w, y):
    """Posterior mean and variance of the integral of a TP-modelled integrand.

    The mean is the quadrature rule ``sum_i wm[i] * y[i]`` accumulated with
    ``math.fsum`` (correctly rounded, hence independent of summation order).
    The variance is ``gamma * (kbar2 - q'K^{-1}q)``.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (w.num_points,):
        raise LengthMismatch(f"expected {w.num_points} function values, got shape {y.shape}")
    mean = math.fsum(w.wm * y)
    qKq = float(w.gram_quad(w.q))
    gamma = float(w.gamma(y))
    return mean, gamma * (w.kbar2 - qKq)
