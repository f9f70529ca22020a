"""RBF kernel, Gram matrices and kernel expectations under a standardized input.

The standardized input ``xi`` has zero mean and *unit covariance*; for a
Student-t input with ``dof`` degrees of freedom its scale matrix is
``(dof - 2) / dof * I``. Student-t expectations come from antithetic Monte Carlo or from a
deterministic quadrature over the chi-square mixing variable; the Gaussian
limit has a closed form.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, stats

from . import _backend
from .errors import DimensionMismatch, DofTooSmall
from .stats import cholesky_jitter

DEFAULT_MC_SAMPLES = 200_000
# pairs per chunk; each chunk draws from its own counter-keyed substream
MC_CHUNK_PAIRS = 1 << 15
KBAR2_NODES = 400


@dataclass(frozen=True)
class RbfParams:
    """RBF kernel parameters ``theta = [alpha, ell_1, ..., ell_d]``."""

    scale: float
    lengthscales: np.ndarray

    def __post_init__(self):
        ell = np.atleast_1d(np.asarray(self.lengthscales, dtype=float))
        alpha = float(self.scale)
        if not (np.isfinite(alpha) and alpha > 0):
            raise ValueError(f"kernel scale must be positive and finite, got {alpha}")
        if not np.all(np.isfinite(ell)) or np.any(ell <= 0):
            raise ValueError("lengthscales must be positive and finite")
        ell.setflags(write=False)
        object.__setattr__(self, "scale", alpha)
        object.__setattr__(self, "lengthscales", ell)

    @classmethod
    def from_theta(cls, theta):
        theta = np.asarray(theta, dtype=float).ravel()
        return cls(theta[0], theta[1:])

    @property
    def theta(self):
        return np.concatenate(([self.scale], self.lengthscales))

    @property
    def dim(self):
        return self.lengthscales.size

    @property
    def inv_ell(self):
        return 1.0 / self.lengthscales


@dataclass(frozen=True)
class KernelExpectations:
    """Expectations of the kernel under the standardized input density.

    ``q[i] = E[k(xi, u_i)]``, ``Qm[i, j] = E[k(xi, u_i) k(xi, u_j)]``,
    ``Rm[:, j] = E[xi k(xi, u_j)]``, ``kbar = E[k(xi, xi)]`` and
    ``kbar2 = E[k(xi, xi')]`` for independent ``xi, xi'``. The ``*_se`` fields
    hold Monte Carlo standard errors (zeros for closed-form values).
    """

    q: np.ndarray
    Qm: np.ndarray
    Rm: np.ndarray
    kbar: float
    kbar2: float
    input_dof: float
    mc_samples: int = 0
    seed: object = None
    q_se: np.ndarray = field(default=None, repr=False)
    Qm_se: np.ndarray = field(default=None, repr=False)
    Rm_se: np.ndarray = field(default=None, repr=False)
    kbar2_se: float = 0.0

    def __post_init__(self):
        for name in ("q", "Qm", "Rm"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} has non-finite entries")
            object.__setattr__(self, name, arr)
            se = getattr(self, name + "_se")
            object.__setattr__(self, name + "_se", np.zeros_like(arr) if se is None else np.asarray(se, float))

    @property
    def num_points(self):
        return self.q.size


def _check_dims(p, *arrays):
    for a in arrays:
        if a.shape[0] != p.dim:
            raise DimensionMismatch(f"point dimension {a.shape[0]} != kernel dimension {p.dim}")


def kernel_eval(p, u, v):
    """``alpha^2 exp(-0.5 (u - v)' Lambda^{-1} (u - v))`` with ``Lambda = diag(ell^2)``."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if u.shape != (p.dim,) or v.shape != (p.dim,):
        raise DimensionMismatch("argument dimensions do not match lengthscales")
    r = (u - v) * p.inv_ell
    return p.scale ** 2 * float(np.exp(-0.5 * (r @ r)))


def kernel_matrix(p, X1, X2):
    """Cross kernel matrix between column sets ``X1`` (d, n1) and ``X2`` (d, n2)."""
    X1 = np.atleast_2d(np.asarray(X1, dtype=float))
    X2 = np.atleast_2d(np.asarray(X2, dtype=float))
    _check_dims(p, X1, X2)
    return _backend.kernels.rbf_cross(
        np.ascontiguousarray(X1.T), np.ascontiguousarray(X2.T), p.scale, np.ascontiguousarray(p.inv_ell)
    )


def gram_matrix(p, points):
    """Jitter-regularized Gram matrix of the columns of ``points`` (d, N)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    K = kernel_matrix(p, points, points)
    K = 0.5 * (K + K.T)
    _, jitter = cholesky_jitter(K)
    if jitter:
        K = K + jitter * np.eye(K.shape[0])
    return K


def _standard_draws(rng, m, d, dof):
    g = rng.standard_normal((m, d))
    if np.isinf(dof):
        return g
    w = rng.chisquare(dof, size=m)
    return g * np.sqrt((dof - 2.0) / w)[:, None]


def _mean_se(s, ss, n):
    mean = s / n
    var = np.maximum(ss / n - mean * mean, 0.0) * n / (n - 1)
    return mean, np.sqrt(var / n)


def mc_expectations(p, unit_points, input_dof, n_samples=DEFAULT_MC_SAMPLES, seed=0):
    """Monte Carlo kernel expectations under a unit-covariance Student-t input.

    Draws are paired antithetically as ``(xi, -xi)``; ``n_samples`` counts all
    evaluated points, i.e. ``n_samples // 2`` pairs. Chunk ``c`` uses the
    substream ``SeedSequence(seed, spawn_key=(c,))`` so the result does not
    depend on how chunks are scheduled.
    """
    input_dof = float(input_dof)
    if not input_dof > 2:
        raise DofTooSmall(f"input dof must be > 2, got {input_dof}")
    if n_samples < 10_000:
        raise ValueError("n_samples must be >= 1e4")
    U = np.atleast_2d(np.asarray(unit_points, dtype=float))
    _check_dims(p, U)
    d, N = U.shape
    Ur = np.ascontiguousarray(U.T)
    inv_ell = np.ascontiguousarray(p.inv_ell)
    n_pairs = int(n_samples) // 2
    acc = None
    done = 0
    chunk = 0
    while done < n_pairs:
        m = min(MC_CHUNK_PAIRS, n_pairs - done)
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk,)))
        xi = _standard_draws(rng, m, d, input_dof)
        eta = _standard_draws(rng, m, d, input_dof)
        part = _backend.kernels.mc_accumulate(xi, eta, Ur, p.scale, inv_ell)
        acc = list(part) if acc is None else [a + b for a, b in zip(acc, part)]
        done += m
        chunk += 1
    q, q_se = _mean_se(acc[0], acc[1], n_pairs)
    Qm, Qm_se = _mean_se(acc[2], acc[3], n_pairs)
    Rm, Rm_se = _mean_se(acc[4], acc[5], n_pairs)
    kbar2, kbar2_se = _mean_se(acc[6], acc[7], n_pairs)
    Qm = 0.5 * (Qm + Qm.T)
    return KernelExpectations(
        q=q, Qm=Qm, Rm=Rm, kbar=p.scale ** 2, kbar2=float(kbar2), input_dof=input_dof,
        mc_samples=2 * n_pairs, seed=seed, q_se=q_se, Qm_se=Qm_se, Rm_se=Rm_se, kbar2_se=float(kbar2_se),
    )


def _conditional_terms(p, U, s2):
    """Closed-form expectations against ``N(0, s2 * I)`` for each entry of ``s2``.

    Returns ``q`` (m, N), ``Qm`` (m, N, N) and ``Rm`` (m, d, N).
    """
    s2 = np.asarray(s2, dtype=float)[:, None]
    a2 = p.scale ** 2
    il = p.inv_ell ** 2  # diagonal of Lambda^{-1}
    lam = p.lengthscales ** 2
    # q_i = a2 det(I + s2 Lambda^{-1})^{-1/2} exp(-0.5 u_i' (Lambda + s2 I)^{-1} u_i)
    c = a2 * np.prod(1.0 + s2 * il, axis=1) ** -0.5
    denom = lam[None, :] + s2  # (m, d)
    q = c[:, None] * np.exp(-0.5 * np.einsum("kn,mk->mn", U * U, 1.0 / denom))
    Rm = q[:, None, :] * (s2 / denom)[:, :, None] * U[None, :, :]
    # product of two kernels: precision A = 2 Lambda^{-1} + I / s2
    sA = 2.0 * s2 * il + 1.0  # s2 * A, (m, d)
    B = U * il[:, None]
    cu = np.sum(U * B, axis=0)
    b = B[:, :, None] + B[:, None, :]
    quad = np.einsum("kij,mk,kij->mij", b, s2 / sA, b)
    Qm = (a2 * a2 * np.prod(sA, axis=1) ** -0.5)[:, None, None] * np.exp(
        0.5 * quad - 0.5 * (cu[:, None] + cu[None, :])
    )
    return q, Qm, Rm


def gaussian_expectations(p, unit_points):
    """Closed-form kernel expectations under a standard Gaussian input."""
    U = np.atleast_2d(np.asarray(unit_points, dtype=float))
    _check_dims(p, U)
    q, Qm, Rm = _conditional_terms(p, U, [1.0])
    Qm = 0.5 * (Qm[0] + Qm[0].T)
    a2 = p.scale ** 2
    kbar2 = a2 * np.prod(1.0 + 2.0 * p.inv_ell ** 2) ** -0.5
    return KernelExpectations(q=q[0], Qm=Qm, Rm=Rm[0], kbar=a2, kbar2=float(kbar2), input_dof=np.inf)


def mixture_expectations(p, unit_points, input_dof, epsrel=1e-12):
    """Kernel expectations under a unit-covariance Student-t input by 1-D quadrature.

    A Student-t vector is a Gaussian whose covariance ``s2 * I`` carries the
    random factor ``s2 = (dof - 2) / w`` with ``w ~ chi2(dof)``. Given ``s2``
    every expectation has a closed form, so only the scalar mixing variable is
    integrated, adaptively over its probability scale. The result is
    deterministic and accurate to roughly ``epsrel``. This matters whenever
    the Gram matrix is badly conditioned: ``K^{-1} Q K^{-1}`` amplifies any
    noise in ``Qm``, and Monte Carlo noise alone can push the filter off track.
    """
    input_dof = float(input_dof)
    if not input_dof > 2:
        raise DofTooSmall(f"input dof must be > 2, got {input_dof}")
    if np.isinf(input_dof):
        return gaussian_expectations(p, unit_points)
    U = np.atleast_2d(np.asarray(unit_points, dtype=float))
    _check_dims(p, U)
    d, N = U.shape

    def s2_at(u):
        return (input_dof - 2.0) / stats.chi2.ppf(u, input_dof)

    def integrand(u):
        q, Qm, Rm = _conditional_terms(p, U, [s2_at(u)])
        return np.concatenate([q.ravel(), Qm.ravel(), Rm.ravel()])

    v, _ = integrate.quad_vec(integrand, 0.0, 1.0, epsabs=0.0, epsrel=epsrel)
    q = v[:N]
    Qm = v[N:N + N * N].reshape(N, N)
    Rm = v[N + N * N:].reshape(d, N)
    a2 = p.scale ** 2
    il = p.inv_ell ** 2

    # kbar2 needs two independent mixing factors; the inner one uses a fixed
    # Gauss-Legendre rule on the probability scale
    nodes, weights = np.polynomial.legendre.leggauss(KBAR2_NODES)
    t2 = s2_at(0.5 * (nodes + 1.0))
    weights = 0.5 * weights

    def k2(u):
        return weights @ (a2 * np.prod(1.0 + (s2_at(u) + t2)[:, None] * il, axis=1) ** -0.5)

    kbar2, _ = integrate.quad_vec(k2, 0.0, 1.0, epsabs=0.0, epsrel=epsrel)
    return KernelExpectations(
        q=q, Qm=0.5 * (Qm + Qm.T), Rm=Rm, kbar=a2, kbar2=float(kbar2), input_dof=input_dof,
    )


EXPECTATION_METHODS = ("auto", "mc", "mixture", "gaussian")


def kernel_expectations(p, unit_points, input_dof, method="auto", n_samples=DEFAULT_MC_SAMPLES, seed=0):
    """Pick an estimator.

    ``'auto'`` uses the closed form for infinite dof and antithetic Monte Carlo
    otherwise; ``'mc'``, ``'mixture'`` and ``'gaussian'`` force one estimator.
    """
    if method not in EXPECTATION_METHODS:
        raise ValueError(f"unknown expectation method {method!r}")
    if method == "gaussian" or (method == "auto" and np.isinf(input_dof)):
        return gaussian_expectations(p, unit_points)
    if method == "mixture":
        return mixture_expectations(p, unit_points, input_dof)
    return mc_expectations(p, unit_points, input_dof, n_samples=n_samples, seed=seed)
