"""Gaussian and Student-t distributions, mixture sampling and SPD helpers.

Every public constructor speaks *covariance*. The Student-t scale matrix
``(dof - 2) / dof * cov`` is derived internally and exposed read-only.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack

from .errors import DimensionMismatch, DofTooSmall, NotPositiveDefinite

# multipliers of trace(M)/d tried in order after a plain factorization fails
JITTER_LADDER = tuple(10.0 ** -p for p in range(12, 5, -1))


def cholesky_jitter(M, ladder=JITTER_LADDER):
    """Lower Cholesky factor of a symmetric matrix with escalating diagonal jitter.

    Parameters
    ----------
    M : (d, d) array_like
        Symmetric matrix.
    ladder : sequence of float
        Relative jitter levels; the absolute jitter is ``level * trace(M) / d``.

    Returns
    -------
    L : (d, d) ndarray
        Lower-triangular factor with ``L @ L.T == M + jitter * I``.
    jitter : float
        Absolute diagonal addition that was applied (0.0 when none was needed).

    Raises
    ------
    NotPositiveDefinite
        If every rung of the ladder fails.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise NotPositiveDefinite("matrix has non-finite entries")
    scale = np.abs(M).max() if M.size else 1.0
    if np.abs(M - M.T).max() > 1e-8 * max(scale, 1e-300):
        raise ValueError("matrix is not symmetric")
    L, info = lapack.dpotrf(M, lower=1, clean=1)
    if info == 0:
        return L, 0.0
    d = M.shape[0]
    base = np.trace(M) / d
    if not base > 0:
        base = 1.0
    eye = np.eye(d)
    for level in ladder:
        jitter = level * base
        L, info = lapack.dpotrf(M + jitter * eye, lower=1, clean=1)
        if info == 0:
            return L, jitter
    raise NotPositiveDefinite("matrix is not positive definite after jitter ladder")


def cholesky_spd(M, ladder=JITTER_LADDER):
    """Lower-triangular ``L`` with ``L @ L.T`` equal to ``M`` (plus any applied jitter)."""
    return cholesky_jitter(M, ladder)[0]


def chol_solve(L, B):
    """Solve ``(L L') X = B`` given the lower factor ``L``."""
    X, info = lapack.dpotrs(L, B, lower=1)
    if info != 0:
        raise ValueError(f"dpotrs failed with info={info}")
    return X


def tri_solve(L, B):
    """Solve ``L X = B`` for lower-triangular ``L``."""
    X, info = lapack.dtrtrs(L, B, lower=1)
    if info != 0:
        raise NotPositiveDefinite(f"singular triangular factor (info={info})")
    return X


def _rng(seed):
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class GaussianDist:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        if cov.shape != (mean.size, mean.size):
            raise DimensionMismatch("covariance shape does not match mean")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self):
        return self.mean.size

    def covariance(self):
        return self.cov


class StudentDist:
    """Multivariate Student-t law parameterized by its covariance.

    Parameters
    ----------
    mean : (d,) array_like
    cov : (d, d) array_like
        Covariance matrix, not the scale matrix.
    dof : float
        Degrees of freedom, strictly greater than 2. ``np.inf`` is allowed and
        denotes the Gaussian limit.
    """

    __slots__ = ("mean", "scale", "dof", "_cov")

    def __init__(self, mean, cov, dof):
        dof = float(dof)
        if not dof > 2:
            raise DofTooSmall(f"dof must be > 2, got {dof}")
        mean = np.atleast_1d(np.asarray(mean, dtype=float))
        cov = np.atleast_2d(np.asarray(cov, dtype=float))
        if cov.shape != (mean.size, mean.size):
            raise DimensionMismatch("covariance shape does not match mean")
        factor = 1.0 if np.isinf(dof) else (dof - 2.0) / dof
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "scale", factor * cov)
        object.__setattr__(self, "dof", dof)
        object.__setattr__(self, "_cov", cov)

    def __setattr__(self, name, value):
        raise AttributeError("StudentDist is immutable")

    def __repr__(self):
        return f"StudentDist(mean={self.mean!r}, scale={self.scale!r}, dof={self.dof})"

    @property
    def dim(self):
        return self.mean.size

    def covariance(self):
        """``dof / (dof - 2) * scale``."""
        if np.isinf(self.dof):
            return self.scale.copy()
        return self.dof / (self.dof - 2.0) * self.scale


def student_from_covariance(mean, cov, dof):
    """Student-t law with the given covariance; the scale is ``(dof - 2) / dof * cov``."""
    return StudentDist(mean, cov, dof)


@dataclass(frozen=True)
class GaussianMixture:
    """Finite mixture of Gaussians given as ``(weight, GaussianDist)`` pairs."""

    components: tuple = field(default_factory=tuple)

    def __post_init__(self):
        comps = tuple((float(w), g) for w, g in self.components)
        if not comps:
            raise ValueError("mixture needs at least one component")
        weights = np.array([w for w, _ in comps])
        if np.any(weights < 0) or np.any(weights > 1):
            raise ValueError("mixture weights must lie in [0, 1]")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError(f"mixture weights sum to {weights.sum()}, not 1")
        dims = {g.dim for _, g in comps}
        if len(dims) != 1:
            raise DimensionMismatch("mixture components differ in dimension")
        object.__setattr__(self, "components", comps)

    @property
    def weights(self):
        return np.array([w for w, _ in self.components])

    @property
    def dim(self):
        return self.components[0][1].dim

    def mean(self):
        return sum(w * g.mean for w, g in self.components)

    def covariance(self):
        m = self.mean()
        return sum(w * (g.cov + np.outer(g.mean - m, g.mean - m)) for w, g in self.components)


def sample_gaussian(dist, n, seed):
    """Draw ``n`` rows from a Gaussian; ``seed`` is an int or a ``SeedSequence``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = _rng(seed)
    L = cholesky_spd(dist.cov)
    g = rng.standard_normal((n, dist.dim))
    return dist.mean + g @ L.T


def sample_student(dist, n, seed):
    """Draw ``n`` rows as ``mean + L g / sqrt(w / dof)`` with ``L L' = scale``.

    ``g`` is standard normal and ``w`` chi-square with ``dof`` degrees of freedom.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = _rng(seed)
    L = cholesky_spd(dist.scale)
    g = rng.standard_normal((n, dist.dim))
    if np.isinf(dist.dof):
        return dist.mean + g @ L.T
    w = rng.chisquare(dist.dof, size=n)
    return dist.mean + (g / np.sqrt(w / dist.dof)[:, None]) @ L.T


def sample_mixture(mix, n, seed):
    """Draw ``n`` rows from a Gaussian mixture.

    The seed is split into one stream for the categorical component labels and
    one stream per component, so a single-component mixture reproduces
    ``sample_gaussian(component, n, SeedSequence(seed).spawn(2)[1])``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    streams = ss.spawn(1 + len(mix.components))
    weights = mix.weights
    if len(weights) == 1:
        labels = np.zeros(n, dtype=np.intp)
    else:
        labels = _rng(streams[0]).choice(len(weights), size=n, p=weights / weights.sum())
    out = np.empty((n, mix.dim))
    for c, (_, comp) in enumerate(mix.components):
        idx = np.flatnonzero(labels == c)
        if idx.size:
            out[idx] = sample_gaussian(comp, idx.size, streams[1 + c])
    return out
