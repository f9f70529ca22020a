"""Filter line-ups and the benchmark runner.

A :class:`FilterEntry` describes one row of a results table: which filter
family, its sigma points, kernel parameters and model dof, and the noise model
the filter *assumes*. :func:`run_benchmark` simulates the scenario once, runs
every entry on the same measurements and scores the runs.
"""

import json
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .. import _backend
from ..cache import ExpectationCache
from ..errors import ConfigError, FilterFailure
from ..filters import FilterConfig, StudentFilterState, run_filter, run_ukf
from ..kernels import DEFAULT_MC_SAMPLES, RbfParams, gram_matrix
from ..quadrature import bq_weights, fully_symmetric_points, ut_weights
from ..stats import GaussianDist
from ..transforms import BayesQuadMT, ClassicalMT
from .metrics import BOOTSTRAP_RESAMPLES, bootstrap_std, inc, mse_matrices, rmse
from .scenarios import simulate

log = logging.getLogger(__name__)

FAMILIES = ("ukf", "sf", "gpqsf", "tpqsf")
REPORT_FORMAT = 1


@dataclass(frozen=True)
class AssumedModel:
    """Noise and prior statistics a filter assumes (covariances, not scales)."""

    x0_mean: tuple
    x0_cov: tuple
    process_noise_cov: tuple
    measurement_noise_cov: tuple
    x0_dof: float = np.inf
    process_dof: float = np.inf
    measurement_dof: float = np.inf

    def arrays(self):
        return (np.atleast_1d(np.asarray(self.x0_mean, float)), np.atleast_2d(np.asarray(self.x0_cov, float)),
                np.atleast_2d(np.asarray(self.process_noise_cov, float)),
                np.atleast_2d(np.asarray(self.measurement_noise_cov, float)))


@dataclass(frozen=True)
class ExpectationSettings:
    method: str = "mixture"
    n_samples: int = DEFAULT_MC_SAMPLES
    seed: int = 0


@dataclass(frozen=True)
class FilterEntry:
    """One benchmarked filter.

    ``kappa`` sets the fully symmetric point set (and the UT weights for the
    ``ukf`` and ``sf`` families). ``theta_*`` and ``model_dof`` apply to the
    BQ families only; ``tpqsf`` requires a finite ``model_dof`` above 2.
    """

    label: str
    family: str
    assumed: AssumedModel
    operating_dof: float = np.inf
    kappa: float = 0.0
    theta_dynamics: tuple = None
    theta_measurement: tuple = None
    model_dof: float = np.inf

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"{self.label}: unknown filter family {self.family!r}")
        if self.family in ("gpqsf", "tpqsf") and (self.theta_dynamics is None or self.theta_measurement is None):
            raise ConfigError(f"{self.label}: BQ filters need theta_dynamics and theta_measurement")
        if self.family == "tpqsf" and not (np.isfinite(self.model_dof) and self.model_dof > 2):
            raise ConfigError(f"{self.label}: tpqsf needs a finite model dof > 2")
        if self.family != "ukf" and not self.operating_dof > 2:
            raise ConfigError(f"{self.label}: operating dof must be > 2")

    def check_dims(self, n, d_z):
        m0, P0, Q, R = self.assumed.arrays()
        if m0.shape != (n,) or P0.shape != (n, n) or R.shape != (d_z, d_z):
            raise ConfigError(f"{self.label}: assumed model does not match scenario dimensions")
        for theta in (self.theta_dynamics, self.theta_measurement):
            if theta is not None and len(theta) != n + 1:
                raise ConfigError(f"{self.label}: kernel parameters need {n + 1} entries")


def _bq_transform(entry, theta, points, settings, cache):
    ke = cache.get(theta, points.points, entry.operating_dof, settings.method, settings.n_samples, settings.seed)
    p = RbfParams.from_theta(theta)
    dof = entry.model_dof if entry.family == "tpqsf" else np.inf
    w = bq_weights(ke, gram_matrix(p, points.points), dof, points=points.points, theta=theta)
    return BayesQuadMT(w, points, use_gamma=entry.family == "tpqsf")


def make_runner(entry, scenario, settings=ExpectationSettings(), cache=None):
    """Callable ``z_sequence -> (means, covs)`` for ``entry`` on ``scenario``.

    Raises :class:`~tpqsf.errors.FilterFailure` when the underlying recursion fails.
    """
    cache = ExpectationCache() if cache is None else cache
    n = scenario.dim_state
    m0, P0, Q, R = entry.assumed.arrays()
    model = scenario.filter_model(Q, R)
    entry.check_dims(n, model.dim_meas)
    points = fully_symmetric_points(n, entry.kappa)

    if entry.family == "ukf":
        init = GaussianDist(m0, P0)

        def run(z):
            return run_ukf(model, entry.kappa, z, init)
    else:
        if entry.family == "sf":
            mt = ClassicalMT(points, ut_weights(n, entry.kappa))
            cfg = FilterConfig(mt, mt, entry.operating_dof, entry.label)
        else:
            cfg = FilterConfig(_bq_transform(entry, entry.theta_dynamics, points, settings, cache),
                               _bq_transform(entry, entry.theta_measurement, points, settings, cache),
                               entry.operating_dof, entry.label)
        init = StudentFilterState(m0, P0, entry.operating_dof)

        def run(z):
            return run_filter(model, cfg, z, init)

    def runner(z):
        states = run(z)
        return np.array([s.mean for s in states]), np.array([s.cov for s in states])

    return runner


@dataclass
class FilterResult:
    label: str
    family: str
    mean_rmse: float
    rmse_std: float
    mean_inc: float
    inc_std: float
    rmse: list
    inc: list
    failures: list = field(default_factory=list)

    def to_dict(self):
        return {
            "label": self.label, "family": self.family,
            "mean_rmse": _num(self.mean_rmse), "rmse_std": _num(self.rmse_std),
            "mean_inc": _num(self.mean_inc), "inc_std": _num(self.inc_std),
            "rmse": [_num(v) for v in self.rmse], "inc": [_num(v) for v in self.inc],
            "failures": list(self.failures),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["label"], d["family"], _val(d["mean_rmse"]), _val(d["rmse_std"]), _val(d["mean_inc"]),
                   _val(d["inc_std"]), [_val(v) for v in d["rmse"]], [_val(v) for v in d["inc"]],
                   list(d.get("failures", [])))


def _num(x):
    # JSON has no NaN; a failed trajectory is written as null
    x = float(x)
    return x if np.isfinite(x) else None


def _val(x):
    return np.nan if x is None else float(x)


@dataclass
class MetricsReport:
    """Per-filter aggregates and raw per-trajectory scores, plus run metadata."""

    rows: list
    metadata: dict

    def row(self, label):
        for r in self.rows:
            if r.label == label:
                return r
        raise KeyError(label)

    @property
    def labels(self):
        return [r.label for r in self.rows]

    def to_dict(self):
        return {"format": REPORT_FORMAT, "metadata": self.metadata, "rows": [r.to_dict() for r in self.rows]}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        return cls([FilterResult.from_dict(r) for r in d["rows"]], d["metadata"])

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def _aggregate(values, seed, n_resamples):
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    if v.size == 0:
        return np.nan, np.nan
    std = bootstrap_std(v, n_resamples, seed) if v.size >= 2 else 0.0
    return float(v.mean()), std


def score_runs(X, means, covs, ok):
    """Per-trajectory RMSE and INC for one filter; failed trajectories score NaN."""
    M = X.shape[0]
    r = np.full(M, np.nan)
    c = np.full(M, np.nan)
    if not ok.any():
        return r, c
    sigma = mse_matrices(X[ok], means[ok])
    for i in np.flatnonzero(ok):
        r[i] = rmse(X[i], means[i])
        c[i] = inc(X[i], means[i], covs[i], sigma)
    return r, c


def _entry_metadata(e):
    def listify(t):
        return None if t is None else [float(v) for v in t]

    return {
        "label": e.label, "family": e.family, "kappa": float(e.kappa),
        "operating_dof": _dof(e.operating_dof), "model_dof": _dof(e.model_dof),
        "theta_dynamics": listify(e.theta_dynamics), "theta_measurement": listify(e.theta_measurement),
    }


def _dof(x):
    return "inf" if np.isinf(x) else float(x)


def run_benchmark(scenario, filters, output_path=None, settings=ExpectationSettings(), cache=None,
                  bootstrap_resamples=BOOTSTRAP_RESAMPLES, bootstrap_seed=None, simulated=None):
    """Simulate ``scenario`` once and score every entry of ``filters`` on it.

    Parameters
    ----------
    scenario : Scenario
    filters : list of FilterEntry
    output_path : str, optional
        Where to write the JSON report.
    settings : ExpectationSettings
        Estimator used for the BQ kernel expectations.
    cache : ExpectationCache, optional
    bootstrap_seed : int, optional
        Defaults to the scenario's master seed.
    simulated : tuple, optional
        Precomputed ``simulate(scenario)`` output.
    """
    if len({f.label for f in filters}) != len(filters):
        raise ConfigError("filter labels must be unique")
    cache = ExpectationCache() if cache is None else cache
    runners = [make_runner(f, scenario, settings, cache) for f in filters]
    X, Z = simulate(scenario) if simulated is None else simulated
    M, K, n = X.shape
    seed = scenario.master_seed if bootstrap_seed is None else bootstrap_seed
    rows = []
    for entry, runner in zip(filters, runners):
        t0 = time.perf_counter()
        means = np.zeros((M, K, n))
        covs = np.tile(np.eye(n), (M, K, 1, 1))
        ok = np.ones(M, dtype=bool)
        failures = []
        for i in range(M):
            try:
                means[i], covs[i] = runner(Z[i])
            except FilterFailure as exc:
                ok[i] = False
                failures.append({"trajectory": i, "step": exc.step, "error": repr(exc.cause)})
        if failures:
            log.warning("%s failed on %d of %d trajectories", entry.label, len(failures), M)
        r, c = score_runs(X, means, covs, ok)
        mr, sr = _aggregate(r, seed, bootstrap_resamples)
        mc, sc = _aggregate(c, seed, bootstrap_resamples)
        rows.append(FilterResult(entry.label, entry.family, mr, sr, mc, sc, list(r), list(c), failures))
        log.info("%-12s RMSE %.4f (%.4f)  INC %.4f (%.4f)  %.1fs", entry.label, mr, sr, mc, sc,
                 time.perf_counter() - t0)
    metadata = {
        "scenario": scenario.kind,
        "n_trajectories": M,
        "n_steps": K,
        "master_seed": int(scenario.master_seed),
        "glint_probability": float(scenario.glint_probability),
        "expectations": {"method": settings.method, "n_samples": int(settings.n_samples),
                         "seed": int(settings.seed)},
        "bootstrap": {"resamples": int(bootstrap_resamples), "seed": int(seed)},
        "filters": [_entry_metadata(f) for f in filters],
        "backend": _backend.BACKEND,
        "created": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    report = MetricsReport(rows, metadata)
    if output_path is not None:
        report.save(output_path)
    return report
