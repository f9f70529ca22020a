"""TOML configuration for benchmark runs.

The packaged files ``configs/ungm.toml`` and ``configs/radar.toml`` hold the
defaults. A user file is merged over the default of its scenario kind: tables
merge key by key, and a ``filters`` array replaces the default line-up.
"""

import copy
import sys
from dataclasses import dataclass
from importlib import resources

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..errors import ConfigError
from ..kernels import EXPECTATION_METHODS
from .benchmark import AssumedModel, ExpectationSettings, FilterEntry
from .scenarios import radar_scenario, ungm_scenario

KIND_FILES = {"ungm": "ungm.toml", "radar_cv": "radar.toml"}
KIND_ALIASES = {"ungm": "ungm", "radar": "radar_cv", "radar_cv": "radar_cv"}
FILTER_KEYS = {"label", "family", "kappa", "operating_dof", "theta_dynamics", "theta_measurement",
               "model_dof", "assumed"}


@dataclass
class BenchmarkConfig:
    scenario: object
    filters: list
    expectations: ExpectationSettings
    bootstrap_resamples: int
    bootstrap_seed: object
    raw: dict


def canonical_kind(kind):
    try:
        return KIND_ALIASES[kind]
    except KeyError:
        raise ConfigError(f"unknown scenario kind {kind!r}") from None


def default_dict(kind):
    """Parsed packaged default config for ``kind`` (``'ungm'`` or ``'radar'``)."""
    name = KIND_FILES[canonical_kind(kind)]
    text = resources.files(__package__).joinpath("configs", name).read_text(encoding="utf-8")
    return tomllib.loads(text)


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def read_file(path):
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _matrix(x, name):
    """Scalar -> 1x1, vector -> diagonal, nested list -> matrix."""
    a = np.asarray(x, dtype=float)
    if a.ndim == 0:
        return a.reshape(1, 1)
    if a.ndim == 1:
        return np.diag(a)
    if a.ndim == 2 and a.shape[0] == a.shape[1]:
        return a
    raise ConfigError(f"{name}: expected a scalar, a diagonal or a square matrix")


def _tup(a):
    a = np.asarray(a, dtype=float)
    return tuple(map(tuple, a)) if a.ndim == 2 else tuple(a.ravel())


def _count(d, key):
    v = d.get(key)
    if not isinstance(v, int) or isinstance(v, bool) or v < 1:
        raise ConfigError(f"scenario.{key} must be a positive integer, got {v!r}")
    return v


def build_scenario(sc):
    kind = canonical_kind(sc.get("kind", ""))
    common = dict(n_trajectories=_count(sc, "n_trajectories"), n_steps=_count(sc, "n_steps"),
                  master_seed=int(sc.get("master_seed", 0)))
    try:
        if kind == "ungm":
            return ungm_scenario(Q=float(sc["Q"]), R=float(sc["R"]),
                                 process_outlier=tuple(sc["process_outlier"]),
                                 measurement_outlier=tuple(sc["measurement_outlier"]),
                                 x0_mean=float(sc["x0_mean"]), x0_var=float(sc["x0_var"]), **common)
        if "glint_probability" not in sc:
            raise ConfigError("scenario.glint_probability is required for radar runs")
        return radar_scenario(glint_probability=float(sc["glint_probability"]), tau=float(sc["tau"]),
                              Q=_matrix(sc["Q"], "Q"), R1=_matrix(sc["R1"], "R1"), R2=_matrix(sc["R2"], "R2"),
                              x0_mean=np.asarray(sc["x0_mean"], float), x0_cov=_matrix(sc["x0_cov"], "x0_cov"),
                              **common)
    except KeyError as exc:
        raise ConfigError(f"scenario is missing {exc.args[0]!r}") from None
    except (TypeError, ValueError, np.linalg.LinAlgError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid scenario: {exc}") from exc


def _assumed(d):
    try:
        return AssumedModel(
            x0_mean=tuple(np.atleast_1d(np.asarray(d["x0_mean"], float))),
            x0_cov=_tup(_matrix(d["x0_cov"], "x0_cov")),
            process_noise_cov=_tup(_matrix(d["process_noise_cov"], "process_noise_cov")),
            measurement_noise_cov=_tup(_matrix(d["measurement_noise_cov"], "measurement_noise_cov")),
            x0_dof=float(d.get("x0_dof", np.inf)),
            process_dof=float(d.get("process_dof", np.inf)),
            measurement_dof=float(d.get("measurement_dof", np.inf)),
        )
    except KeyError as exc:
        raise ConfigError(f"assumed model is missing {exc.args[0]!r}") from None


def build_filters(cfg):
    defaults = cfg.get("defaults", {})
    base_assumed = cfg.get("assumed", {})
    entries = []
    for i, f in enumerate(cfg.get("filters", [])):
        unknown = set(f) - FILTER_KEYS
        if unknown:
            raise ConfigError(f"filters[{i}]: unknown keys {sorted(unknown)}")
        if "label" not in f or "family" not in f:
            raise ConfigError(f"filters[{i}]: label and family are required")
        family = f["family"]
        bq = family in ("gpqsf", "tpqsf")

        def pick(key, fallback=None):
            return f.get(key, defaults.get(key, fallback))

        theta_f = pick("theta_dynamics") if bq else None
        theta_h = pick("theta_measurement") if bq else None
        op = float(pick("operating_dof", np.inf)) if family != "ukf" else np.inf
        entries.append(FilterEntry(
            label=str(f["label"]), family=family,
            assumed=_assumed(_merge(base_assumed, f.get("assumed", {}))),
            operating_dof=op, kappa=float(pick("kappa", 0.0)),
            theta_dynamics=None if theta_f is None else tuple(float(t) for t in theta_f),
            theta_measurement=None if theta_h is None else tuple(float(t) for t in theta_h),
            model_dof=float(f.get("model_dof", np.inf)),
        ))
    if not entries:
        raise ConfigError("no filters configured")
    return entries


def build_config(cfg):
    scenario = build_scenario(cfg.get("scenario", {}))
    filters = build_filters(cfg)
    for f in filters:
        f.check_dims(scenario.dim_state, scenario.measurement_noise.dim)
    ex = cfg.get("expectations", {})
    method = ex.get("method", "mixture")
    if method not in EXPECTATION_METHODS:
        raise ConfigError(f"expectations.method must be one of {EXPECTATION_METHODS}")
    n_samples = int(ex.get("n_samples", 200_000))
    if method == "mc" and n_samples < 10_000:
        raise ConfigError("expectations.n_samples must be >= 10000")
    bs = cfg.get("bootstrap", {})
    return BenchmarkConfig(
        scenario=scenario, filters=filters,
        expectations=ExpectationSettings(method, n_samples, int(ex.get("seed", 0))),
        bootstrap_resamples=int(bs.get("resamples", 10_000)),
        bootstrap_seed=bs.get("seed"), raw=cfg,
    )


def load_config(kind=None, path=None, overrides=None):
    """Defaults for ``kind`` merged with the file at ``path`` and a dict of ``overrides``.

    When ``kind`` is omitted it is read from the file's ``scenario.kind``.
    """
    user = read_file(path) if path else {}
    file_kind = user.get("scenario", {}).get("kind")
    if kind is None and file_kind is None:
        raise ConfigError("scenario kind not given")
    kind = canonical_kind(kind or file_kind)
    if file_kind is not None and canonical_kind(file_kind) != kind:
        raise ConfigError(f"config file is for {file_kind!r}, not {kind!r}")
    cfg = _merge(default_dict(kind), user)  # arrays such as filters are replaced, not merged
    if overrides:
        cfg = _merge(cfg, overrides)
    return build_config(cfg)
