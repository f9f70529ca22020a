"""Command line entry point ``tpqsf``.

Exit status: 0 on success, 1 for configuration errors, 2 for runtime failures.
"""

import argparse
import logging
import os
import sys

from ..cache import ExpectationCache
from ..errors import ConfigError
from ..quadrature import fully_symmetric_points
from . import report as report_mod
from .benchmark import MetricsReport, run_benchmark

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def _parser():
    p = argparse.ArgumentParser(prog="tpqsf", description="Student-t sigma-point filter benchmarks")
    p.add_argument("-v", "--verbose", action="store_true", help="log per-filter progress")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bench", help="run a benchmark and write a JSON report")
    b.add_argument("scenario", choices=["ungm", "radar"])
    b.add_argument("--config", help="TOML file merged over the scenario defaults")
    b.add_argument("--trajectories", type=int)
    b.add_argument("--steps", type=int)
    b.add_argument("--seed", type=int, help="master seed of the simulation")
    b.add_argument("--glint", type=float, help="radar glint probability")
    b.add_argument("--out", default="report.json", help="report path (default: report.json)")
    b.add_argument("--cache", help="directory for cached kernel expectations")
    b.add_argument("--plots", action="store_true", help="write SVG boxplots next to the report")

    w = sub.add_parser("precompute-weights", help="compute and cache kernel expectations")
    w.add_argument("--config", required=True)
    w.add_argument("--out", required=True, help="cache directory")

    r = sub.add_parser("report", help="render a saved JSON report")
    r.add_argument("--in", dest="inp", required=True)
    r.add_argument("--format", choices=report_mod.FORMATS, default="md")
    return p


def _overrides(args):
    sc = {}
    if args.trajectories is not None:
        sc["n_trajectories"] = args.trajectories
    if args.steps is not None:
        sc["n_steps"] = args.steps
    if args.seed is not None:
        sc["master_seed"] = args.seed
    if args.glint is not None:
        sc["glint_probability"] = args.glint
    return {"scenario": sc} if sc else {}


def _bench(args):
    from .config import load_config

    cfg = load_config(args.scenario, args.config, _overrides(args))
    cache = ExpectationCache(args.cache) if args.cache else None
    rep = run_benchmark(cfg.scenario, cfg.filters, args.out, cfg.expectations, cache,
                        cfg.bootstrap_resamples, cfg.bootstrap_seed)
    sys.stdout.write(report_mod.to_markdown(rep))
    if args.plots:
        from .plots import write_boxplots

        stem = os.path.splitext(os.path.basename(args.out))[0]
        for path in write_boxplots(rep, os.path.dirname(os.path.abspath(args.out)), stem):
            print(path)
    return EXIT_OK


def _precompute(args):
    from .config import load_config

    cfg = load_config(None, args.config)
    cache = ExpectationCache(args.out)
    ex = cfg.expectations
    n = cfg.scenario.dim_state
    for f in cfg.filters:
        if f.family not in ("gpqsf", "tpqsf"):
            continue
        pts = fully_symmetric_points(n, f.kappa).points
        for theta in (f.theta_dynamics, f.theta_measurement):
            cache.get(theta, pts, f.operating_dof, ex.method, ex.n_samples, ex.seed)
    print(f"{len(cache)} kernel expectation sets in {args.out}")
    return EXIT_OK


def _report(args):
    rep = MetricsReport.load(args.inp)
    sys.stdout.write(report_mod.render(rep, args.format))
    return EXIT_OK


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {"bench": _bench, "precompute-weights": _precompute, "report": _report}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG if args.command != "report" else EXIT_RUNTIME
    except Exception as exc:  # any other failure is a runtime failure
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
