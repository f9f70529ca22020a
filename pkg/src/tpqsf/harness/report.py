"""Render a :class:`~tpqsf.harness.benchmark.MetricsReport` as CSV, JSON or Markdown."""

import csv
import io

TABLE_FIELDS = ("label", "mean_rmse", "rmse_std", "mean_inc", "inc_std")
FORMATS = ("csv", "json", "md")


def _cell(x, digits):
    return "" if x != x else f"{x:.{digits}f}"  # empty for NaN


def to_csv(report):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_FIELDS)
    for r in report.rows:
        w.writerow([r.label] + [repr(float(getattr(r, f))) for f in TABLE_FIELDS[1:]])
    return buf.getvalue()


def to_markdown(report, digits=2):
    meta = report.metadata
    lines = [
        f"{meta.get('scenario', '?')}: {meta.get('n_trajectories', '?')} trajectories x "
        f"{meta.get('n_steps', '?')} steps, master seed {meta.get('master_seed', '?')}",
        "",
        "| Filter | RMSE | RMSE std | INC | INC std | failed |",
        "|---|---:|---:|---:|---:|---:|",
    ]
    for r in report.rows:
        lines.append(
            f"| {r.label} | {_cell(r.mean_rmse, digits)} | {_cell(r.rmse_std, digits)} | "
            f"{_cell(r.mean_inc, digits)} | {_cell(r.inc_std, digits)} | {len(r.failures)} |"
        )
    return "\n".join(lines) + "\n"


def render(report, fmt):
    if fmt == "csv":
        return to_csv(report)
    if fmt == "json":
        return report.to_json()
    if fmt == "md":
        return to_markdown(report)
    raise ValueError(f"unknown format {fmt!r}; choose from {FORMATS}")
