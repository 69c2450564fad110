"""Metric files and the terminal summary.

Every CSV starts with a ``# schema v1`` comment line followed by a header
row. Floats are written with 6 significant digits (``%.6g``), NaN as
``nan``. Files are byte-stable: the same report always renders to the
same bytes.

=================  ===========================================================
file               columns
=================  ===========================================================
plr.csv            class, run, plr (``run`` is ``mean`` for the cross-run row)
delay_cdf.csv      class, delay_ms, cdf (one row per distinct delay)
outage_cdf.csv     vue, outage, cdf (VUEs with SINR samples, sorted by outage)
rb_usage.csv       class, mean_rbs_per_tti
bue_rate_cdf.csv   sum_rate_bps, cdf (one row per distinct BWP-2 TTI sum rate)
summary.json       headline numbers plus the config that produced them
sweep.csv          num_cues, satisfied_fraction, cue_plr, cue_mean_delay_ms
=================  ===========================================================
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .metrics import Report, empirical_cdf

SCHEMA_LINE = "# schema v1"
METRIC_FILES = ("plr.csv", "delay_cdf.csv", "outage_cdf.csv", "rb_usage.csv", "bue_rate_cdf.csv")


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    return "nan" if np.isnan(x) else f"{x:.6g}"


def _csv(header: list[str], rows) -> str:
    lines = [SCHEMA_LINE, ",".join(header)]
    lines += [",".join(v if isinstance(v, str) else fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _distinct_cdf(values):
    """CDF collapsed to the last level of each distinct value."""
    x, f = empirical_cdf(values)
    if not len(x):
        return []
    last = np.r_[x[1:] != x[:-1], True]
    return list(zip(x[last], f[last]))


def plr_csv(report: Report) -> str:
    rows = []
    for cls, runs in report.plr_per_run.items():
        rows += [(cls, k, v) for k, v in enumerate(runs)]
        if runs:
            rows.append((cls, "mean", report.plr[cls]))
    return _csv(["class", "run", "plr"], rows)


def delay_cdf_csv(report: Report) -> str:
    rows = [(cls, d, f) for cls, samples in report.delay_samples.items() for d, f in _distinct_cdf(samples)]
    return _csv(["class", "delay_ms", "cdf"], rows)


def outage_cdf_csv(report: Report) -> str:
    out = np.asarray(report.vue_outage, dtype=float)
    idx = np.flatnonzero(~np.isnan(out))
    idx = idx[np.argsort(out[idx], kind="stable")]
    n = len(idx)
    return _csv(["vue", "outage", "cdf"], [(int(v), out[v], (k + 1) / n) for k, v in enumerate(idx)])


def rb_usage_csv(report: Report) -> str:
    return _csv(["class", "mean_rbs_per_tti"], sorted(report.mean_rbs.items()))


def bue_rate_cdf_csv(report: Report) -> str:
    return _csv(["sum_rate_bps", "cdf"], _distinct_cdf(report.bue_sum_rate_samples))


def summary_json(report: Report, cfg=None) -> str:
    doc = report.summary_dict()
    doc["cue_rbs_when_saturated"] = [int(x) for x in report.cue_rbs_when_saturated]
    if cfg is not None:
        doc["config"] = cfg.to_dict()
    return json.dumps(_round_floats(doc), indent=2, sort_keys=True) + "\n"


def _round_floats(obj):
    if isinstance(obj, float):
        return float(f"{obj:.6g}") if np.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def render_files(report: Report, cfg=None) -> dict[str, str]:
    """File name -> contents for every metric file."""
    return {
        "plr.csv": plr_csv(report),
        "delay_cdf.csv": delay_cdf_csv(report),
        "outage_cdf.csv": outage_cdf_csv(report),
        "rb_usage.csv": rb_usage_csv(report),
        "bue_rate_cdf.csv": bue_rate_cdf_csv(report),
        "summary.json": summary_json(report, cfg),
    }


def _write(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_outputs(report: Report, out_dir, cfg=None) -> list[Path]:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc.strerror or exc}") from exc
    paths = []
    for name, text in render_files(report, cfg).items():
        _write(out / name, text)
        paths.append(out / name)
    return paths


def summary_table(report: Report) -> str:
    d = report.summary_dict()

    def cell(x, scale=1.0, digits=4):
        return "-" if x is None else f"{x * scale:.{digits}g}"

    rows = [
        ("algorithm", report.algorithm),
        ("runs", str(report.num_runs)),
        ("CUEs", str(report.num_cues)),
        ("CUE PLR", cell(d["plr"].get("cue"))),
        ("VUE PLR", cell(d["plr"].get("vue"))),
        ("CUE mean delay [ms]", cell(d["mean_delay_ms"].get("cue"))),
        ("VUE mean delay [ms]", cell(d["mean_delay_ms"].get("vue"))),
        ("VUE outage (max over VUEs)", cell(d["vue_outage_max"])),
        ("CUE RBs per TTI", cell(d["mean_rbs"].get("cue"))),
        ("VUE RBs per TTI", cell(d["mean_rbs"].get("vue"))),
        ("BUE RBs per TTI", cell(d["mean_rbs"].get("bue"))),
        ("CUE sum rate [Mbps]", cell(d["cue_sum_rate_bps"], 1e-6)),
        ("BUE sum rate [Mbps]", cell(d["bue_sum_rate_mean_bps"], 1e-6)),
        ("satisfied CUEs", cell(d["satisfied_fraction"])),
        ("constraint violations", str(d["violations"])),
        ("packets conserved", "yes" if d["conservation_ok"] else "NO"),
    ]
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def sweep_csv(rows) -> str:
    """``rows`` are ``(num_cues, satisfied_fraction, cue_plr, cue_mean_delay_ms)`` tuples."""
    return _csv(["num_cues", "satisfied_fraction", "cue_plr", "cue_mean_delay_ms"],
                [(int(c), s, p, d) for c, s, p, d in rows])
