"""Persistence of command results: CSV, JSON, run manifests and SVG charts.

Floats are written with ``repr``, the shortest string that round-trips, so
CSV and JSON carry full double precision and identical results give
identical bytes. Charts are drawn only from rows that were already written.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import platform
from pathlib import Path

import numpy as np
import scipy

from . import __version__

__all__ = ["SCHEMA_VERSION", "COLUMNS", "format_cell", "csv_text", "write_results", "write_manifest", "render_svg"]

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1

COLUMNS = {
    "constants": ["p", "u_p", "u_star", "sqrt_2_log_p", "delta_opt", "up_gap"],
    "packing": ["p", "tau", "n_tau", "alpha", "gamma_size", "r_q"],
    "rate-bound": ["p", "model", "tau_p", "n_tau", "alpha_p", "term_alpha", "term_tau", "term_log", "total", "guard_ok"],
    "concentration": [
        "p", "model", "transform", "norm_kind", "norm_value", "delta_p", "reps",
        "count_above", "count_below", "prob", "half_width", "mean_abs_dev",
    ],
    "phase-diagram": ["beta", "r", "p", "reps", "support_size", "recovery_freq", "g_beta"],
    "gumbel-check": ["p", "reps", "ks", "critical_1pct"],
    "conjecture-probe": ["p", "c", "delta_p", "reps", "prob", "half_width"],
}


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([format_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    return x


def write_results(out_dir, command, columns, rows, extra=None) -> dict:
    """Write <command>.csv and <command>.json; return their sha256 digests."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    text = csv_text(columns, rows)
    doc = {"command": command, "schema_version": SCHEMA_VERSION, "columns": list(columns), "rows": rows}
    if extra:
        doc.update(extra)
    js = json.dumps(_jsonable(doc), indent=2) + "\n"
    digests = {}
    for name, body in ((f"{command}.csv", text), (f"{command}.json", js)):
        (out / name).write_text(body)
        digests[name] = hashlib.sha256(body.encode()).hexdigest()
    return digests


def write_manifest(out_dir, config, outputs, wall_time, sampler=None, runtime=None) -> Path:
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "command": config.command,
        "config": config.to_dict(),
        "wall_time_s": wall_time,
        "sampler": sampler or {},
        "runtime": dict(runtime or {}, python=platform.python_version(), numpy=np.__version__, scipy=scipy.__version__),
        "outputs": outputs,
    }
    path = Path(out_dir) / f"{config.command}.manifest.json"
    path.write_text(json.dumps(_jsonable(manifest), indent=2) + "\n")
    return path


def _pyplot():
    try:
        import matplotlib
    except ImportError:
        log.warning("matplotlib is not installed; skipping SVG output (pip install 'artifact[svg]')")
        return None
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "gaussmax"
    plt.rcParams["svg.fonttype"] = "none"
    return plt


def render_svg(command, rows, path) -> bool:
    """Chart for a results table; returns False when nothing was drawn."""
    plt = _pyplot()
    if plt is None or not rows:
        return False
    fig, ax = plt.subplots(figsize=(6, 4))
    if command == "concentration":
        p = [r["p"] for r in rows]
        ax.plot(p, [r["prob"] for r in rows], "o-", label="P(|max/norm - 1| > delta_p)")
        ax.plot(p, [r["mean_abs_dev"] for r in rows], "s--", label="E|max/norm - 1|")
        ax.set_xscale("log", base=2)
        ax.set_xlabel("p")
        ax.legend()
    elif command == "phase-diagram":
        betas = sorted({r["beta"] for r in rows})
        rs = sorted({r["r"] for r in rows})
        grid = np.full((len(rs), len(betas)), np.nan)
        for row in rows:
            grid[rs.index(row["r"]), betas.index(row["beta"])] = row["recovery_freq"]
        ax.pcolormesh(np.arange(len(betas) + 1), np.arange(len(rs) + 1), grid, vmin=0, vmax=1, cmap="viridis")
        ax.set_xticks(np.arange(len(betas)) + 0.5, [f"{b:g}" for b in betas])
        ax.set_yticks(np.arange(len(rs)) + 0.5, [f"{r:.3g}" for r in rs])
        # g(beta) drawn in grid coordinates by interpolating against the r ticks.
        g = [next(r["g_beta"] for r in rows if r["beta"] == b) for b in betas]
        ax.plot(np.arange(len(betas)) + 0.5, np.interp(g, rs, np.arange(len(rs)) + 0.5), "w-o", label="g(beta)")
        ax.set_xlabel("beta")
        ax.set_ylabel("r")
        ax.legend()
    elif command == "conjecture-probe":
        for c in sorted({r["c"] for r in rows}):
            sub = [r for r in rows if r["c"] == c]
            ax.plot([r["p"] for r in sub], [r["prob"] for r in sub], "o-", label=f"c={c:g}")
        ax.set_xscale("log", base=2)
        ax.set_xlabel("p")
        ax.set_ylabel("P(|M/u_p - 1| > c/log p)")
        ax.legend()
    elif command == "gumbel-check":
        ax.plot([r["p"] for r in rows], [r["ks"] for r in rows], "o-")
        ax.set_xscale("log", base=2)
        ax.set_xlabel("p")
        ax.set_ylabel("KS distance to Gumbel")
    else:
        x = [r["p"] for r in rows]
        key = {"constants": "u_p", "packing": "alpha", "rate-bound": "total"}[command]
        ax.plot(x, [r[key] if r[key] is not None else np.nan for r in rows], "o-")
        ax.set_xscale("log")
        ax.set_xlabel("p")
        ax.set_ylabel(key)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return True
