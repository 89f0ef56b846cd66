"""Batch command line: ``gaussmax <command> [options]``.

Each run writes ``<command>.csv``, ``<command>.json`` and ``<command>.manifest.json``
into the output directory (``--out``, else $GAUSSMAX_OUTPUT_DIR, else
./gaussmax-out), plus ``<command>.svg`` with ``--svg``. Settings come from
built-in defaults, then ``--config``, then explicit flags.
``gaussmax replay run/concentration.manifest.json`` reruns a recorded experiment.

Exit codes: 0 success, 2 configuration or usage error, 3 invalid model.
"""

from __future__ import annotations

import argparse
import logging
import re
import sys
import time
from pathlib import Path

from . import __version__
from .config import ExperimentConfig, default_output_dir, load_config
from .covariance import PRESETS, model_from_descriptor, model_to_descriptor
from .errors import ConfigError, DomainError, InadmissibleError, ModelInvalidError
from .montecarlo import (
    BonferroniThreshold,
    DeltaSchedule,
    FixedThreshold,
    conjecture_probe,
    empirical_rate_fit,
    estimate_concentration,
    gumbel_check,
    phase_diagram,
)
from .normal_toolkit import constants_for, up_gap
from .packing import packing_report
from .rates import TransformSpec, capstone_auto, transform_rate
from .report import COLUMNS, render_svg, write_manifest, write_results
from .sampler import prepare

__all__ = ["main", "run", "build_config", "execute"]

log = logging.getLogger("gaussmax")

EXIT_OK, EXIT_CONFIG, EXIT_MODEL = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so ``run`` owns the exit code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _int_token(tok: str) -> int:
    tok = tok.strip()
    m = re.fullmatch(r"(\d+)\^(\d+)", tok)
    if m:
        return int(m.group(1)) ** int(m.group(2))
    try:
        return int(tok)
    except ValueError:
        v = float(tok)
        if not v.is_integer():
            raise ConfigError(f"not an integer: {tok!r}") from None
        return int(v)


def _int_list(text: str) -> list:
    """'1024,4096' or '2^10,2^12' or '1e6'."""
    try:
        return [_int_token(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_common(sp):
    sp.add_argument("--config", help="YAML config (or a run manifest) supplying defaults")
    sp.add_argument("--out", help="output directory")
    sp.add_argument("--svg", action="store_true", default=None, help="also write an SVG chart")
    sp.add_argument("--p", type=_int_list, help="dimension(s), comma-separated; 2^k accepted")
    sp.add_argument("--model", help="iid, powerlaw, logdecay, explicit, or a preset: " + ", ".join(PRESETS))
    sp.add_argument("--gamma", type=float, help="power-law exponent")
    sp.add_argument("--nu", type=float, help="log-decay exponent")
    sp.add_argument("--c", type=float, help="covariance constant c <= 1")
    sp.add_argument("--model-json", help="JSON model descriptor file")
    sp.add_argument("--matrix", help="CSV file holding an explicit correlation matrix")
    sp.add_argument("--seed", type=int, help="64-bit seed")
    sp.add_argument("--workers", type=int, default=1, help="threads for replications (results do not depend on it)")


def _parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="gaussmax", description="Concentration of maxima in Gaussian arrays.")
    ap.add_argument("--version", action="version", version=f"gaussmax {__version__}")
    sub = ap.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    sp = sub.add_parser("constants", help="u_p, u_star, sqrt(2 log p) and delta_opt")
    _add_common(sp)

    sp = sub.add_parser("packing", help="N(tau), alpha(p), greedy packing set and R_q")
    _add_common(sp)
    sp.add_argument("--tau", type=float)

    sp = sub.add_parser("rate-bound", help="capstone rate bound at the model's optimal tau(p)")
    _add_common(sp)
    _add_transform(sp)

    sp = sub.add_parser("concentration", help="Monte Carlo concentration probabilities")
    _add_common(sp)
    _add_transform(sp)
    _add_mc(sp)
    sp.add_argument("--delta-schedule", choices=["c_over_logp", "loglog_over_log", "capstone_auto", "constant"])
    sp.add_argument("--delta-c", type=float, help="constant multiplying the delta schedule")
    sp.add_argument("--norm", dest="norm_kind", choices=["u_p", "sqrt2logp", "u_star", "f_of_up"])

    sp = sub.add_parser("phase-diagram", help="exact support recovery over a (beta, r) grid")
    _add_common(sp)
    _add_mc(sp)
    sp.add_argument("--beta", dest="beta_grid", type=_float_list, help="sparsity levels in (0, 1)")
    sp.add_argument("--r", dest="r_grid", type=_float_list, help="signal strengths")
    sp.add_argument("--r-relative", action="store_true", default=None, help="read --r as multiples of g(beta)")
    sp.add_argument("--threshold", help="bonferroni[:alpha] (default bonferroni:0.01) or fixed[:q]")

    sp = sub.add_parser("gumbel-check", help="KS distance of normalized iid maxima to the Gumbel law")
    _add_common(sp)
    _add_mc(sp)

    sp = sub.add_parser("conjecture-probe", help="P(|M/u_p - 1| > c/log p) over p and c (exploratory)")
    _add_common(sp)
    _add_mc(sp)
    sp.add_argument("--c-grid", type=_float_list)

    sp = sub.add_parser("replay", help="rerun the experiment recorded in a manifest")
    sp.add_argument("manifest")
    sp.add_argument("--out", help="output directory (default: the recorded one)")
    sp.add_argument("--workers", type=int, default=1)
    return ap


def _add_transform(sp):
    sp.add_argument("--transform", help="identity, exp, square, abspower, signedpower, expabspower, expsignedpower")
    sp.add_argument("--lam", type=float, help="lambda for the power transforms")


def _add_mc(sp):
    sp.add_argument("--reps", type=int)


def _model_descriptor(args, base: dict) -> dict:
    if args.model_json:
        import json

        try:
            return json.loads(Path(args.model_json).read_text())
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read model JSON {args.model_json}: {exc}") from None
    if args.matrix:
        return {"kind": "explicit", "csv": str(args.matrix)}
    if args.model is None and args.gamma is None and args.nu is None and args.c is None:
        return base
    name = args.model
    if name in PRESETS:
        desc = model_to_descriptor(PRESETS[name])
    elif name is None:
        desc = dict(base)
    else:
        desc = {"kind": name}
    for key in ("gamma", "nu", "c"):
        if getattr(args, key) is not None:
            desc[key] = getattr(args, key)
    if desc.get("kind") == "powerlaw":
        desc.pop("nu", None)
    if desc.get("kind") == "logdecay":
        desc.pop("gamma", None)
    return desc


def _threshold_dict(text: str) -> dict:
    rule, _, value = text.partition(":")
    try:
        if rule == "bonferroni":
            return {"rule": "bonferroni", "alpha": float(value) if value else 0.01}
        if rule == "fixed":
            return {"rule": "fixed", "q": float(value) if value else 1.0}
    except ValueError:
        pass
    raise ConfigError(f"bad threshold rule {text!r}; expected bonferroni[:alpha] or fixed[:q]")


def build_config(args) -> ExperimentConfig:
    """Defaults, overlaid by --config, overlaid by explicit flags."""
    data = {}
    if args.config:
        data = load_config(args.config).to_dict()
        if data["command"] != args.command:
            raise ConfigError(f"config is for {data['command']!r}, not {args.command!r}")
    data["command"] = args.command
    data["model"] = _model_descriptor(args, data.get("model", {"kind": "iid"}))
    simple = {
        "p": "p_grid", "tau": "tau", "reps": "reps", "seed": "seed", "norm_kind": "norm_kind",
        "beta_grid": "beta_grid", "r_grid": "r_grid", "r_relative": "r_relative",
        "c_grid": "c_grid", "out": "output_dir", "svg": "svg",
    }
    for attr, key in simple.items():
        value = getattr(args, attr, None)
        if value is not None:
            data[key] = value
    if getattr(args, "transform", None) is not None or getattr(args, "lam", None) is not None:
        t = {"kind": args.transform or data.get("transform", {}).get("kind", "identity")}
        if args.lam is not None:
            t["lam"] = args.lam
        data["transform"] = t
    if getattr(args, "delta_schedule", None) or getattr(args, "delta_c", None) is not None:
        sched = dict(data.get("delta_schedule", {"name": "c_over_logp", "c": 1.0}))
        if args.delta_schedule:
            sched["name"] = args.delta_schedule
        if args.delta_c is not None:
            sched["c"] = args.delta_c
        data["delta_schedule"] = sched
    if getattr(args, "threshold", None):
        data["threshold"] = _threshold_dict(args.threshold)
    return ExperimentConfig.from_dict(data)


def _transform(cfg) -> TransformSpec:
    t = dict(cfg.transform)
    try:
        return TransformSpec(t.pop("kind", "identity"), t.pop("lam", None))
    except ValueError as exc:
        raise ConfigError(f"bad transform: {exc}") from None


def _threshold(cfg):
    t = cfg.threshold
    if t.get("rule") == "bonferroni":
        return BonferroniThreshold(float(t.get("alpha", 0.01)))
    if t.get("rule") == "fixed":
        return FixedThreshold(float(t.get("q", 1.0)))
    raise ConfigError(f"unknown threshold rule {t.get('rule')!r}")


def _require(cfg, name, what=None):
    if not getattr(cfg, name):
        raise ConfigError(f"{cfg.command} needs {what or name}")


def _p_grid(cfg, model):
    if cfg.p_grid:
        return cfg.p_grid
    if model.fixed_dimension is not None:
        return [model.fixed_dimension]
    raise ConfigError(f"{cfg.command} needs --p")


def _sampler_meta(model, ps, seed):
    return {str(p): prepare(model, p, seed=seed, cell=p).describe() for p in ps}


def execute(cfg: ExperimentConfig, workers: int = 1):
    """Run one configured experiment; return (columns, rows, extra JSON, sampler info)."""
    model = model_from_descriptor(cfg.model)
    cmd = cfg.command
    columns = list(COLUMNS[cmd])
    extra, sampler = {}, {}

    if cmd == "constants":
        _require(cfg, "p_grid", "--p")
        rows = []
        for p in cfg.p_grid:
            row = constants_for(p).as_dict()
            row["up_gap"] = up_gap(p) if p >= 3 else None
            rows.append(row)

    elif cmd == "packing":
        if cfg.tau is None:
            raise ConfigError("packing needs --tau")
        rows, gammas = [], []
        for p in _p_grid(cfg, model):
            d = packing_report(model, p, cfg.tau).as_dict()
            gammas.append({"p": d["p"], "gamma_set": d.pop("gamma_set")})
            rows.append(d)
        extra["gamma_sets"] = gammas

    elif cmd == "rate-bound":
        spec = _transform(cfg)
        col = f"d_star_{spec.name}"
        columns.append(col)
        rows = []
        for p in _p_grid(cfg, model):
            row = capstone_auto(model, p).as_dict()
            if not row["guard_ok"]:
                log.warning("log-decay validity guard fails at p=%d; the bound is outside its stated range", p)
            row["model"] = model.tag
            try:
                row[col] = transform_rate(spec, p, row["total"])
            except (DomainError, InadmissibleError) as exc:
                log.warning("d_star for %s at p=%d unavailable: %s", spec.name, p, exc)
                row[col] = None
            rows.append(row)

    elif cmd == "concentration":
        ps = _p_grid(cfg, model)
        spec = _transform(cfg)
        try:
            sched = DeltaSchedule(**cfg.delta_schedule)
        except TypeError as exc:
            raise ConfigError(f"bad delta_schedule: {exc}") from None
        est = estimate_concentration(model, spec, ps, sched, cfg.norm_kind, cfg.reps, cfg.seed, workers)
        rows = [e.as_dict() for e in est]
        try:
            extra["rate_fit"] = vars(empirical_rate_fit(est))
        except DomainError:
            extra["rate_fit"] = None
        sampler = _sampler_meta(model, ps, cfg.seed)

    elif cmd == "phase-diagram":
        ps = _p_grid(cfg, model)
        if len(ps) != 1:
            raise ConfigError("phase-diagram takes a single --p")
        _require(cfg, "beta_grid", "--beta")
        _require(cfg, "r_grid", "--r")
        cells = phase_diagram(
            ps[0], cfg.beta_grid, cfg.r_grid, model, cfg.reps, cfg.seed, _threshold(cfg), workers, cfg.r_relative
        )
        rows = [c.as_dict() for c in cells]
        extra["boundary"] = [{"beta": b, "g_beta": rows[i * len(cfg.r_grid)]["g_beta"]} for i, b in enumerate(cfg.beta_grid)]
        extra["support_placement"] = "seeded random subset, independent of the noise stream"
        sampler = {str(ps[0]): prepare(model, ps[0], seed=cfg.seed).describe()}

    elif cmd == "gumbel-check":
        _require(cfg, "p_grid", "--p")
        if model.kind.value != "iid":
            raise ConfigError("gumbel-check simulates iid maxima; use --model iid")
        rows = [gumbel_check(p, cfg.reps, cfg.seed, workers).as_dict() for p in cfg.p_grid]
        sampler = _sampler_meta(model, cfg.p_grid, cfg.seed)

    else:  # conjecture-probe
        ps = _p_grid(cfg, model)
        c_grid = cfg.c_grid or [0.1, 1.0, 10.0, 50.0]
        rows = [r.as_dict() for r in conjecture_probe(model, ps, c_grid, cfg.reps, cfg.seed, workers)]
        sampler = _sampler_meta(model, ps, cfg.seed)

    return columns, rows, extra, sampler


def _run_config(cfg, workers, out_override=None) -> int:
    out = Path(out_override or cfg.output_dir or default_output_dir())
    start = time.perf_counter()
    columns, rows, extra, sampler = execute(cfg, workers)
    outputs = write_results(out, cfg.command, columns, rows, extra)
    if cfg.svg:
        svg = out / f"{cfg.command}.svg"
        if render_svg(cfg.command, rows, svg):
            outputs[svg.name] = None
    wall = time.perf_counter() - start
    write_manifest(out, cfg, outputs, wall, sampler, {"workers": workers})
    sys.stdout.write((out / f"{cfg.command}.csv").read_text())
    return EXIT_OK


def run(argv=None) -> int:
    """Parse ``argv``, run the command and return the process exit code."""
    logging.basicConfig(level=logging.WARNING, stream=sys.stderr, format="%(levelname)s: %(message)s")
    try:
        args = _parser().parse_args(argv)
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        if args.command == "replay":
            return _run_config(load_config(args.manifest), args.workers, args.out)
        return _run_config(build_config(args), args.workers)
    except ModelInvalidError as exc:
        print(f"gaussmax: invalid model: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except (ConfigError, DomainError, InadmissibleError) as exc:
        print(f"gaussmax: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"gaussmax: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)


def main() -> None:
    sys.exit(run())
