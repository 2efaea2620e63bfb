"""Command-line sweeps and figure recipes; writes CSV or JSON tables.

Exit codes: 0 success, 2 configuration error, 3 infeasible outer-code
request, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .montecarlo import TrialConfig, run_counts
from .outer_code import ChannelStats, min_block_length, rs_log_block_error, RsCode, shannon_rate
from .photon import INTERFERENCE_MODELS, DetectorModel, MismatchModel
from .receivers import (
    EXACT_NULLING,
    NullingStrategy,
    binary_helstrom,
    cpn_error,
    cpn_optimize_null,
    dd_error_erasure,
    dd_ppm_error,
    gk_error,
    gk_optimize,
    hard_decision_error,
    ppm_helstrom,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_NUMERIC = 4

LOG_TINY = math.log(1e-300)

STATS_PRESETS = {
    "ideal-dd": (0.0, 0.289),
    "ideal-cpn": (0.082, 0.011),
    "exp-dd": (0.004, 0.287),
    "exp-cpn": (0.092, 0.052),
}

# run-to-run provenance excludes execution details that must not change output bytes
_NOT_ECHOED = {"workers", "output", "config", "schema", "func"}


class ConfigError(ValueError):
    pass


class Infeasible(Exception):
    pass


# --- formatting -------------------------------------------------------------


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    v = float(value)
    if math.isnan(v) or math.isinf(v):
        return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
    return f"{v:.12g}"


def fmt_log_prob(log_p: float) -> str:
    """Probability given by its natural log; tiny values are rebuilt from log10."""
    if log_p == -math.inf:
        return "0"
    if log_p >= LOG_TINY:
        return fmt(math.exp(log_p))
    l10 = log_p / math.log(10.0)
    exp = math.floor(l10)
    return f"{10 ** (l10 - exp):.11f}e{exp:d}"


class Table:
    def __init__(self, columns: dict[str, str]):
        self.columns = columns
        self.rows: list[list[str]] = []

    def add(self, row: dict) -> None:
        missing = set(self.columns) - set(row)
        if missing:
            raise KeyError(f"row missing columns {sorted(missing)}")
        self.rows.append([fmt(row[c]) for c in self.columns])


def _provenance(args: argparse.Namespace) -> dict:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_ECHOED}
    return {"tool": "cpnsim", "version": __version__, "parameters": params}


def render(table: Table, args: argparse.Namespace) -> str:
    prov = _provenance(args)
    if args.format == "json":
        doc = {
            "provenance": prov,
            "columns": list(table.columns),
            "rows": [dict(zip(table.columns, r)) for r in table.rows],
        }
        return json.dumps(doc, indent=1) + "\n"
    lines = [f"# tool: {prov['tool']} {prov['version']}"]
    for k, v in prov["parameters"].items():
        lines.append(f"# {k} = {json.dumps(v)}")
    lines.append(",".join(table.columns))
    lines.extend(",".join(r) for r in table.rows)
    return "\n".join(lines) + "\n"


def write_output(text: str, path: str | None) -> None:
    if not path or path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".cpnsim-", suffix=".part")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --- model assembly -----------------------------------------------------------


def grid(start: float, stop: float, step: float) -> np.ndarray:
    if step <= 0 or stop < start:
        raise ConfigError(f"bad grid start={start} stop={stop} step={step}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(n), 12)


def detector_from(args) -> DetectorModel:
    if getattr(args, "ideal", False):
        return DetectorModel.ideal(args.eta)
    return DetectorModel(eta=args.eta, c_sig=args.c_sig, c_null=args.c_null, c_dark=args.c_dark)


def mismatch_from(args) -> MismatchModel:
    if getattr(args, "ideal", False):
        return MismatchModel(model=args.mismatch_model)
    return MismatchModel(delta_m=args.delta_m, theta=args.theta, model=args.mismatch_model)


def axis_np(args, n_p: float) -> float:
    return args.eta * n_p if args.np_axis == "detector" else n_p


def _pmap(func: Callable, items: Sequence, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


# --- row functions (module level so process pools can pickle them) ----------


def _np_row(n_p: float, m: int, det: DetectorModel, mm: MismatchModel) -> dict:
    dd_err, dd_eras = dd_error_erasure(m, n_p, det)
    ex_err, ex_eras = cpn_error(m, n_p, EXACT_NULLING, det, mm)
    opt_null, opt = cpn_optimize_null(m, n_p, det, mm)
    return {
        "dd": dd_ppm_error(m, n_p, det),
        "dd_err": dd_err,
        "dd_eras": dd_eras,
        "cpn_exact": hard_decision_error(ex_err, ex_eras, m),
        "cpn_exact_err": ex_err,
        "cpn_exact_eras": ex_eras,
        "cpn_opt": opt,
        "cpn_opt_null": opt_null,
        "helstrom": ppm_helstrom(m, n_p),
    }


def _fig3a_row(
    n_p: float, m: int, frames: int, seed: int, noisy: DetectorModel, mm_exact: MismatchModel, mm_opt: MismatchModel
) -> dict:
    ideal = DetectorModel.ideal(noisy.eta)
    opt_null, opt = cpn_optimize_null(m, n_p, noisy, mm_opt)
    cfg = TrialConfig(m=m, n_p=float(n_p), frames_per_word=frames, master_seed=seed,
                      detector=noisy, mismatch=mm_exact)
    counts = run_counts(cfg)
    return {
        "dd_ideal": dd_ppm_error(m, n_p, ideal),
        "cpn_exact_ideal": hard_decision_error(*cpn_error(m, n_p, EXACT_NULLING, ideal), m),
        "dd_model": dd_ppm_error(m, n_p, noisy),
        "cpn_exact_model": hard_decision_error(*cpn_error(m, n_p, EXACT_NULLING, noisy, mm_exact), m),
        "cpn_opt_model": opt,
        "cpn_opt_null": opt_null,
        "dd_mc": counts["dd"].hard_error.p_hat,
        "cpn_mc": counts["cpn"].hard_error.p_hat,
        "cpn_mc_ci_low": counts["cpn"].hard_error.ci_low,
        "cpn_mc_ci_high": counts["cpn"].hard_error.ci_high,
    }


def _outer_row(rate: float, stats: ChannelStats, target: float) -> dict:
    res = min_block_length(rate, stats, target)
    if res.feasible:
        code = RsCode.for_rate(res.n_min, rate)
        return {"n_min": res.n_min, "k": code.k, "feasible": True,
                "block_error": fmt_log_prob(rs_log_block_error(code, stats))}
    return {"n_min": "inf", "k": "", "feasible": False, "block_error": ""}


# --- commands ----------------------------------------------------------------

SCHEMAS: dict[str, dict[str, str]] = {
    "binary": {
        "alpha": "binary signal amplitude (sqrt of mean photons)",
        "dd": "direct-detection error, equal priors",
        "gk": "optimized displacement receiver error",
        "gk_beta": "optimal displacement",
        "gk_rule": "decision rule at the optimum",
        "helstrom": "minimum error over all measurements",
    },
    "helstrom": {
        "n_p": "pulse mean photons (axis per --np-axis)",
        "helstrom": "PPM square-root-measurement error",
        "dd": "ideal direct-detection error for reference",
    },
    "sweep-np": {
        "n_p": "pulse mean photons (axis per --np-axis)",
        "dd": "direct detection word error, empty records guessed",
        "dd_err": "direct detection hard wrong decisions",
        "dd_eras": "direct detection erasures (no clicks)",
        "cpn_exact": "exact-nulling word error, erasures guessed",
        "cpn_exact_err": "exact-nulling hard wrong decisions",
        "cpn_exact_eras": "exact-nulling erasures (all stages clicked)",
        "cpn_opt": "optimized-nulling word error, erasures guessed",
        "cpn_opt_null": "optimal nulling pulse mean photons",
        "helstrom": "PPM Helstrom bound (pure states, no noise)",
    },
    "sweep-null": {
        "n_null": "nulling pulse mean photons",
        "cpn": "word error, erasures guessed",
        "cpn_err": "hard wrong decisions",
        "cpn_eras": "erasures",
        "cpn_exact": "exact-nulling word error at the same N_p",
        "dd": "direct detection word error at the same N_p",
    },
    "montecarlo": {
        "receiver": "dd or cpn",
        "metric": "error (hard wrong), erasure, hard_error (erasures guessed)",
        "p_hat": "sample fraction",
        "ci_low": "Wilson 95% lower bound",
        "ci_high": "Wilson 95% upper bound",
        "n_trials": "frames simulated",
        "n_events": "frames counted by the metric",
        "analytic": "exact model probability",
    },
    "outer-code": {
        "stats": "symbol statistics preset",
        "p_err": "symbol hard-error probability",
        "p_eras": "symbol erasure probability",
        "shannon_rate": "normalized capacity of the symbol channel",
        "rate": "code rate k/n",
        "n_min": "minimum block length, inf when infeasible",
        "k": "message length at n_min",
        "feasible": "whether the target is reachable",
        "block_error": "block error at n_min",
    },
}
SCHEMAS["fig1c"] = {k: v for k, v in SCHEMAS["sweep-np"].items() if k in
                    ("n_p", "dd", "cpn_exact", "cpn_opt", "cpn_opt_null", "helstrom")}
SCHEMAS["fig3a"] = {
    "n_p": "pulse mean photons (axis per --np-axis)",
    "dd_ideal": "ideal direct detection",
    "cpn_exact_ideal": "ideal exact nulling",
    "dd_model": "direct detection with leakage clicks",
    "cpn_exact_model": "exact nulling with leakage and --delta-exact mismatch",
    "cpn_opt_model": "optimized nulling with leakage and --delta-opt mismatch",
    "cpn_opt_null": "optimal nulling photons for cpn_opt_model",
    "dd_mc": "simulated direct detection, --frames per word",
    "cpn_mc": "simulated exact nulling (model of cpn_exact_model)",
    "cpn_mc_ci_low": "Wilson 95% lower bound for cpn_mc",
    "cpn_mc_ci_high": "Wilson 95% upper bound for cpn_mc",
}
SCHEMAS["fig3b"] = SCHEMAS["sweep-null"]
SCHEMAS["fig4"] = SCHEMAS["outer-code"]


def cmd_binary(args) -> Table:
    t = Table(SCHEMAS["binary"])
    alphas = grid(args.alpha, args.alpha_stop if args.alpha_stop is not None else args.alpha, args.alpha_step)
    for a in alphas:
        best = gk_optimize(float(a))
        t.add({"alpha": a, "dd": gk_error(float(a), 0.0), "gk": best.p_error, "gk_beta": best.beta,
               "gk_rule": best.rule, "helstrom": binary_helstrom(float(a))})
    return t


def cmd_helstrom(args) -> Table:
    t = Table(SCHEMAS["helstrom"])
    ideal = DetectorModel.ideal()
    for n_p in grid(args.np_start, args.np_stop, args.np_step):
        t.add({"n_p": axis_np(args, n_p), "helstrom": ppm_helstrom(args.m, n_p),
               "dd": dd_ppm_error(args.m, n_p, ideal)})
    return t


def _sweep_np(args, schema: str, det: DetectorModel, mm: MismatchModel) -> Table:
    t = Table(SCHEMAS[schema])
    nps = [float(x) for x in grid(args.np_start, args.np_stop, args.np_step)]
    rows = _pmap(partial(_np_row, m=args.m, det=det, mm=mm), nps, args.workers)
    for n_p, row in zip(nps, rows):
        t.add({c: (axis_np(args, n_p) if c == "n_p" else row[c]) for c in t.columns})
    return t


def cmd_sweep_np(args) -> Table:
    return _sweep_np(args, "sweep-np", detector_from(args), mismatch_from(args))


def _sweep_null(args, schema: str) -> Table:
    det, mm = detector_from(args), mismatch_from(args)
    t = Table(SCHEMAS[schema])
    stop = args.null_stop if args.null_stop is not None else 4.0 * args.np + 2.0
    exact = hard_decision_error(*cpn_error(args.m, args.np, EXACT_NULLING, det, mm), args.m)
    dd = dd_ppm_error(args.m, args.np, det)
    for n_null in grid(args.null_start, stop, args.null_step):
        err, eras = cpn_error(args.m, args.np, NullingStrategy.fixed(float(n_null)), det, mm)
        t.add({"n_null": n_null, "cpn": hard_decision_error(err, eras, args.m), "cpn_err": err,
               "cpn_eras": eras, "cpn_exact": exact, "dd": dd})
    return t


def cmd_sweep_null(args) -> Table:
    return _sweep_null(args, "sweep-null")


def cmd_montecarlo(args) -> Table:
    det, mm = detector_from(args), mismatch_from(args)
    strategy = EXACT_NULLING if args.null is None else NullingStrategy.fixed(args.null)
    cfg = TrialConfig(m=args.m, n_p=args.np, frames_per_word=args.frames, master_seed=args.seed,
                      strategy=strategy, detector=det, mismatch=mm)
    counts = run_counts(cfg, workers=args.workers)
    dd_err, dd_eras = dd_error_erasure(args.m, args.np, det)
    cp_err, cp_eras = cpn_error(args.m, args.np, strategy, det, mm)
    analytic = {
        "dd": {"error": dd_err, "erasure": dd_eras, "hard_error": hard_decision_error(dd_err, dd_eras, args.m)},
        "cpn": {"error": cp_err, "erasure": cp_eras, "hard_error": hard_decision_error(cp_err, cp_eras, args.m)},
    }
    t = Table(SCHEMAS["montecarlo"])
    for receiver, c in counts.items():
        for metric in ("error", "erasure", "hard_error"):
            e = getattr(c, metric)
            t.add({"receiver": receiver, "metric": metric, "p_hat": e.p_hat, "ci_low": e.ci_low,
                   "ci_high": e.ci_high, "n_trials": e.n_trials, "n_events": e.n_events,
                   "analytic": analytic[receiver][metric]})
    return t


def _stats_sets(args) -> list[tuple[str, ChannelStats]]:
    out = []
    for name in args.stats:
        if name in STATS_PRESETS:
            out.append((name, ChannelStats(args.m, *STATS_PRESETS[name])))
        elif name == "custom":
            if args.p_err is None or args.p_eras is None:
                raise ConfigError("--stats custom needs --p-err and --p-eras")
            out.append((name, ChannelStats(args.m, args.p_err, args.p_eras)))
        elif name in ("model-dd", "model-cpn"):
            det, mm = detector_from(args), mismatch_from(args)
            if name == "model-dd":
                pe, pr = dd_error_erasure(args.m, args.np, det)
            else:
                strategy = EXACT_NULLING if args.null is None else NullingStrategy.fixed(args.null)
                pe, pr = cpn_error(args.m, args.np, strategy, det, mm)
            out.append((name, ChannelStats(args.m, pe, pr)))
        else:
            raise ConfigError(f"unknown stats set {name!r}")
    return out


def _outer_table(args, schema: str, rates: Sequence[float]) -> tuple[Table, bool]:
    t = Table(SCHEMAS[schema])
    any_infeasible = False
    for name, stats in _stats_sets(args):
        cap = shannon_rate(stats)
        rows = _pmap(partial(_outer_row, stats=stats, target=args.target), list(rates), args.workers)
        for rate, row in zip(rates, rows):
            any_infeasible |= not row["feasible"]
            t.add({"stats": name, "p_err": stats.p_err, "p_eras": stats.p_eras, "shannon_rate": cap,
                   "rate": rate, **row})
    return t, any_infeasible


def _rates(args) -> list[float]:
    if args.rate is not None:
        return [float(r) for r in args.rate]
    return [float(r) for r in grid(args.rate_start, args.rate_stop, args.rate_step)]


def cmd_outer_code(args) -> Table:
    table, any_infeasible = _outer_table(args, "outer-code", _rates(args))
    if any_infeasible:
        raise Infeasible(table)
    return table


def cmd_reproduce(args) -> Table:
    fig = args.figure
    if fig == "fig1c":
        args.np_start, args.np_stop, args.np_step = args.np_start or 0.05, args.np_stop or 6.0, args.np_step or 0.05
        args.ideal = True
        args.c_sig = args.c_null = args.c_dark = args.delta_m = args.theta = 0.0
        return _sweep_np(args, "fig1c", detector_from(args), mismatch_from(args))
    if fig == "fig3a":
        t = Table(SCHEMAS["fig3a"])
        args.np_start, args.np_stop, args.np_step = args.np_start or 0.1, args.np_stop or 3.0, args.np_step or 0.1
        args.delta_m = args.theta = 0.0
        det = detector_from(args)
        row = partial(
            _fig3a_row, m=args.m, frames=args.frames, seed=args.seed, noisy=det,
            mm_exact=MismatchModel.from_delta(args.delta_exact, args.mismatch_model),
            mm_opt=MismatchModel.from_delta(args.delta_opt, args.mismatch_model),
        )
        nps = [float(x) for x in grid(args.np_start, args.np_stop, args.np_step)]
        rows = _pmap(row, nps, args.workers)
        for n_p, row in zip(nps, rows):
            t.add({"n_p": axis_np(args, n_p), **row})
        return t
    if fig == "fig3b":
        args.np = 0.64
        args.delta_m, args.theta = args.delta_opt, 0.0
        return _sweep_null(args, "fig3b")
    if fig == "fig4":
        args.stats = list(STATS_PRESETS)
        table, _ = _outer_table(args, "fig4", [float(r) for r in grid(0.05, 0.95, 0.01)])
        return table
    raise ConfigError(f"unknown figure {fig!r}")


# --- parser ------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat JSON file of option values; flags override it")
    p.add_argument("--output", "-o", help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--schema", action="store_true", help="print the column dictionary and exit")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--m", type=int, default=4, help="PPM order")
    p.add_argument("--np-axis", choices=("detector", "source"), default="detector",
                   help="emit N_p scaled by eta (detector) or as given (source)")


def _add_model(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("detector and mismatch model")
    g.add_argument("--eta", type=float, default=1.0)
    g.add_argument("--c-sig", type=float, default=0.0042)
    g.add_argument("--c-null", type=float, default=0.0129)
    g.add_argument("--c-dark", type=float, default=0.0)
    g.add_argument("--delta-m", "--delta", dest="delta_m", type=float, default=0.0,
                   help="fractional mode mismatch (phase handled by --theta)")
    g.add_argument("--theta", type=float, default=0.0, help="signal/null phase offset, radians")
    g.add_argument("--mismatch-model", choices=INTERFERENCE_MODELS, default=INTERFERENCE_MODELS[0])
    g.add_argument("--ideal", action="store_true", help="drop leakage clicks and mismatch")


def _add_np_grid(p: argparse.ArgumentParser, default=(0.05, 6.0, 0.05)) -> None:
    p.add_argument("--np-start", type=float, default=default[0])
    p.add_argument("--np-stop", type=float, default=default[1])
    p.add_argument("--np-step", type=float, default=default[2])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cpnsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"cpnsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("binary", help="on-off keying: DD, optimized displacement, Helstrom")
    _add_common(p)
    p.add_argument("--alpha", type=float, default=0.2)
    p.add_argument("--alpha-stop", type=float)
    p.add_argument("--alpha-step", type=float, default=0.05)
    p.set_defaults(func=cmd_binary)

    p = sub.add_parser("helstrom", help="PPM Helstrom bound versus N_p")
    _add_common(p)
    _add_np_grid(p)
    p.add_argument("--eta", type=float, default=1.0)
    p.set_defaults(func=cmd_helstrom)

    p = sub.add_parser("sweep-np", help="all PPM receivers versus N_p")
    _add_common(p)
    _add_model(p)
    _add_np_grid(p)
    p.set_defaults(func=cmd_sweep_np)

    p = sub.add_parser("sweep-null", help="nulling receiver versus nulling photon number")
    _add_common(p)
    _add_model(p)
    p.add_argument("--np", type=float, required=True)
    p.add_argument("--null-start", type=float, default=0.0)
    p.add_argument("--null-stop", type=float, help="default 4 N_p + 2")
    p.add_argument("--null-step", type=float, default=0.01)
    p.set_defaults(func=cmd_sweep_null)

    p = sub.add_parser("montecarlo", help="simulated frames versus exact probabilities")
    _add_common(p)
    _add_model(p)
    p.add_argument("--np", type=float, required=True)
    p.add_argument("--frames", type=int, default=832, help="frames per word")
    p.add_argument("--null", type=float, help="fixed nulling photons (default exact nulling)")
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("outer-code", help="minimum Reed-Solomon block length versus rate")
    _add_common(p)
    _add_model(p)
    p.add_argument("--stats", nargs="+", default=["ideal-dd"],
                   help=f"{', '.join(STATS_PRESETS)}, model-dd, model-cpn or custom")
    p.add_argument("--p-err", type=float)
    p.add_argument("--p-eras", type=float)
    p.add_argument("--np", type=float, default=1.25, help="pulse photons for model-* stats")
    p.add_argument("--null", type=float, help="fixed nulling photons for model-cpn")
    p.add_argument("--rate", type=float, nargs="+")
    p.add_argument("--rate-start", type=float, default=0.05)
    p.add_argument("--rate-stop", type=float, default=0.95)
    p.add_argument("--rate-step", type=float, default=0.05)
    p.add_argument("--target", type=float, default=1e-10)
    p.set_defaults(func=cmd_outer_code)

    p = sub.add_parser("reproduce", help="figure recipes: fig1c, fig3a, fig3b, fig4")
    _add_common(p)
    _add_model(p)
    p.add_argument("figure", choices=("fig1c", "fig3a", "fig3b", "fig4"))
    p.add_argument("--np-start", type=float)
    p.add_argument("--np-stop", type=float)
    p.add_argument("--np-step", type=float)
    p.add_argument("--frames", type=int, default=832, help="frames per word for simulated columns")
    p.add_argument("--delta-exact", type=float, default=0.05, help="mismatch for exact-nulling model curves")
    p.add_argument("--delta-opt", type=float, default=0.03, help="mismatch for optimized-nulling model curves")
    p.add_argument("--null-start", type=float, default=0.0)
    p.add_argument("--null-stop", type=float)
    p.add_argument("--null-step", type=float, default=0.01)
    p.add_argument("--target", type=float, default=1e-10)
    p.set_defaults(func=cmd_reproduce)
    return parser


def parse_args(argv: Sequence[str] | None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            with open(args.config) as fh:
                values = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(values, dict):
            raise ConfigError("config file must hold a flat JSON object")
        keys = {k.replace("-", "_"): v for k, v in values.items()}
        unknown = sorted(set(keys) - set(vars(args)) - {"command"})
        if unknown:
            raise ConfigError(f"unknown config keys {unknown}")
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        subparser.set_defaults(**{k: v for k, v in keys.items() if k != "command"})
        args = parser.parse_args(argv)
    return args


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = parse_args(argv)
        key = args.figure if args.command == "reproduce" else args.command
        if args.schema:
            sys.stdout.write(json.dumps(SCHEMAS[key], indent=1) + "\n")
            return EXIT_OK
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        status = EXIT_OK
        try:
            table = args.func(args)
        except Infeasible as exc:
            table, status = exc.args[0], EXIT_INFEASIBLE
        for row in table.rows:
            for cell in row:
                if cell == "nan":
                    raise FloatingPointError("non-finite value in output")
        write_output(render(table, args), args.output)
        return status
    except (ConfigError, ValueError) as exc:
        print(f"cpnsim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FloatingPointError, ArithmeticError) as exc:
        print(f"cpnsim: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    raise SystemExit(main())
