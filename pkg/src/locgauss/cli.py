"""Command-line front end.

    locgauss test       --simulate null --n 100 --blocks 2 --seed 7
    locgauss test       --input ticks.csv --frequency 5
    locgauss critvals   --n 100 --blocks 2 --days 252
    locgauss montecarlo --table 1 --reps 1000 --out table1.csv
    locgauss simulate   --model null --n 78 --days 10 --out ticks.csv
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import sys
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import critvals, montecarlo
from .ecdf import DEFAULT_QUANTILE_PAIRS, EvalSet, local_gaussianity_test
from .errors import LocGaussError
from .intraday import (
    Session,
    business_dates,
    diurnal_adjust,
    ingest_csv,
    prices_from_returns,
    write_prices_csv,
)
from .paths import MODELS, DEFAULT_NOISE_SD, PathGrid, simulate_model
from .spotvol import BIPOWER, TRUNCATED, BlockPlan, TruncationConfig

log = logging.getLogger("locgauss")

MODEL_ALIASES = {
    "null": "null_sv_jd",
    "pure_jump": "pure_jump_ts",
    "pure_jump_noise": "pure_jump_ts_plus_noise",
    **{m: m for m in MODELS},
}

REPORT_FIELDS = ("group", "statistic", "n_kept", "kept_fraction", "q05", "q01", "reject05", "reject01")


class UsageError(Exception):
    """Bad combination of command-line flags."""


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return v


def _float_list(text: str) -> Tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as err:
        raise argparse.ArgumentTypeError(str(err)) from err


def _quantile_pairs(text: str):
    """``0.01:0.40,0.60:0.99`` -> ((0.01, 0.40), (0.60, 0.99))."""
    try:
        pairs = []
        for part in text.split(","):
            lo, hi = part.split(":")
            pairs.append((float(lo), float(hi)))
        return tuple(pairs)
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"expected lo:hi[,lo:hi...], got {text!r}") from err


def _level_key(level: float) -> str:
    return f"{round(100 * level):02d}"


def _add_plan_args(p: argparse.ArgumentParser, with_n=True):
    if with_n:
        p.add_argument("--n", type=_positive_int, help="increments per day")
    p.add_argument("--blocks", type=_positive_int, default=2, help="blocks per day J (k_n = n // J)")
    p.add_argument("--mn-ratio", type=float, default=None,
                   help="m_n / k_n (default 0.75 for n <= 100, else 0.70)")
    p.add_argument("--estimator", choices=(BIPOWER, TRUNCATED), default=BIPOWER)
    p.add_argument("--eval-set", type=_quantile_pairs, default=DEFAULT_QUANTILE_PAIRS,
                   help="normal-quantile pairs lo:hi, comma separated")
    p.add_argument("--levels", type=_float_list, default=(0.01, 0.05))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cv-reps", type=int, default=100_000, help="limit-law replications")
    p.add_argument("--cache-dir", default=None, help=f"critical-value cache (default ${critvals.CACHE_ENV})")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="locgauss", description="Local Gaussianity test for intraday returns")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    t = sub.add_parser("test", help="run the test on data or a simulated path")
    src = t.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="CSV with header date,time,price")
    src.add_argument("--simulate", choices=sorted(MODEL_ALIASES), help="simulate a model instead")
    _add_plan_args(t)
    t.add_argument("--alpha-trunc", type=float, default=3.0)
    t.add_argument("--varpi", type=float, default=0.49)
    t.add_argument("--group-by", choices=("year", "none"), default="year")
    t.add_argument("--days", type=_positive_int, default=montecarlo.TRADING_DAYS,
                   help="simulated days")
    t.add_argument("--noise-sd", type=float, default=DEFAULT_NOISE_SD)
    t.add_argument("--frequency", type=float, default=None, help="slot length in minutes (CSV input)")
    t.add_argument("--session", type=Session.parse, default=Session(), help="HH:MM-HH:MM")
    t.add_argument("--diurnal", choices=("auto", "on", "off"), default="auto",
                   help="time-of-day adjustment (auto: on for CSV input)")
    t.add_argument("--out", choices=("json", "csv"), default="json")
    t.set_defaults(func=cmd_test)

    c = sub.add_parser("critvals", help="simulate or look up critical values")
    _add_plan_args(c)
    c.add_argument("--days", type=_positive_int, default=montecarlo.TRADING_DAYS, help="pooled days")
    c.set_defaults(func=cmd_critvals)

    m = sub.add_parser("montecarlo", help="size/power tables")
    which = m.add_mutually_exclusive_group(required=True)
    which.add_argument("--table", type=int, choices=sorted(montecarlo.TABLE_MODELS))
    which.add_argument("--config", help="YAML experiment file")
    m.add_argument("--reps", type=_positive_int, default=None, help="override replications")
    m.add_argument("--seed", type=int, default=None)
    m.add_argument("--days", type=_positive_int, default=None)
    m.add_argument("--cv-reps", type=int, default=None)
    m.add_argument("--workers", type=_positive_int, default=1)
    m.add_argument("--cache-dir", default=None)
    m.add_argument("--out", default=None, help="CSV output path")
    m.set_defaults(func=cmd_montecarlo)

    s = sub.add_parser("simulate", help="write a simulated path as a tick CSV")
    s.add_argument("--model", choices=sorted(MODEL_ALIASES), default="null")
    s.add_argument("--n", type=_positive_int, default=78)
    s.add_argument("--days", type=_positive_int, default=montecarlo.TRADING_DAYS)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--noise-sd", type=float, default=DEFAULT_NOISE_SD)
    s.add_argument("--session", type=Session.parse, default=Session())
    s.add_argument("--start", default="2001-01-02", help="first date")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)
    return ap


def _plan(n: int, args) -> BlockPlan:
    ratio = args.mn_ratio if args.mn_ratio is not None else montecarlo.default_m_ratio(n)
    if n // args.blocks < 4:
        raise UsageError(f"--blocks {args.blocks} leaves fewer than 4 increments per block (n={n})")
    return BlockPlan.from_blocks(n, args.blocks, ratio)


def _cache(args) -> critvals.CriticalValueCache:
    return critvals.CriticalValueCache(args.cache_dir)


def _limit_config(plan: BlockPlan, args, eval_set: EvalSet, days: int) -> critvals.LimitLawConfig:
    return critvals.LimitLawConfig(
        estimator_kind=args.estimator, n=plan.n, k_n=plan.k_n, m_n=plan.m_n, eval_set=eval_set,
        replications=args.cv_reps, seed=args.seed, days=days,
    )


def _simulated_groups(args) -> Tuple[int, List[Tuple[str, np.ndarray]]]:
    if args.n is None:
        raise UsageError("--simulate needs --n")
    path = simulate_model(MODEL_ALIASES[args.simulate], PathGrid(args.days, args.n), args.seed,
                          noise_sd=args.noise_sd)
    inc = path.increments
    if args.diurnal == "on":
        inc, _ = diurnal_adjust(inc)
    if args.group_by == "none":
        return args.n, [("all", inc)]
    size = montecarlo.TRADING_DAYS
    return args.n, [(str(g + 1), inc[s:s + size]) for g, s in enumerate(range(0, inc.shape[0], size))]


def _input_groups(args) -> Tuple[int, List[Tuple[str, np.ndarray]]]:
    session = args.session
    if args.frequency is None:
        if args.n is None:
            raise UsageError("--input needs --frequency or --n")
        freq = session.seconds / 60.0 / args.n
    else:
        freq = args.frequency
    data = ingest_csv(args.input, freq, session)
    if args.n is not None and args.n != data.n:
        raise UsageError(f"--n {args.n} disagrees with {data.n} slots implied by --frequency")
    if not data.dates:
        raise UsageError(f"{args.input}: no complete days to test")
    inc = data.returns
    if args.diurnal in ("auto", "on"):
        inc, _ = diurnal_adjust(inc)
    if args.group_by == "none":
        return data.n, [("all", inc)]
    years = np.array(data.years())
    return data.n, [(y, inc[years == y]) for y in dict.fromkeys(years.tolist())]


def cmd_test(args) -> int:
    eval_set = EvalSet.from_quantiles(args.eval_set)
    trunc = TruncationConfig(args.alpha_trunc, args.varpi)
    n, groups = _input_groups(args) if args.input else _simulated_groups(args)
    plan = _plan(n, args)
    cache = _cache(args)
    rows = []
    for label, inc in groups:
        q = critvals.critical_values(_limit_config(plan, args, eval_set, inc.shape[0]), args.levels, cache)
        res = local_gaussianity_test(inc, plan, trunc, eval_set, args.estimator, q)
        row = {"group": label, "statistic": res.statistic, "n_kept": res.n_kept,
               "kept_fraction": res.kept_fraction}
        for lvl in args.levels:
            row[f"q{_level_key(lvl)}"] = q[lvl]
        for lvl in args.levels:
            row[f"reject{_level_key(lvl)}"] = bool(res.reject[lvl])
        rows.append(row)
    _emit(rows, args.out)
    return 0


def _emit(rows: List[dict], fmt: str) -> None:
    if fmt == "json":
        sys.stdout.write(json.dumps(rows, indent=2) + "\n")
        return
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    sys.stdout.write(buf.getvalue())


def cmd_critvals(args) -> int:
    if args.n is None:
        raise UsageError("critvals needs --n")
    plan = _plan(args.n, args)
    cfg = _limit_config(plan, args, EvalSet.from_quantiles(args.eval_set), args.days)
    q = critvals.critical_values(cfg, args.levels, _cache(args))
    out = {"config_hash": cfg.config_hash(), "n": plan.n, "k_n": plan.k_n, "m_n": plan.m_n,
           "days": args.days, "quantiles": {repr(a): v for a, v in q.items()}}
    sys.stdout.write(json.dumps(out, indent=2) + "\n")
    return 0


def cmd_montecarlo(args) -> int:
    if args.table is not None:
        exps = montecarlo.table_experiments(args.table)
    else:
        exps = montecarlo.load_experiments(args.config)
    over = {}
    if args.reps is not None:
        over["replications"] = args.reps
    if args.seed is not None:
        over["seed"] = args.seed
    if args.days is not None:
        over["days"] = args.days
    if args.cv_reps is not None:
        over["cv_replications"] = args.cv_reps
    exps = [dataclasses.replace(e, **over) for e in exps]
    cache = _cache(args)
    table = montecarlo.RejectionTable()
    for e in exps:
        log.info("experiment %s n=%d k_n=%d reps=%d", e.model, e.n, e.k_n, e.replications)
        table.extend(montecarlo.run_experiment(e, cache, workers=args.workers))
    if table.failed:
        log.warning("%d replication(s) failed", table.failed)
    if args.out:
        montecarlo.emit_table(table, args.out)
    sys.stdout.write(montecarlo.format_table(table) + "\n")
    return 0


def cmd_simulate(args) -> int:
    path = simulate_model(MODEL_ALIASES[args.model], PathGrid(args.days, args.n), args.seed,
                          noise_sd=args.noise_sd)
    prices = prices_from_returns(path.increments)
    write_prices_csv(args.out, prices, business_dates(args.days, args.start), args.session)
    return 0


def _configure_logging(level: int) -> None:
    # own handler on the package logger, so repeated calls do not stack
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    handler.set_name("locgauss-cli")
    log.handlers = [h for h in log.handlers if h.get_name() != "locgauss-cli"] + [handler]
    log.setLevel(level)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING if args.verbose == 0 else logging.INFO if args.verbose == 1 else logging.DEBUG
    _configure_logging(level)
    try:
        return args.func(args)
    except UsageError as err:
        parser.error(str(err))
    except (LocGaussError, OSError) as err:
        sys.stderr.write(f"locgauss: error: {err}\n")
        return 1
    return 0  # unreachable


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
