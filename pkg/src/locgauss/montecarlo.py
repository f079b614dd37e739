"""Size/power experiments: simulate a year of days, test it, count rejections."""
from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import yaml

from . import critvals
from .ecdf import EvalSet, local_gaussianity_test
from .errors import LocGaussError, ParameterError
from .paths import DEFAULT_NOISE_SD, MODELS, PathGrid, child_seed, simulate_model
from .spotvol import BIPOWER, BlockPlan, TruncationConfig

log = logging.getLogger(__name__)

DEFAULT_LEVELS = (0.01, 0.05)
TRADING_DAYS = 252

#: block sizes of the size (1) and power (2, 3) table layouts, by sampling frequency
TABLE_BLOCKS = {100: (33, 50, 100), 200: (50, 67, 200)}
TABLE_MODELS = {1: "null_sv_jd", 2: "pure_jump_ts", 3: "pure_jump_ts_plus_noise"}


def default_m_ratio(n: int) -> float:
    return 0.75 if n <= 100 else 0.70


@dataclass(frozen=True)
class Experiment:
    model: str
    n: int
    k_n: int
    m_n_ratio: Optional[float] = None
    trunc: TruncationConfig = TruncationConfig()
    eval_set: EvalSet = field(default_factory=EvalSet.default)
    days: int = TRADING_DAYS
    replications: int = 1000
    seed: int = 0
    levels: Tuple[float, ...] = DEFAULT_LEVELS
    estimator: str = BIPOWER
    noise_sd: float = DEFAULT_NOISE_SD
    cv_replications: int = 100_000

    def __post_init__(self):
        if self.model not in MODELS:
            raise ParameterError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if self.m_n_ratio is None:
            object.__setattr__(self, "m_n_ratio", default_m_ratio(self.n))
        if self.replications < 1:
            raise ParameterError("replications must be positive")
        object.__setattr__(self, "levels", tuple(float(a) for a in self.levels))
        self.plan  # validates (n, k_n, m_n)

    @property
    def plan(self) -> BlockPlan:
        m = math.floor(self.m_n_ratio * self.k_n + 1e-9)
        if m < 1:
            raise ParameterError(f"m_n = floor({self.m_n_ratio} * {self.k_n}) must be >= 1")
        return BlockPlan(self.n, self.k_n, m)

    def limit_config(self) -> critvals.LimitLawConfig:
        p = self.plan
        return critvals.LimitLawConfig(
            estimator_kind=self.estimator, n=p.n, k_n=p.k_n, m_n=p.m_n,
            eval_set=self.eval_set, replications=self.cv_replications,
            seed=self.seed, days=self.days,
        )


@dataclass(frozen=True)
class RejectionRow:
    model: str
    n: int
    k_n: int
    m_n: int
    level: float
    rejections: int
    reps: int
    seed: int
    failed: int = 0

    @property
    def rate(self) -> float:
        return self.rejections / self.reps if self.reps else float("nan")

    @property
    def se(self) -> float:
        r = self.rate
        return math.sqrt(r * (1.0 - r) / self.reps) if self.reps else float("nan")


@dataclass
class RejectionTable:
    rows: List[RejectionRow] = field(default_factory=list)

    def rate(self, level: float, k_n: Optional[int] = None) -> float:
        for r in self.rows:
            if math.isclose(r.level, level) and (k_n is None or r.k_n == k_n):
                return r.rate
        raise KeyError((level, k_n))

    @property
    def failed(self) -> int:
        seen = {}
        for r in self.rows:
            seen[(r.model, r.n, r.k_n, r.seed)] = r.failed
        return sum(seen.values())

    def extend(self, other: "RejectionTable") -> None:
        self.rows.extend(other.rows)


def _one_replication(exp: Experiment, index: int, q: Dict[float, float]):
    seed = child_seed(exp.seed, index)
    path = simulate_model(exp.model, PathGrid(exp.days, exp.n), seed, noise_sd=exp.noise_sd)
    res = local_gaussianity_test(path.increments, exp.plan, exp.trunc, exp.eval_set,
                                 exp.estimator, q)
    return res.statistic


def _run_indices(exp: Experiment, indices: Sequence[int], q: Dict[float, float]):
    stats, errors = [], []
    for i in indices:
        try:
            stats.append(_one_replication(exp, i, q))
        except LocGaussError as err:
            stats.append(float("nan"))
            errors.append(f"replication {i}: {err}")
    return stats, errors


def replication_statistics(exp: Experiment, q: Optional[Dict[float, float]] = None,
                           workers: int = 1) -> Tuple[np.ndarray, List[str]]:
    """Statistic for every replication (NaN where it failed), in index order."""
    q = q or {}
    idx = list(range(exp.replications))
    if workers <= 1:
        stats, errors = _run_indices(exp, idx, q)
    else:
        parts = [idx[w::workers] for w in range(workers)]
        stats = [float("nan")] * exp.replications
        errors = []
        with ProcessPoolExecutor(workers) as pool:
            futures = [pool.submit(_run_indices, exp, part, q) for part in parts]
            for part, fut in zip(parts, futures):
                s, e = fut.result()
                for i, v in zip(part, s):
                    stats[i] = v
                errors.extend(e)
    return np.asarray(stats, dtype=float), errors


def run_experiment(exp: Experiment, cache: Optional[critvals.CriticalValueCache] = None,
                   workers: int = 1) -> RejectionTable:
    """Rejection rate at each level over the replications.

    Failed replications are excluded from the rate and reported in ``failed``.
    """
    q = critvals.critical_values(exp.limit_config(), exp.levels, cache)
    stats, errors = replication_statistics(exp, q, workers)
    for e in errors:
        log.warning("%s %s", exp.model, e)
    ok = ~np.isnan(stats)
    p = exp.plan
    rows = [
        RejectionRow(exp.model, p.n, p.k_n, p.m_n, lvl, int((stats[ok] > q[lvl]).sum()),
                     int(ok.sum()), exp.seed, int((~ok).sum()))
        for lvl in exp.levels
    ]
    return RejectionTable(rows)


def table_experiments(table: int, replications: int = 1000, seed: int = 0,
                      days: int = TRADING_DAYS, **kw) -> List[Experiment]:
    """Experiments for table 1 (size), 2 (power) or 3 (power under noise)."""
    if table not in TABLE_MODELS:
        raise ParameterError(f"table must be one of {sorted(TABLE_MODELS)}, got {table}")
    return [
        Experiment(TABLE_MODELS[table], n, k, replications=replications, seed=seed, days=days, **kw)
        for n, ks in TABLE_BLOCKS.items()
        for k in ks
    ]


CSV_COLUMNS = ("model", "n", "k_n", "m_n", "level", "rate", "se", "reps", "seed")


def emit_table(table: RejectionTable, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in table.rows:
            w.writerow([r.model, r.n, r.k_n, r.m_n, f"{r.level:g}", f"{r.rate:.4f}",
                        f"{r.se:.4f}", r.reps, r.seed])


def read_table(path) -> RejectionTable:
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            reps = int(rec["reps"])
            rows.append(RejectionRow(
                rec["model"], int(rec["n"]), int(rec["k_n"]), int(rec["m_n"]),
                float(rec["level"]), round(float(rec["rate"]) * reps), reps, int(rec["seed"]),
            ))
    return RejectionTable(rows)


def format_table(table: RejectionTable) -> str:
    """Rejection rates in percent, one line per (n, level), columns by k_n."""
    lines = []
    by_n: Dict[Tuple[str, int], Dict[float, Dict[int, float]]] = {}
    for r in table.rows:
        by_n.setdefault((r.model, r.n), {}).setdefault(r.level, {})[r.k_n] = r.rate
    for (model, n), levels in by_n.items():
        ks = sorted({k for v in levels.values() for k in v})
        lines.append(f"{model}  n={n}")
        lines.append("  level  " + "".join(f"k_n={k:<6d}" for k in ks))
        for lvl in sorted(levels):
            cells = "".join(f"{100 * levels[lvl].get(k, float('nan')):<10.1f}" for k in ks)
            lines.append(f"  {100 * lvl:4.0f}%  {cells}")
    return "\n".join(lines)


def load_experiments(path) -> List[Experiment]:
    """Experiments from a YAML file.

    Either a single mapping or ``{"experiments": [mapping, ...]}``. Keys:
    model, n, k_n (int or list), levels, reps, seed, and optionally
    m_n_ratio, days, estimator, noise_sd, cv_reps, alpha_trunc, varpi,
    eval_set (list of [p_lo, p_hi] normal-quantile pairs).
    """
    with open(path) as fh:
        doc = yaml.safe_load(fh) or {}
    entries = doc.get("experiments", [doc]) if isinstance(doc, dict) else doc
    out = []
    for entry in entries:
        entry = dict(entry)
        unknown = set(entry) - _CONFIG_KEYS
        if unknown:
            raise ParameterError(f"unknown config keys {sorted(unknown)} in {path}")
        for key in ("model", "n", "k_n"):
            if key not in entry:
                raise ParameterError(f"config entry is missing {key!r}")
        ks = entry["k_n"] if isinstance(entry["k_n"], list) else [entry["k_n"]]
        kw = dict(
            model=entry["model"], n=int(entry["n"]),
            m_n_ratio=entry.get("m_n_ratio"),
            trunc=TruncationConfig(float(entry.get("alpha_trunc", 3.0)), float(entry.get("varpi", 0.49))),
            days=int(entry.get("days", TRADING_DAYS)),
            replications=int(entry.get("reps", 1000)),
            seed=int(entry.get("seed", 0)),
            levels=tuple(entry.get("levels", DEFAULT_LEVELS)),
            estimator=entry.get("estimator", BIPOWER),
            noise_sd=float(entry.get("noise_sd", DEFAULT_NOISE_SD)),
            cv_replications=int(entry.get("cv_reps", 100_000)),
        )
        if "eval_set" in entry:
            kw["eval_set"] = EvalSet.from_quantiles(entry["eval_set"])
        out.extend(Experiment(k_n=int(k), **kw) for k in ks)
    return out


_CONFIG_KEYS = {
    "model", "n", "k_n", "m_n_ratio", "days", "reps", "seed", "levels", "estimator",
    "noise_sd", "cv_reps", "alpha_trunc", "varpi", "eval_set",
}
