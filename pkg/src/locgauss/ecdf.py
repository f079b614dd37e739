"""Empirical CDF of devolatilized, truncated increments and its KS distance.

Each tested increment (the first m_n of every block) is scaled as
sqrt(n) dX_i / sqrt(V_j(i)) using the leave-one-out volatility V_j(i).
Increments larger than alpha * sqrt(V_j) * n^(-varpi) (bipower) or
alpha * n^(-varpi) (truncated variation) are dropped. Days are processed
separately and the kept values are pooled.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from . import limits
from .errors import DegenerateVolatilityError, EmptyStatisticError, ParameterError
from .spotvol import (
    BIPOWER,
    TRUNCATED,
    BlockPlan,
    TruncationConfig,
    VolEstimates,
    as_blocks,
    leave_out_estimates,
)


@dataclass(frozen=True)
class EvalSet:
    """Finite union of disjoint closed intervals [a, b] in tau."""

    intervals: tuple

    def __post_init__(self):
        iv = tuple((float(a), float(b)) for a, b in self.intervals)
        if not iv:
            raise ParameterError("evaluation set must contain at least one interval")
        for a, b in iv:
            if not a < b:
                raise ParameterError(f"interval [{a}, {b}] is empty")
        for (_, b0), (a1, _) in zip(iv, iv[1:]):
            if not b0 < a1:
                raise ParameterError("intervals must be sorted and disjoint")
        object.__setattr__(self, "intervals", iv)

    @classmethod
    def from_quantiles(cls, pairs: Sequence[Sequence[float]]) -> "EvalSet":
        return cls(tuple((limits.normal_quantile(lo), limits.normal_quantile(hi)) for lo, hi in pairs))

    @classmethod
    def default(cls) -> "EvalSet":
        """[Q(0.01), Q(0.40)] U [Q(0.60), Q(0.99)] with Q the normal quantile."""
        return cls.from_quantiles(DEFAULT_QUANTILE_PAIRS)

    @property
    def total_length(self) -> float:
        return sum(b - a for a, b in self.intervals)

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=bool)
        for a, b in self.intervals:
            out |= (x >= a) & (x <= b)
        return out


DEFAULT_QUANTILE_PAIRS = ((0.01, 0.40), (0.60, 0.99))


@dataclass(frozen=True)
class EcdfCurve:
    """Right-continuous step CDF of the kept standardized increments."""

    kept_values: np.ndarray
    n_kept: int
    kind: str
    plan: BlockPlan
    n_tested: int

    @property
    def kept_fraction(self) -> float:
        return self.n_kept / self.n_tested

    def __call__(self, tau):
        return np.searchsorted(self.kept_values, tau, side="right") / self.n_kept

    def left_limit(self, tau):
        return np.searchsorted(self.kept_values, tau, side="left") / self.n_kept


@dataclass
class TestResult:
    statistic: float
    n_kept: int
    kept_fraction: float
    critical_values: Mapping[float, float] = field(default_factory=dict)
    reject: Mapping[float, bool] = field(default_factory=dict)

    __test__ = False  # not a pytest class


def _threshold_and_keep(blocks, vol: VolEstimates, plan: BlockPlan, trunc: TruncationConfig):
    tested = blocks[..., : plan.m_n]
    level = trunc.level(plan.n)
    if vol.kind == BIPOWER:
        per_block = np.asarray(vol.per_block)
        if per_block.ndim == 1:
            per_block = per_block[None, :]
        thr = (trunc.alpha * np.sqrt(per_block) * level)[..., None]
    elif vol.kind == TRUNCATED:
        thr = trunc.alpha * level
    else:
        raise ParameterError(f"unknown estimator kind {vol.kind!r}")
    return tested, np.abs(tested) <= thr


def count_kept(increments, vol: VolEstimates, plan: BlockPlan, trunc: TruncationConfig) -> int:
    """Number of tested increments that pass the jump threshold."""
    blocks = as_blocks(increments, plan)
    _, keep = _threshold_and_keep(blocks, vol, plan, trunc)
    return int(keep.sum())


def standardized_values(increments, plan: BlockPlan, trunc: TruncationConfig, kind: str = BIPOWER):
    """Kept standardized increments in (day, block, index) order, plus the tested count."""
    x = np.atleast_2d(np.asarray(increments, dtype=np.float64))
    blocks = as_blocks(x, plan)
    vol = leave_out_estimates(x, plan, kind, trunc)
    tested, keep = _threshold_and_keep(blocks, vol, plan, trunc)
    den = np.sqrt(vol.leave_out[..., : plan.m_n])
    if np.any(keep & (den == 0.0)):
        bad = int((keep & (den == 0.0)).sum())
        raise DegenerateVolatilityError(
            f"{bad} kept increment(s) have a zero leave-out volatility estimate"
        )
    values = (math.sqrt(plan.n) * tested[keep]) / den[keep]
    return values, tested.size


def ecdf_devol(increments, plan: BlockPlan, trunc: Optional[TruncationConfig] = None,
               kind: str = BIPOWER) -> EcdfCurve:
    """Build the devolatilized empirical CDF from one day or a stack of days."""
    trunc = trunc or TruncationConfig()
    values, n_tested = standardized_values(increments, plan, trunc, kind)
    if values.size == 0:
        raise EmptyStatisticError("no increment survived truncation")
    return EcdfCurve(np.sort(values), int(values.size), kind, plan, int(n_tested))


def ks_distance(curve: EcdfCurve, reference, eval_set: EvalSet) -> float:
    """sup over the evaluation set of |F_hat - reference|, computed exactly.

    Between jumps the step function is flat and the reference is monotone,
    so the sup is attained at interval endpoints or at a jump, approached
    from either side.
    """
    if eval_set is None or not eval_set.intervals:
        raise ParameterError("empty evaluation set")
    cdf = limits.as_cdf(reference)
    v = curve.kept_values
    best = 0.0
    for a, b in eval_set.intervals:
        ends = np.array([a, b])
        best = max(best, float(np.max(np.abs(curve(ends) - cdf(ends)))))
        lo, hi = np.searchsorted(v, a, side="left"), np.searchsorted(v, b, side="right")
        if hi > lo:
            jumps = np.unique(v[lo:hi])
            right = np.searchsorted(v, jumps, side="right") / curve.n_kept
            left = np.searchsorted(v, jumps, side="left") / curve.n_kept
            g_at = cdf(jumps)
            g_before = cdf(np.nextafter(jumps, -np.inf))
            best = max(best, float(np.max(np.abs(right - g_at))),
                       float(np.max(np.abs(left - g_before))))
    return best


def ks_statistic(curve: EcdfCurve, reference, eval_set: EvalSet) -> float:
    """sqrt(N) * sup_A |F_hat - reference| with N the kept count."""
    return math.sqrt(curve.n_kept) * ks_distance(curve, reference, eval_set)


def local_gaussianity_test(increments, plan: BlockPlan, trunc: Optional[TruncationConfig] = None,
                           eval_set: Optional[EvalSet] = None, kind: str = BIPOWER,
                           critical_values: Optional[Mapping[float, float]] = None) -> TestResult:
    """Statistic against Phi and the reject decision for each supplied level."""
    eval_set = eval_set or EvalSet.default()
    curve = ecdf_devol(increments, plan, trunc, kind)
    stat = ks_statistic(curve, "normal", eval_set)
    cv = dict(critical_values or {})
    return TestResult(
        statistic=stat,
        n_kept=curve.n_kept,
        kept_fraction=curve.kept_fraction,
        critical_values=cv,
        reject={lvl: stat > q for lvl, q in cv.items()},
    )
