"""Block-local volatility estimators with leave-one-out adjustments.

Increments may be a single day (shape ``(n,)``) or a stack of days
(shape ``(days, n)``); results keep the leading day axis in the second case.
Increments past ``J * k_n`` in a day are ignored.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._backend import kernels
from .errors import ParameterError, ShapeError

BIPOWER = "bipower"
TRUNCATED = "truncated"


@dataclass(frozen=True)
class BlockPlan:
    """Split each day of ``n`` increments into J = n // k_n blocks of ``k_n``.

    Only the first ``m_n`` increments of each block are tested.
    """

    n: int
    k_n: int
    m_n: int

    def __post_init__(self):
        for name in ("n", "k_n", "m_n"):
            v = getattr(self, name)
            if int(v) != v:
                raise ParameterError(f"{name} must be an integer, got {v}")
        if self.k_n < 4:
            raise ParameterError(f"k_n must be at least 4, got {self.k_n}")
        if self.n // self.k_n < 1:
            raise ParameterError(f"k_n={self.k_n} exceeds n={self.n}")
        if not 1 <= self.m_n <= self.k_n:
            raise ParameterError(f"m_n must lie in [1, k_n], got {self.m_n}")

    @property
    def n_blocks(self) -> int:
        return self.n // self.k_n

    @property
    def tested_per_day(self) -> int:
        return self.n_blocks * self.m_n

    @classmethod
    def from_blocks(cls, n: int, blocks: int, m_ratio: float) -> "BlockPlan":
        """Plan with k_n = n // blocks and m_n = floor(m_ratio * k_n)."""
        if blocks < 1:
            raise ParameterError(f"number of blocks must be positive, got {blocks}")
        k = n // blocks
        return cls(n, k, max(1, math.floor(m_ratio * k + 1e-9)))


@dataclass(frozen=True)
class TruncationConfig:
    """Jump threshold alpha * n^(-varpi) (times the local volatility for bipower)."""

    alpha: float = 3.0
    varpi: float = 0.49

    def __post_init__(self):
        if not self.alpha > 0:
            raise ParameterError(f"alpha must be positive, got {self.alpha}")
        if not 0.0 < self.varpi < 0.5:
            raise ParameterError(f"varpi must lie in (0, 1/2), got {self.varpi}")

    def level(self, n: int) -> float:
        return n ** (-self.varpi)


@dataclass(frozen=True)
class VolEstimates:
    """Per-block estimates (..., J) and leave-one-out values (..., J, k_n).

    ``n_floored`` counts leave-out values that came out negative and were
    set to zero.
    """

    per_block: np.ndarray
    leave_out: Optional[np.ndarray]
    kind: str
    n_floored: int = 0


def as_blocks(increments, plan: BlockPlan) -> np.ndarray:
    """View increments as (days, J, k_n); 1-D input becomes one day."""
    x = np.asarray(increments, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2:
        raise ShapeError(f"increments must be 1-D or 2-D, got shape {x.shape}")
    need = plan.n_blocks * plan.k_n
    if x.shape[1] < need:
        raise ShapeError(f"day has {x.shape[1]} increments, plan needs {need}")
    return x[:, :need].reshape(x.shape[0], plan.n_blocks, plan.k_n)


def _squeeze(arr, increments):
    return arr[0] if np.ndim(increments) == 1 else arr


def bipower_blocks(increments, plan: BlockPlan) -> VolEstimates:
    """(pi/2) * n/(k_n-1) * sum of adjacent |dX||dX| within each block."""
    blocks = as_blocks(increments, plan)
    a = np.abs(blocks)
    s = np.cumsum(a[..., :-1] * a[..., 1:], axis=-1)[..., -1]
    v = (math.pi / 2.0) * (plan.n / (plan.k_n - 1)) * s
    return VolEstimates(_squeeze(v, increments), None, BIPOWER)


def bipower_leave_out(increments, plan: BlockPlan) -> VolEstimates:
    """Block bipower variation with the products touching increment i removed."""
    blocks = as_blocks(increments, plan)
    per_block, leave_out, floored = kernels.bipower_leave_out(blocks, float(plan.n))
    return VolEstimates(
        _squeeze(per_block, increments), _squeeze(leave_out, increments), BIPOWER, floored
    )


def _truncated_parts(increments, plan: BlockPlan, trunc: TruncationConfig):
    blocks = as_blocks(increments, plan)
    thr = trunc.alpha * trunc.level(plan.n)
    sq = np.where(np.abs(blocks) <= thr, blocks * blocks, 0.0)
    c = (plan.n / plan.k_n) * np.cumsum(sq, axis=-1)[..., -1]
    return c, sq


def truncated_blocks(increments, plan: BlockPlan, trunc: TruncationConfig) -> VolEstimates:
    """(n/k_n) * sum of squared increments below alpha * n^(-varpi)."""
    c, _ = _truncated_parts(increments, plan, trunc)
    return VolEstimates(_squeeze(c, increments), None, TRUNCATED)


def truncated_leave_out(increments, plan: BlockPlan, trunc: TruncationConfig) -> VolEstimates:
    c, sq = _truncated_parts(increments, plan, trunc)
    k = plan.k_n
    lo = (k / (k - 1)) * c[..., None] - (plan.n / (k - 1)) * sq
    neg = lo < 0.0
    floored = int(neg.sum())
    lo[neg] = 0.0
    return VolEstimates(_squeeze(c, increments), _squeeze(lo, increments), TRUNCATED, floored)


def leave_out_estimates(increments, plan: BlockPlan, kind: str = BIPOWER,
                        trunc: Optional[TruncationConfig] = None) -> VolEstimates:
    if kind == BIPOWER:
        return bipower_leave_out(increments, plan)
    if kind == TRUNCATED:
        return truncated_leave_out(increments, plan, trunc or TruncationConfig())
    raise ParameterError(f"unknown estimator kind {kind!r}")
