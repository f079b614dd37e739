"""Critical values from the Gaussian limit of the devolatilized ECDF.

The test statistic is compared with the (1 - alpha)-quantile of

    sup_{tau in A} | Z1(tau) + sqrt(m/k) Z2(tau) + sqrt(m/k) * sqrt(n_total)/k * b(tau) |

where Z1 is a Brownian bridge in u = Phi(tau), Z2 = zeta * g(tau) is a
rank-one Gaussian process and b is the finite-sample bias function.
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Mapping, Optional

import numpy as np

from ._backend import kernels
from .ecdf import EvalSet
from .errors import ParameterError
from .limits import normal_cdf, normal_pdf, normal_quantile
from .spotvol import BIPOWER, TRUNCATED

log = logging.getLogger(__name__)

#: (pi/2)^2 + pi - 3: variance factor of the bipower volatility error.
BIPOWER_CONST = (math.pi / 2.0) ** 2 + math.pi - 3.0

CACHE_ENV = "LOCGAUSS_CACHE_DIR"
CACHE_FILE = "critvals.json"
CHUNK = 2000


def bias_term(tau, kind: str = BIPOWER):
    """Coefficient of 1/k_n in the mean of F_hat(tau) - Phi(tau).

    tau^2 Phi''(tau) - tau Phi'(tau) = -tau phi(tau) (tau^2 + 1).
    """
    tau = np.asarray(tau, dtype=float)
    core = -tau * normal_pdf(tau) * (tau * tau + 1.0)
    if kind == BIPOWER:
        return core / 8.0 * BIPOWER_CONST
    if kind == TRUNCATED:
        return core / 4.0
    raise ParameterError(f"unknown estimator kind {kind!r}")


def z2_shape(tau, kind: str = BIPOWER):
    """g with Cov(Z2(t1), Z2(t2)) = g(t1) g(t2)."""
    tau = np.asarray(tau, dtype=float)
    if kind == BIPOWER:
        return tau * normal_pdf(tau) / 2.0 * math.sqrt(BIPOWER_CONST)
    if kind == TRUNCATED:
        return tau * normal_pdf(tau)
    raise ParameterError(f"unknown estimator kind {kind!r}")


@dataclass(frozen=True)
class LimitLawConfig:
    """Everything that determines the simulated null distribution of the sup.

    ``days`` is the number of pooled days; the bias multiplier uses the
    total increment count ``n * days``. ``z2_multiplier`` and
    ``bias_multiplier`` override the values implied by (n, k_n, m_n).
    """

    estimator_kind: str
    n: int
    k_n: int
    m_n: int
    eval_set: EvalSet = field(default_factory=EvalSet.default)
    replications: int = 100_000
    grid_step: float = 0.001
    seed: int = 0
    days: int = 1
    z2_multiplier: Optional[float] = None
    bias_multiplier: Optional[float] = None

    def __post_init__(self):
        if self.estimator_kind not in (BIPOWER, TRUNCATED):
            raise ParameterError(f"unknown estimator kind {self.estimator_kind!r}")
        if self.replications < 1000:
            raise ParameterError("replications must be at least 1000")
        if not 0.0 < self.grid_step < 1.0:
            raise ParameterError("grid_step must lie in (0, 1)")
        if self.k_n < 1 or not 1 <= self.m_n <= self.k_n or self.n < self.k_n or self.days < 1:
            raise ParameterError("need 1 <= m_n <= k_n <= n and days >= 1")

    @property
    def z2_mult(self) -> float:
        if self.z2_multiplier is not None:
            return float(self.z2_multiplier)
        return math.sqrt(self.m_n / self.k_n)

    @property
    def bias_mult(self) -> float:
        if self.bias_multiplier is not None:
            return float(self.bias_multiplier)
        return math.sqrt(self.m_n / self.k_n) * math.sqrt(self.n * self.days) / self.k_n

    def to_dict(self) -> dict:
        d = asdict(self)
        d["eval_set"] = [list(iv) for iv in self.eval_set.intervals]
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class CriticalValue:
    alpha: float
    q: float
    config_hash: str = ""


@dataclass(frozen=True)
class _Grid:
    tau: np.ndarray
    u: np.ndarray
    sq_du: np.ndarray
    w1_scale: float
    cell_left: np.ndarray
    cell_du: np.ndarray


def build_grid(eval_set: EvalSet, step: float) -> _Grid:
    """Grid equally spaced in u = Phi(tau) inside each interval, spacing <= step."""
    taus, us, lefts = [], [], []
    offset = 0
    for a, b in eval_set.intervals:
        ua, ub = float(normal_cdf(a)), float(normal_cdf(b))
        cells = max(1, math.ceil((ub - ua) / step - 1e-12))
        u = np.linspace(ua, ub, cells + 1)
        tau = np.empty_like(u)
        tau[0], tau[-1] = a, b
        if cells > 1:
            tau[1:-1] = normal_quantile(u[1:-1])
        taus.append(tau)
        us.append(u)
        lefts.append(offset + np.arange(cells))
        offset += cells + 1
    tau = np.concatenate(taus)
    u = np.concatenate(us)
    if u[0] <= 0.0 or u[-1] >= 1.0 or np.any(np.diff(u) <= 0.0):
        raise ParameterError("degenerate evaluation grid")
    du = np.diff(np.concatenate([[0.0], u]))
    cell_left = np.concatenate(lefts).astype(np.int64)
    cell_du = u[cell_left + 1] - u[cell_left]
    return _Grid(tau, u, np.sqrt(du), math.sqrt(1.0 - u[-1]), cell_left, cell_du)


def simulate_sup_limit(config: LimitLawConfig, replications: Optional[int] = None) -> np.ndarray:
    """Draws of the sup over the evaluation set of the limit process.

    Z1 is simulated on the grid and the bridge maximum inside each grid
    cell is sampled from its exact conditional law, so the grid does not
    bias the sup downward. Output order is fixed by replication index.
    """
    reps = config.replications if replications is None else replications
    grid = build_grid(config.eval_set, config.grid_step)
    shape = config.z2_mult * z2_shape(grid.tau, config.estimator_kind)
    bias = config.bias_mult * bias_term(grid.tau, config.estimator_kind)
    g, c = grid.u.size, grid.cell_left.size
    root = np.random.SeedSequence(config.seed)
    out = np.empty(reps)
    for i, start in enumerate(range(0, reps, CHUNK)):
        r = min(CHUNK, reps - start)
        rng = np.random.default_rng(np.random.SeedSequence(root.entropy, spawn_key=(i,)))
        z = rng.standard_normal((r, g + 1))
        zeta = rng.standard_normal(r)
        unif = rng.random((r, c, 2))
        out[start:start + r] = kernels.sup_limit(
            z, zeta, unif, grid.sq_du, grid.u, grid.w1_scale, shape, bias,
            grid.cell_left, grid.cell_du,
        )
    return out


def simulate_limit_paths(config: LimitLawConfig, tau, replications: int, seed=None):
    """Draws of (Z1(tau), Z2(tau)) at the given points, for diagnostics.

    Returns two arrays of shape (replications, len(tau)); Z2 here is the
    un-multiplied process zeta * g(tau).
    """
    tau = np.sort(np.asarray(tau, dtype=float))
    rng = np.random.default_rng(config.seed if seed is None else seed)
    u = normal_cdf(tau)
    du = np.diff(np.concatenate([[0.0], u]))
    w = np.cumsum(rng.standard_normal((replications, u.size)) * np.sqrt(du), axis=1)
    w1 = w[:, -1] + rng.standard_normal(replications) * math.sqrt(1.0 - u[-1])
    z1 = w - u * w1[:, None]
    z2 = rng.standard_normal(replications)[:, None] * z2_shape(tau, config.estimator_kind)
    return z1, z2


def critical_value(sup_draws, alpha: float, config_hash: str = "") -> CriticalValue:
    """Empirical (1 - alpha)-quantile, taking the higher order statistic."""
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
    d = np.asarray(sup_draws, dtype=float)
    if d.size == 0:
        raise ParameterError("no draws supplied")
    return CriticalValue(float(alpha), float(np.quantile(d, 1.0 - alpha, method="higher")), config_hash)


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "locgauss"


class CriticalValueCache:
    """JSON file mapping config hash -> {"config": ..., "quantiles": {alpha: q}}."""

    def __init__(self, directory=None):
        self.directory = Path(directory) if directory is not None else default_cache_dir()
        self.path = self.directory / CACHE_FILE

    def load(self) -> dict:
        if not self.path.exists():
            return {}
        with open(self.path) as fh:
            return json.load(fh)

    def lookup(self, config: LimitLawConfig, levels: Iterable[float]) -> Optional[Dict[float, float]]:
        entry = self.load().get(config.config_hash())
        if entry is None:
            return None
        q = entry["quantiles"]
        keys = [_level_key(a) for a in levels]
        if not all(k in q for k in keys):
            return None
        return {float(a): float(q[k]) for a, k in zip(levels, keys)}

    def store(self, config: LimitLawConfig, quantiles: Mapping[float, float]) -> None:
        data = self.load()
        h = config.config_hash()
        entry = data.setdefault(h, {"config": config.to_dict(), "quantiles": {}})
        entry["quantiles"].update({_level_key(a): float(q) for a, q in quantiles.items()})
        self.directory.mkdir(parents=True, exist_ok=True)
        tmp = self.path.with_suffix(".tmp")
        with open(tmp, "w") as fh:
            json.dump(data, fh, indent=1, sort_keys=True)
        os.replace(tmp, self.path)


def _level_key(alpha: float) -> str:
    return repr(float(alpha))


def critical_values(config: LimitLawConfig, levels: Iterable[float] = (0.01, 0.05),
                    cache: Optional[CriticalValueCache] = None) -> Dict[float, float]:
    """q(alpha) for every level, reusing the cache when possible."""
    levels = [float(a) for a in levels]
    h = config.config_hash()
    if cache is not None:
        hit = cache.lookup(config, levels)
        if hit is not None:
            log.info("critical-value cache hit %s", h)
            return hit
    log.info("critical-value cache miss %s: simulating %d replications", h, config.replications)
    draws = simulate_sup_limit(config)
    out = {a: critical_value(draws, a, h).q for a in levels}
    if cache is not None:
        cache.store(config, out)
    return out
