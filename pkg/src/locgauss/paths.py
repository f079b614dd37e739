"""Seedable simulators for the data-generating models.

Time is measured in trading days; each day is observed on the grid
0, 1/n, ..., 1. All simulators are pure functions of (params, grid, seed).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy import special

from ._backend import kernels
from .errors import ParameterError

#: Euler sub-steps per observation interval for the variance process.
CIR_SUBSTEPS = 10


def child_seed(seed, index: int) -> np.random.SeedSequence:
    """Deterministic child of ``seed`` that does not mutate the parent."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return np.random.SeedSequence(ss.entropy, spawn_key=tuple(ss.spawn_key) + (index,))


def make_rng(seed) -> np.random.Generator:
    """Generator from an int, a SeedSequence or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class StableLaw:
    """Stable law with log-characteristic function -t|cu|^beta(1 - i gamma sign(u) w(u))."""

    beta: float
    gamma: float = 0.0
    c: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.beta <= 2.0:
            raise ParameterError(f"beta must lie in (0, 2], got {self.beta}")
        if not -1.0 <= self.gamma <= 1.0:
            raise ParameterError(f"gamma must lie in [-1, 1], got {self.gamma}")
        if not self.c > 0.0:
            raise ParameterError(f"scale c must be positive, got {self.c}")


@dataclass(frozen=True)
class SvJumpDiffusionParams:
    """Square-root stochastic volatility plus double-exponential jumps.

    dX = sqrt(V) dW + jumps,  dV = kappa (theta - V) dt + xi sqrt(V) dB,
    Corr(W, B) = rho. Jumps arrive at ``jump_intensity`` per day with
    Laplace-distributed sizes of scale ``jump_scale``.
    """

    kappa: float = 0.03
    theta: float = 1.0
    xi: float = 0.1
    rho: float = -0.5
    jump_intensity: float = 0.5
    jump_scale: float = 0.4472
    v0: Optional[float] = None

    def __post_init__(self):
        if self.v0 is None:
            object.__setattr__(self, "v0", self.theta)
        if self.kappa < 0 or self.theta < 0 or self.xi < 0 or self.v0 < 0:
            raise ParameterError("kappa, theta, xi and v0 must be nonnegative")
        if not -1.0 <= self.rho <= 1.0:
            raise ParameterError(f"rho must lie in [-1, 1], got {self.rho}")
        if self.jump_intensity < 0:
            raise ParameterError("jump_intensity must be nonnegative")
        if not self.jump_scale > 0:
            raise ParameterError("jump_scale must be positive")


@dataclass(frozen=True)
class TemperedStableParams:
    """Symmetric tempered stable S with Levy density A exp(-lam|x|) / |x|^(1+alpha).

    The observed process is S evaluated at the integrated variance of
    ``time_change``. ``cutoff`` is the jump size below which jumps are
    replaced by a Gaussian of matched variance.
    """

    A: float = 0.1089
    lambda_tempering: float = 1.0
    alpha_ts: float = 1.8
    time_change: SvJumpDiffusionParams = SvJumpDiffusionParams(jump_intensity=0.0)
    cutoff: float = 0.005

    def __post_init__(self):
        if self.A < 0:
            raise ParameterError("A must be nonnegative")
        if not self.lambda_tempering > 0:
            raise ParameterError("lambda_tempering must be positive")
        if not 0.0 < self.alpha_ts < 2.0:
            raise ParameterError("alpha_ts must lie in (0, 2)")
        if not self.cutoff > 0:
            raise ParameterError("cutoff must be positive")

    def second_moment(self) -> float:
        """Variance of S_1: int x^2 nu(dx) = 2 A Gamma(2-alpha) lam^(alpha-2)."""
        a = self.alpha_ts
        return 2.0 * self.A * math.gamma(2.0 - a) * self.lambda_tempering ** (a - 2.0)

    def small_jump_variance(self) -> float:
        """int_{|x|<cutoff} x^2 nu(dx)."""
        a, lam = self.alpha_ts, self.lambda_tempering
        return self.second_moment() * special.gammainc(2.0 - a, lam * self.cutoff)

    def big_jump_proposal_rate(self) -> float:
        """Rate of the untempered (Pareto) proposals with |x| >= cutoff."""
        a = self.alpha_ts
        return 2.0 * self.A * self.cutoff ** (-a) / a


@dataclass(frozen=True)
class PathGrid:
    days: int
    n: int

    def __post_init__(self):
        if int(self.days) != self.days or self.days < 1:
            raise ParameterError(f"days must be a positive integer, got {self.days}")
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError(f"n must be a positive integer, got {self.n}")


@dataclass(frozen=True)
class SamplePath:
    """``increments`` is (days, n); ``latent_spot_var`` the variance at left endpoints."""

    increments: np.ndarray
    latent_spot_var: Optional[np.ndarray] = None

    @property
    def days(self) -> int:
        return self.increments.shape[0]

    @property
    def n(self) -> int:
        return self.increments.shape[1]


def _variance_path(p: SvJumpDiffusionParams, grid: PathGrid, rng, sub=CIR_SUBSTEPS):
    """Positive-part CIR states on the sub-grid plus the driving normals."""
    steps = grid.days * grid.n * sub
    dt = 1.0 / (grid.n * sub)
    zb = rng.standard_normal(steps)
    v = kernels.cir_full_truncation(p.v0, p.kappa, p.theta, p.xi, dt, zb)
    np.maximum(v, 0.0, out=v)
    return v, zb, dt


def simulate_sv_jump_diffusion(params: SvJumpDiffusionParams, grid: PathGrid, seed) -> SamplePath:
    """Square-root SV diffusion with leverage plus compound-Poisson Laplace jumps."""
    rng = make_rng(seed)
    sub = CIR_SUBSTEPS
    v, zb, dt = _variance_path(params, grid, rng)
    zp = rng.standard_normal(zb.shape[0])
    rho = params.rho
    dw = math.sqrt(dt) * (rho * zb + math.sqrt(1.0 - rho * rho) * zp)
    diff = (np.sqrt(v[:-1]) * dw).reshape(grid.days, grid.n, sub).sum(axis=2)

    counts = rng.poisson(params.jump_intensity / grid.n, size=(grid.days, grid.n))
    total = int(counts.sum())
    if total:
        sizes = rng.exponential(params.jump_scale, total)
        sizes *= np.where(rng.random(total) < 0.5, -1.0, 1.0)
        owner = np.repeat(np.arange(counts.size), counts.ravel())
        diff += np.bincount(owner, weights=sizes, minlength=counts.size).reshape(counts.shape)

    spot = v[:-1:sub].reshape(grid.days, grid.n)
    return SamplePath(diff, spot)


def _tempered_stable_jumps(params: TemperedStableParams, tau: np.ndarray, rng, chunk=2_000_000):
    """Sum of jumps with |x| >= cutoff over each time length in ``tau`` (flat)."""
    rate = params.big_jump_proposal_rate()
    out = np.zeros(tau.size)
    if params.A == 0.0 or rate == 0.0:
        return out
    counts = rng.poisson(rate * tau)
    # bound memory: walk through intervals in pieces of ~chunk proposals
    csum = np.cumsum(counts)
    start = 0
    while start < tau.size:
        done = csum[start - 1] if start else 0
        stop = int(np.searchsorted(csum, done + chunk, side="right"))
        stop = max(stop, start + 1)
        c = counts[start:stop]
        m = int(c.sum())
        if m:
            x = params.cutoff * (1.0 - rng.random(m)) ** (-1.0 / params.alpha_ts)
            keep = rng.random(m) < np.exp(-params.lambda_tempering * x)
            sign = np.where(rng.random(m) < 0.5, -1.0, 1.0)
            owner = np.repeat(np.arange(stop - start), c)
            out[start:stop] = np.bincount(owner, weights=np.where(keep, sign * x, 0.0),
                                          minlength=stop - start)
        start = stop
    return out


def simulate_tempered_stable_tc(params: TemperedStableParams, grid: PathGrid, seed) -> SamplePath:
    """Time-changed symmetric tempered stable process S_{T_t}, T_t = int_0^t V ds.

    Jumps with |x| >= cutoff are exact (Pareto proposals thinned by the
    tempering factor); smaller ones are a Gaussian with matched variance.
    """
    rng = make_rng(seed)
    sub = CIR_SUBSTEPS
    v, _, dt = _variance_path(params.time_change, grid, rng)
    tau = (0.5 * (v[:-1] + v[1:]) * dt).reshape(grid.days, grid.n, sub).sum(axis=2)
    flat = tau.ravel()
    small = math.sqrt(params.small_jump_variance()) * np.sqrt(flat) * rng.standard_normal(flat.size)
    jumps = _tempered_stable_jumps(params, flat, rng)
    inc = (small + jumps).reshape(grid.days, grid.n)
    spot = v[:-1:sub].reshape(grid.days, grid.n)
    return SamplePath(inc, spot)


def _cms_standard(beta, gamma, size, rng):
    """Chambers-Mallows-Stuck draws of S_beta(1, gamma, 0)."""
    u = rng.uniform(-math.pi / 2.0, math.pi / 2.0, size)
    w = rng.exponential(1.0, size)
    if beta == 1.0:
        hp = math.pi / 2.0 + gamma * u
        return (2.0 / math.pi) * (hp * np.tan(u) - gamma * np.log((math.pi / 2.0) * w * np.cos(u) / hp))
    t = gamma * math.tan(math.pi * beta / 2.0)
    b = math.atan(t) / beta
    s = (1.0 + t * t) ** (1.0 / (2.0 * beta))
    return (
        s
        * np.sin(beta * (u + b))
        / np.cos(u) ** (1.0 / beta)
        * (np.cos(u - beta * (u + b)) / w) ** ((1.0 - beta) / beta)
    )


def simulate_stable(law: StableLaw, grid: PathGrid, seed) -> SamplePath:
    """I.i.d. stable increments over intervals of length 1/n."""
    rng = make_rng(seed)
    h = 1.0 / grid.n
    x = _cms_standard(law.beta, law.gamma, (grid.days, grid.n), rng)
    if law.beta == 1.0:
        scale = law.c * h
        inc = scale * x + (2.0 / math.pi) * law.gamma * scale * math.log(scale)
    else:
        inc = law.c * h ** (1.0 / law.beta) * x
    return SamplePath(inc)


def add_noise(path: SamplePath, sigma_eps: float, seed) -> SamplePath:
    """Observe X + e with i.i.d. N(0, sigma_eps^2) noise at every grid time."""
    if sigma_eps < 0:
        raise ParameterError("sigma_eps must be nonnegative")
    if sigma_eps == 0:
        return replace(path, increments=path.increments.copy())
    rng = make_rng(seed)
    eps = sigma_eps * rng.standard_normal((path.days, path.n + 1))
    return replace(path, increments=path.increments + np.diff(eps, axis=1))


MODELS = ("null_sv_jd", "pure_jump_ts", "pure_jump_ts_plus_noise")

#: Noise standard deviation of the contaminated pure-jump model (variance 0.01).
DEFAULT_NOISE_SD = 0.1


def simulate_model(model: str, grid: PathGrid, seed, noise_sd: float = DEFAULT_NOISE_SD) -> SamplePath:
    """Simulate one of the Monte Carlo models by name."""
    path_seed, noise_seed = child_seed(seed, 0), child_seed(seed, 1)
    if model == "null_sv_jd":
        return simulate_sv_jump_diffusion(SvJumpDiffusionParams(), grid, path_seed)
    if model == "pure_jump_ts":
        return simulate_tempered_stable_tc(TemperedStableParams(), grid, path_seed)
    if model == "pure_jump_ts_plus_noise":
        path = simulate_tempered_stable_tc(TemperedStableParams(), grid, path_seed)
        return add_noise(path, noise_sd, noise_seed)
    raise ParameterError(f"unknown model {model!r}; expected one of {MODELS}")
