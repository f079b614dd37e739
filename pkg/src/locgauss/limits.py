"""Reference distributions for the devolatilized empirical CDF.

The standard normal, the normalized stable law reached under pure-jump
alternatives, and the scaled Gaussian-noise law reached under noise.

Stable CDFs are obtained by Gil-Pelaez inversion of

    log E exp(iuS) = -|u|^beta (1 - i*gamma*sign(u)*w(u)),
    w(u) = tan(pi*beta/2) for beta != 1,  -(2/pi) log|u| for beta = 1,

which for u > 0 gives

    F(x) = 1/2 - (1/pi) * int_0^inf exp(-u^beta) sin(gamma u^beta w(u) - u x) / u du.
"""
from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, special
from scipy.interpolate import CubicSpline

from .errors import AccuracyError, ParameterError

SQRT_HALF_PI = math.sqrt(math.pi / 2.0)

#: Variance of (e_i - e_{i-1}) / mu for i.i.d. Gaussian noise e.
NOISE_LIMIT_VARIANCE = 2.0 / (math.sqrt(3.0) + math.pi / 6.0)

_CDF_TOL = 1e-8


def normal_cdf(x):
    return special.ndtr(x)


def normal_pdf(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def normal_quantile(p):
    p = np.asarray(p, dtype=float)
    if np.any((p <= 0.0) | (p >= 1.0)) or np.any(np.isnan(p)):
        raise ParameterError("normal_quantile needs p in (0, 1)")
    out = special.ndtri(p)
    return float(out) if out.ndim == 0 else out


def _check_stable(beta, gamma):
    if not 0.0 < beta <= 2.0:
        raise ParameterError(f"beta must lie in (0, 2], got {beta}")
    if not -1.0 <= gamma <= 1.0:
        raise ParameterError(f"gamma must lie in [-1, 1], got {gamma}")


def _skew_phase(u, beta, gamma):
    """gamma * u^beta * w(u) for u > 0."""
    if gamma == 0.0:
        return 0.0 * u
    if beta == 1.0:
        return -gamma * u * (2.0 / math.pi) * np.log(u)
    return gamma * u**beta * math.tan(math.pi * beta / 2.0)


def _stable_cdf_scalar(x, beta, gamma, tol):
    # u in (0, 1]: integrate the full integrand directly
    def head(u):
        if u == 0.0:
            return -x if gamma == 0.0 else 0.0
        return math.exp(-(u**beta)) * math.sin(_skew_phase(u, beta, gamma) - u * x) / u

    u_max = max(1.0, 40.0 ** (1.0 / beta))
    total, err = integrate.quad(head, 0.0, 1.0, limit=400, epsabs=tol * 0.1, epsrel=0.0)

    # u in [1, u_max]: split sin(theta - ux) = sin(theta)cos(ux) - cos(theta)sin(ux)
    # and let QAWO handle the oscillation in x.
    ax = abs(x)
    sgn = 1.0 if x >= 0 else -1.0
    env = lambda u: math.exp(-(u**beta)) / u  # noqa: E731
    if gamma == 0.0:
        if ax > 0.0:
            t, e = integrate.quad(env, 1.0, u_max, weight="sin", wvar=ax, limit=400,
                                  epsabs=tol * 0.1, epsrel=0.0)
            total -= sgn * t
            err += e
    else:
        f_cos = lambda u: env(u) * math.sin(_skew_phase(u, beta, gamma))  # noqa: E731
        f_sin = lambda u: env(u) * math.cos(_skew_phase(u, beta, gamma))  # noqa: E731
        if ax > 0.0:
            t1, e1 = integrate.quad(f_cos, 1.0, u_max, weight="cos", wvar=ax, limit=400,
                                    epsabs=tol * 0.1, epsrel=0.0)
            t2, e2 = integrate.quad(f_sin, 1.0, u_max, weight="sin", wvar=ax, limit=400,
                                    epsabs=tol * 0.1, epsrel=0.0)
            total += t1 - sgn * t2
            err += e1 + e2
        else:
            t1, e1 = integrate.quad(f_cos, 1.0, u_max, limit=400, epsabs=tol * 0.1, epsrel=0.0)
            total += t1
            err += e1
    achieved = err / math.pi
    if not achieved <= tol:
        raise AccuracyError(
            f"stable_cdf(beta={beta}, gamma={gamma}, x={x}) reached only {achieved:.2e}",
            achieved=achieved,
        )
    return 0.5 - total / math.pi


def stable_cdf(x, beta, gamma=0.0, *, tol=_CDF_TOL):
    """CDF of the unit-scale stable law with index ``beta`` and skew ``gamma``.

    Accurate to ``tol`` (absolute); raises :class:`AccuracyError` otherwise.
    """
    _check_stable(beta, gamma)
    xs = np.asarray(x, dtype=float)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = np.array([_stable_cdf_scalar(float(v), beta, gamma, tol) for v in xs.ravel()])
    out = np.clip(out, 0.0, 1.0).reshape(xs.shape)
    return float(out) if out.ndim == 0 else out


def stable_abs_mean(beta):
    """E|S_1| for the symmetric law with characteristic function exp(-|u|^beta)."""
    if not 1.0 < beta <= 2.0:
        raise ParameterError(f"E|S_1| is finite only for beta in (1, 2], got {beta}")
    return 2.0 * math.gamma(1.0 - 1.0 / beta) / math.pi


def stable_abs_mean_quad(beta):
    """Same quantity as :func:`stable_abs_mean`, by quadrature.

    Uses E|X| = (2/pi) int_0^inf (1 - Re phi(u)) / u^2 du.
    """
    if not 1.0 < beta <= 2.0:
        raise ParameterError(f"E|S_1| is finite only for beta in (1, 2], got {beta}")

    def f(u):
        if u == 0.0:
            return 0.0
        return -math.expm1(-(u**beta)) / (u * u)

    head, _ = integrate.quad(f, 0.0, 1.0, limit=200, epsabs=1e-12, epsrel=1e-12)
    tail, _ = integrate.quad(f, 1.0, np.inf, limit=200, epsabs=1e-12, epsrel=1e-12)
    return 2.0 * (head + tail) / math.pi


def f_beta(beta, tau, *, tol=_CDF_TOL):
    """CDF of sqrt(2/pi) * S_1 / E|S_1| for symmetric beta-stable S_1.

    Every beta gives a variable with E|Z| = sqrt(2/pi); ``f_beta(2, .)`` is Phi.
    """
    e_abs = stable_abs_mean(beta)
    return stable_cdf(np.asarray(tau, dtype=float) * e_abs * SQRT_HALF_PI, beta, 0.0, tol=tol)


def gaussian_noise_limit_cdf(tau):
    """CDF reached by the statistic when i.i.d. Gaussian noise dominates."""
    return special.ndtr(np.asarray(tau, dtype=float) / math.sqrt(NOISE_LIMIT_VARIANCE))


@functools.lru_cache(maxsize=16)
def _f_beta_spline(beta, half_width, step):
    # symmetric law: tabulate tau >= 0 and mirror
    pos = np.arange(0.0, half_width + step / 2, step)
    vals = f_beta(beta, pos)
    grid = np.concatenate([-pos[:0:-1], pos])
    table = np.concatenate([1.0 - vals[:0:-1], vals])
    return CubicSpline(grid, table)


@dataclass(frozen=True)
class ReferenceLaw:
    """A continuous (or empirical) CDF the devolatilized ECDF is compared with.

    ``variant`` is one of ``normal``, ``stable``, ``gaussian_noise_limit``,
    ``empirical``.
    """

    variant: str
    beta: float = 2.0
    values: tuple = field(default=(), repr=False)

    @classmethod
    def normal(cls):
        return cls("normal")

    @classmethod
    def stable(cls, beta):
        if not 1.0 < beta <= 2.0:
            raise ParameterError(f"stable reference needs beta in (1, 2], got {beta}")
        return cls("stable", beta=float(beta))

    @classmethod
    def gaussian_noise_limit(cls):
        return cls("gaussian_noise_limit")

    @classmethod
    def empirical(cls, values):
        values = np.sort(np.asarray(values, dtype=float).ravel())
        if values.size == 0:
            raise ParameterError("empirical reference needs at least one value")
        return cls("empirical", values=tuple(values.tolist()))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.variant == "normal":
            return special.ndtr(x)
        if self.variant == "gaussian_noise_limit":
            return gaussian_noise_limit_cdf(x)
        if self.variant == "stable":
            if self.beta == 2.0:
                return special.ndtr(x)
            return _stable_reference_cdf(self.beta, x)
        if self.variant == "empirical":
            v = np.asarray(self.values)
            return np.searchsorted(v, x, side="right") / v.size
        raise ParameterError(f"unknown reference law {self.variant!r}")

    __call__ = cdf


def _stable_reference_cdf(beta, x, half_width=12.0, step=0.01):
    # spline table inside +-half_width, direct inversion outside
    spline = _f_beta_spline(beta, half_width, step)
    out = np.empty_like(x)
    inside = np.abs(x) <= half_width
    out[inside] = spline(x[inside])
    if np.any(~inside):
        out[~inside] = f_beta(beta, x[~inside])
    return np.clip(out, 0.0, 1.0)


def as_cdf(reference) -> Callable:
    """Accept a ReferenceLaw, a callable, or a name like ``"normal"``."""
    if isinstance(reference, str):
        if reference == "normal":
            return ReferenceLaw.normal().cdf
        if reference == "gaussian_noise_limit":
            return ReferenceLaw.gaussian_noise_limit().cdf
        raise ParameterError(f"unknown reference law {reference!r}")
    if isinstance(reference, ReferenceLaw):
        return reference.cdf
    return reference
