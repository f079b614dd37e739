"""Pure-Python/NumPy reference versions of the compiled kernels.

Every function here has a twin with the same signature in ``_kernels.pyx``.
Sums are taken with ``cumsum(...)[..., -1]`` so the summation order is
sequential, as in the compiled loops.
"""
import math

import numpy as np

HALF_PI = math.pi / 2.0


def cir_full_truncation(v0, kappa, theta, xi, dt, z):
    """Full-truncation Euler recursion for a square-root diffusion.

    Returns the ``len(z) + 1`` raw states; callers take the positive part.
    """
    z = np.ascontiguousarray(z, dtype=np.float64)
    out = np.empty(z.shape[0] + 1)
    sq_dt = math.sqrt(dt)
    v = float(v0)
    out[0] = v
    for i, zi in enumerate(z.tolist()):
        vp = v if v > 0.0 else 0.0
        v = v + kappa * (theta - vp) * dt + xi * math.sqrt(vp) * sq_dt * zi
        out[i + 1] = v
    return out


def bipower_leave_out(blocks, n):
    """Block bipower variation and its leave-one-out adjustments.

    ``blocks`` has shape (rows, J, k). Returns ``(per_block, leave_out,
    n_floored)`` with shapes (rows, J), (rows, J, k) and an int.
    """
    blocks = np.ascontiguousarray(blocks, dtype=np.float64)
    k = blocks.shape[-1]
    a = np.abs(blocks)
    prods = a[..., :-1] * a[..., 1:]
    c1 = HALF_PI * (n / (k - 1))
    per_block = c1 * np.cumsum(prods, axis=-1)[..., -1]

    left = np.zeros_like(blocks)
    right = np.zeros_like(blocks)
    left[..., 1:] = prods
    right[..., :-1] = prods
    c2 = (k - 1) / (k - 3)
    c3 = HALF_PI * (n / (k - 3))
    leave_out = c2 * per_block[..., None] - c3 * (left + right)
    neg = leave_out < 0.0
    n_floored = int(neg.sum())
    leave_out[neg] = 0.0
    return per_block, leave_out, n_floored


def sup_limit(z, zeta, unif, sq_du, u, w1_scale, shape, bias, cell_left, cell_du):
    """Sup of |bridge + zeta*shape + bias| over a grid, with in-cell bridge maxima.

    Shapes: z (R, G + 1), zeta (R,), unif (R, C, 2), sq_du/u/shape/bias (G,),
    cell_left/cell_du (C,). The last column of ``z`` times ``w1_scale`` is
    the Brownian increment from the last grid point to u=1.
    """
    g = u.shape[0]
    w = np.cumsum(z[:, :g] * sq_du, axis=1)
    w1 = w[:, -1] + z[:, g] * w1_scale
    y = w - u * w1[:, None]
    y = y + zeta[:, None] * shape + bias
    sup = np.abs(y).max(axis=1)
    if cell_left.shape[0]:
        a = y[:, cell_left]
        b = y[:, cell_left + 1]
        d2 = (b - a) * (b - a)
        two_du = 2.0 * cell_du
        hi = (a + b + np.sqrt(d2 - two_du * np.log(1.0 - unif[..., 0]))) * 0.5
        lo = (-a - b + np.sqrt(d2 - two_du * np.log(1.0 - unif[..., 1]))) * 0.5
        sup = np.maximum(sup, np.maximum(hi.max(axis=1), lo.max(axis=1)))
    return sup
