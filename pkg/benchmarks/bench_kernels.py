"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import timeit

import numpy as np

from locgauss import _kernels_py
from locgauss.critvals import LimitLawConfig, bias_term, build_grid, z2_shape
from locgauss.ecdf import EvalSet

try:
    from locgauss import _kernels as _kernels_c
except ImportError:  # extension not built
    _kernels_c = None


def cases():
    rng = np.random.default_rng(0)
    blocks = rng.standard_normal((252, 2, 50)) * 0.1
    z = rng.standard_normal(252 * 100 * 10)

    cfg = LimitLawConfig("bipower", 100, 50, 37, EvalSet.default(), days=252)
    g = build_grid(cfg.eval_set, cfg.grid_step)
    shape = cfg.z2_mult * z2_shape(g.tau)
    bias = cfg.bias_mult * bias_term(g.tau)
    r = 2000
    zz = rng.standard_normal((r, g.u.size + 1))
    zeta = rng.standard_normal(r)
    unif = rng.random((r, g.cell_left.size, 2))

    return {
        "bipower_leave_out (252 days, n=100)": lambda k: k.bipower_leave_out(blocks, 100.0),
        "cir_full_truncation (252k steps)": lambda k: k.cir_full_truncation(1.0, 0.03, 1.0, 0.1, 1e-3, z),
        "sup_limit (2000 paths)": lambda k: k.sup_limit(zz, zeta, unif, g.sq_du, g.u, g.w1_scale,
                                                         shape, bias, g.cell_left, g.cell_du),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = {"python": _kernels_py}
    if _kernels_c is not None:
        backends["cython"] = _kernels_c
    print(f"{'kernel':40s}" + "".join(f"{b:>12s}" for b in backends) + "     speedup")
    for name, fn in cases().items():
        times = {b: min(timeit.repeat(lambda: fn(k), number=1, repeat=args.repeat))
                 for b, k in backends.items()}
        row = "".join(f"{times[b] * 1e3:10.2f}ms" for b in backends)
        speed = f"{times['python'] / times['cython']:9.1f}x" if "cython" in times else ""
        print(f"{name:40s}{row}  {speed}")


if __name__ == "__main__":
    main()
