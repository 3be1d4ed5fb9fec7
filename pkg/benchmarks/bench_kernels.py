"""Compare the numba kernels against their numpy twins, and time a full build.

    python3 benchmarks/bench_kernels.py [--reps 20]

The end-to-end timing uses whichever path ``PHASEODE_NUMBA`` selects, so run
it twice (with ``PHASEODE_NUMBA=0`` the second time) to compare builds.
"""

import argparse
import time

import numpy as np

from phaseode import _kernels, problems, solver


def best_of(fn, reps):
    fn()  # warm-up (includes jit compilation)
    best = np.inf
    for _ in range(reps):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=20)
    args = ap.parse_args()
    rng = np.random.default_rng(0)

    coeffs = rng.standard_normal((20000, 30)) + 1j * rng.standard_normal((20000, 30))
    x = rng.uniform(-1, 1, 20000)
    c = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    z0 = 0.4 + 0.9j ** np.arange(4)

    rows = [
        ("clenshaw 20000 x 30", lambda: _kernels.clenshaw_numpy(coeffs, x),
         lambda: _kernels.clenshaw_numba(coeffs, x)),
        ("aberth degree 4", lambda: _kernels.aberth_numpy(c, z0, 200, 1e-14),
         lambda: _kernels.aberth_numba(c, z0, 200, 1e-14)),
    ]
    print(f"{'kernel':<22}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for name, f_np, f_nb in rows:
        t_np = best_of(f_np, args.reps)
        t_nb = best_of(f_nb, args.reps)
        print(f"{name:<22}{1e3 * t_np:>12.3f}{1e3 * t_nb:>12.3f}{t_np / t_nb:>10.1f}")

    path = "numba" if _kernels.USE_NUMBA else "numpy"
    for pid in ("exp1", "exp3", "exp5"):
        inp = problems.get(pid).solver_input(2.0 ** 14)
        t = best_of(lambda: solver.build(inp), max(3, args.reps // 4))
        print(f"build {pid} omega=2^14 ({path} path): {1e3 * t:.1f} ms")


if __name__ == "__main__":
    main()
