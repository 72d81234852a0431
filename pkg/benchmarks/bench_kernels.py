"""Compare the compiled and pure-Python CHSH kernels.

    python benchmarks/bench_kernels.py [--repeat 5] [--points 2000] [--full]

Times ``chsh_sum`` on random parameter vectors (the optimizer's inner loop)
and, with ``--full``, one complete ``optimize_chsh`` call per backend in a
fresh subprocess.  Also reports the largest disagreement between backends.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from belldice import _kernel_py

try:
    from belldice import _kernel
except ImportError:
    _kernel = None


def random_vectors(n, seed=0):
    rng = np.random.default_rng(seed)
    x = np.empty((n, 9))
    x[:, 0] = rng.uniform(1e-4, 0.5, n)
    x[:, 1] = rng.uniform(0.1, 0.9, n)
    x[:, 2:6] = rng.uniform(-2.0, 2.0, (n, 4))
    x[:, 6:] = rng.uniform(-np.pi, np.pi, (n, 3))
    return x


def time_backend(mod, xs, repeat, eta=0.9, eta_h=0.9, p_dc=1e-5):
    def run():
        for x in xs:
            mod.chsh_sum(x, eta, eta_h, p_dc)

    best = min(timeit.repeat(run, number=1, repeat=repeat))
    return best / len(xs)


def time_optimize(pure):
    env = dict(os.environ)
    if pure:
        env["BELLDICE_PURE_PYTHON"] = "1"
    else:
        env.pop("BELLDICE_PURE_PYTHON", None)
    code = (
        "import time; from belldice import BACKEND, OptimizationProblem, optimize_chsh;"
        "t=time.perf_counter(); r=optimize_chsh(OptimizationProblem(eta=0.9, restarts=16));"
        "print(BACKEND, time.perf_counter()-t, r.s_opt)"
    )
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    name, secs, s = out.stdout.split()
    return name, float(secs), float(s)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--points", type=int, default=2000)
    ap.add_argument("--full", action="store_true", help="also time a full optimize per backend")
    args = ap.parse_args(argv)

    xs = random_vectors(args.points)
    t_py = time_backend(_kernel_py, xs, args.repeat)
    print(f"python  chsh_sum: {t_py * 1e6:9.2f} us/call")
    if _kernel is None:
        print("cython  extension not built; nothing to compare")
        return 0
    t_cy = time_backend(_kernel, xs, args.repeat)
    print(f"cython  chsh_sum: {t_cy * 1e6:9.2f} us/call  (speedup {t_py / t_cy:.1f}x)")

    dev = max(
        abs(_kernel.chsh_sum(x, 0.9, 0.9, 1e-5) - _kernel_py.chsh_sum(x, 0.9, 0.9, 1e-5)) for x in xs
    )
    print(f"max |cython - python| over {len(xs)} vectors: {dev:.2e}")

    if args.full:
        for pure in (False, True):
            name, secs, s = time_optimize(pure)
            print(f"{name:7s} optimize_chsh(eta=0.9, 16 restarts): {secs:7.2f} s  S={s:.9f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
