"""Compare the compiled and pure-numpy discrimination kernels.

    python3 benchmarks/bench_kernels.py [--repeats 20] [--restarts 5]

Times the fixed-point kernel on random ensembles for a few (d, D) shapes, then
a short seesaw run in a subprocess per backend (the backend is chosen at import
time from QRAC_DISABLE_NUMBA).
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from qrac import _kernels

SHAPES = [(2, 2), (3, 3), (4, 4), (4, 5)]

SEESAW_SNIPPET = """
import time
from qrac import RacSetting, SeesawConfig, seesaw_run
from qrac._kernels import BACKEND
seesaw_run(RacSetting(3, 3, 3), SeesawConfig(restarts=1, master_seed=2))  # warm-up
t = time.perf_counter()
r = seesaw_run(RacSetting(3, 3, 3), SeesawConfig(restarts={restarts}, master_seed=1))
print(BACKEND, time.perf_counter() - t, r.best_asp)
"""


def random_ensemble(d, D, rng):
    G = rng.normal(size=(d, D, D)) + 1j * rng.normal(size=(d, D, D))
    R = G @ G.conj().transpose(0, 2, 1)
    return R / np.trace(R.sum(axis=0)).real


def best_time(fn, repeats):
    times = []
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def bench_kernels(repeats):
    if _kernels.fixed_point_numba is None:
        print("numba is not importable; only the numpy kernel is available")
        return
    rng = np.random.default_rng(0)
    print(f"{'(d,D)':>7} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}  agree")
    for d, D in SHAPES:
        R = random_ensemble(d, D, rng)
        M0 = np.broadcast_to(np.eye(D) / d, (d, D, D)).copy()
        args = (R, M0, 500, 1e-11)
        _kernels.fixed_point_numba(*args)  # compile / load cache
        t_np = best_time(lambda: _kernels.fixed_point_numpy(*args), repeats)
        t_nb = best_time(lambda: _kernels.fixed_point_numba(*args), repeats)
        agree = np.abs(_kernels.fixed_point_numpy(*args)[0] - _kernels.fixed_point_numba(*args)[0]).max()
        print(f"{f'({d},{D})':>7} {1e3 * t_np:10.3f} {1e3 * t_nb:10.3f} {t_np / t_nb:8.1f}  {agree:.1e}")


def bench_seesaw(restarts):
    code = SEESAW_SNIPPET.format(restarts=restarts)
    print(f"\nseesaw (3,3,3), {restarts} restarts, seed 1")
    for flag in ("0", "1"):
        env = dict(os.environ, QRAC_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                             text=True, check=True).stdout.split()
        backend, seconds, best = out[0], float(out[1]), float(out[2])
        print(f"  {backend:>6}: {seconds:7.2f} s  best {best:.8f}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=20)
    parser.add_argument("--restarts", type=int, default=5)
    args = parser.parse_args()
    bench_kernels(args.repeats)
    bench_seesaw(args.restarts)


if __name__ == "__main__":
    main()
