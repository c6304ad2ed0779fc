"""Time the compiled and pure-Python RK4 trajectory kernels on the default run.

    python3 benchmarks/bench_kernels.py [--n-traj 10000] [--repeat 3]
"""
import argparse
import time

import numpy as np

from twoguide import bohmian, kernels
from twoguide.config import RunConfig
from twoguide.eigensolver import solve_modes


def time_backend(field, n_traj, T, steps, backend, repeat):
    best, ens = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        ens = bohmian.integrate_trajectories(field, n_traj, T, T / steps, seed=1, store_every=50, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, ens


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n-traj", type=int, default=10_000)
    p.add_argument("--steps", type=int, default=2000, help="RK4 steps per period")
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)

    cfg = RunConfig()
    modes = solve_modes(cfg.build_grid(), cfg.build_potential())
    field = bohmian.velocity_field(modes)
    T = modes.period

    backends = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])
    results = {b: time_backend(field, args.n_traj, T, args.steps, b, args.repeat) for b in backends}
    print(f"{args.n_traj} trajectories, {args.steps} steps over T = {T:.3f} ps, best of {args.repeat}")
    for b, (sec, _) in results.items():
        print(f"  {b:7s} {sec:8.3f} s")
    if "cython" in results:
        diff = np.max(np.abs(results["cython"][1].positions - results["python"][1].positions))
        print(f"  speedup {results['python'][0] / results['cython'][0]:.2f}x, max |dy| between backends {diff:.1e} um")
    else:
        print("  compiled kernels not built; only the fallback was timed")


if __name__ == "__main__":
    main()
