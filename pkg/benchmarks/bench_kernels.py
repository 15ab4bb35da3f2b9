"""Time the compiled and pure-Python RK4 modal loops on the same problem.

    python3 benchmarks/bench_kernels.py [--m 16] [--steps 1000] [--repeat 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from stripns import _modal_py


def _problem(m: int, steps: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    A = -np.diag(np.linspace(1.0, 50.0, m))
    B = rng.standard_normal((m, m, m))
    B = 0.5 * (B - B.transpose(0, 2, 1))
    g0 = rng.standard_normal(m)
    loads = np.zeros((2 * steps + 1, m))
    return g0, A, B, loads


def _best(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv: list[str] | None = None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=16)
    ap.add_argument("--steps", type=int, default=1000)
    ap.add_argument("--dt", type=float, default=1e-3)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    g0, A, B, loads = _problem(args.m, args.steps)
    run = lambda mod: mod.rk4_integrate(g0, A, B, loads, args.dt, args.steps)  # noqa: E731
    t_py = _best(lambda: run(_modal_py), args.repeat)
    print(f"python  m={args.m:3d} steps={args.steps}: {t_py * 1e3:9.2f} ms")
    try:
        from stripns import _modal
    except ImportError:
        print("cython  extension not built")
        return
    t_cy = _best(lambda: run(_modal), args.repeat)
    diff = np.max(np.abs(run(_modal)[0] - run(_modal_py)[0]))
    print(f"cython  m={args.m:3d} steps={args.steps}: {t_cy * 1e3:9.2f} ms  speedup {t_py / t_cy:5.1f}x  max|diff| {diff:.1e}")


if __name__ == "__main__":
    main()
