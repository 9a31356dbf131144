"""Time the compiled kernels against the pure-numpy fallback.

Both backends are required to produce bit-identical results from the same
seed; this script asserts that while measuring throughput.  Run as

    python3 -m pooled_annuity.benchmark [--paths P] [--n N] [--steps S]
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from . import _kernels
from .lifetable import annuity_factor_grid, make_gompertz_table, survival_period_grid


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _time(fn, repeat: int = 3):
    """Best-of-repeat wall time and the (identical) result."""
    best, result = math.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def _kc_setup(n: int):
    table = make_gompertz_table(3e-5, 1.1)
    x, ppy = 70, 12
    s = survival_period_grid(table, x, ppy)
    f_grid = 1.0 - s
    p_grid = np.divide(s[1:], s[:-1], out=np.zeros(len(s) - 1), where=s[:-1] > 0.0)
    c0 = 100000.0 / annuity_factor_grid(table, x, 1.05 ** (1 / 12) - 1, ppy)[0]
    return f_grid, p_grid, c0, 0.95 * c0, math.inf


def run(paths: int, n: int, steps: int) -> int:
    f_grid, p_grid, c0, lo, hi = _kc_setup(n)
    sqrt_dt = math.sqrt((0.1 / 0.9) / steps)
    b1 = math.sqrt(n) * 0.1 / 0.9
    cases = {
        "ku": lambda: _kernels.ku_block(_rng(1), n, paths, 0.05, 0.05),
        "kc": lambda: _kernels.kc_block(_rng(2), n, paths // 4, f_grid, p_grid, c0, lo, hi),
        "psi": lambda: _kernels.psi_block(_rng(3), paths, steps, sqrt_dt, 0, b1, 0.0, False),
    }

    original = _kernels.active_backend()
    backends = _kernels.available_backends()
    print(f"backends: {', '.join(backends)}   paths={paths} n={n} steps={steps}")
    print(f"{'kernel':<8}{'backend':<10}{'seconds':>10}{'paths/s':>14}")
    failures = 0
    try:
        for name, fn in cases.items():
            times, outputs = {}, {}
            for backend in backends:
                _kernels.set_backend(backend)
                fn()  # warm-up: JIT-free but touches caches and the allocator
                times[backend], outputs[backend] = _time(fn)
            n_paths = len(next(iter(outputs.values())))
            for backend in backends:
                print(f"{name:<8}{backend:<10}{times[backend]:>10.4f}{n_paths / times[backend]:>14.0f}")
            if len(backends) == 2:
                a, b = (outputs[k] for k in backends)
                same = np.array_equal(a, b)
                speed = times["python"] / times["cython"]
                print(f"{'':8}identical={same}  speedup(cython)={speed:.2f}x")
                if not same:
                    failures += 1
    finally:
        _kernels.set_backend(original)
    return 1 if failures else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--paths", type=int, default=20000)
    parser.add_argument("--n", type=int, default=1000)
    parser.add_argument("--steps", type=int, default=2000)
    args = parser.parse_args(argv)
    return run(args.paths, args.n, args.steps)


if __name__ == "__main__":
    raise SystemExit(main())
