"""Timing comparison of the compiled and pure-Python numeric kernels.

Runs each hot kernel on a realistic workload (a degree-251 random entire
function truncation, the size used for window-8 simulation) and reports
per-call wall time for both backends plus the speedup factor.

Usage: python3 benchmarks/bench_backend.py [--repeat N]
"""

import argparse
import time

import numpy as np
from scipy.special import gammaln

from zerocrit import backend, gafsim, polytools


def workload(degree=251, seed=12345):
    """A truncated random entire function and a seed lattice for it."""
    sample = gafsim.sample_gaf(degree, 9.0, seed)
    coeffs = sample.poly_coefficients()
    core, _, _ = polytools.trim(coeffs)
    scale = np.abs(core)
    core = core / scale.max()
    init = polytools.bini_init(core)
    eval_pts = np.linspace(0, 8, 4096) * np.exp(0.7j)
    seeds = gafsim._graded_seeds(9.0, 0.25)
    return core, init, eval_pts, seeds


def bench(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5,
                    help="timing repeats, best-of is reported (default 5)")
    args = ap.parse_args()

    core, init, eval_pts, seeds = workload()
    cases = {}
    for name in ("compiled", "python"):
        try:
            _, k = backend.get_kernels(name)
        except Exception as exc:
            print(f"{name}: unavailable ({exc})")
            continue
        cases[name] = {
            "horner3 (4096 pts, deg 251)":
                lambda k=k: k.horner3(core, eval_pts),
            "aberth (all 251 roots)":
                lambda k=k: k.aberth(core, init, 400, 1e-12),
            "newton_connection (10838 seeds)":
                lambda k=k: k.newton_connection(
                    core, seeds, 0, 0.0, 80, 1e-10, 11.0),
            "newton_polish (251 seeds)":
                lambda k=k: k.newton_polish(core, init, 60, 1e-12),
        }

    if not cases:
        raise SystemExit("no backend available")

    rows = list(next(iter(cases.values())))
    width = max(len(r) for r in rows)
    header = f"{'kernel':<{width}}  " + "".join(
        f"{n:>12}" for n in cases) + ("     speedup" if len(cases) == 2 else "")
    print(header)
    print("-" * len(header))
    for row in rows:
        times = [bench(cases[n][row], args.repeat) for n in cases]
        line = f"{row:<{width}}  " + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
        if len(times) == 2:
            line += f"{times[1] / times[0]:>11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
