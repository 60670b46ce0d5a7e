"""Compare the compiled and pure-Python theta lattice sums.

Run with ``python3 benchmarks/bench_theta.py [--repeat N]``.  Prints time per
evaluation for each backend and genus and the largest disagreement between
the two on the same inputs.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from hyperjac import theta
from hyperjac.curvegeom import make_curve
from hyperjac.periods import compute_periods

CURVES = {
    1: [-2, -1, 1, 2],
    2: [-3, -2, -1, 0.5, 1, 2.5],
    3: [-3, -2, -1, 0.5, 1, 2.5, 3, 4.2],
    4: [-4, -3, -2, -1, 0.5, 1, 2.5, 3, 4.2, 5.1],
}


def run(repeat: int = 200, want_grad: bool = True):
    rows = []
    for g, bp in CURVES.items():
        pi = compute_periods(make_curve(bp)).period_matrix
        rng = np.random.default_rng(g)
        us = rng.normal(size=(repeat, g)) + 1j * rng.normal(size=(repeat, g))
        ctx = theta.prepare(pi)
        vals = {}
        times = {}
        for name in theta.KERNELS:
            prev = theta.use_backend(name)
            try:
                t0 = time.perf_counter()
                vals[name] = [theta.theta_parts(u, pi, want_grad=want_grad, ctx=ctx).value for u in us]
                times[name] = (time.perf_counter() - t0) / repeat
            finally:
                theta.use_backend(prev)
        diff = 0.0
        if len(vals) == 2:
            diff = float(np.max(np.abs(np.subtract(vals["compiled"], vals["python"]))))
        rows.append((g, times, diff))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args()
    print(f"{'g':>2} {'backend':>9} {'us/eval':>10} {'speedup':>8} {'max diff':>10}")
    for g, times, diff in run(args.repeat):
        base = times["python"]
        for name, t in sorted(times.items()):
            print(f"{g:>2} {name:>9} {1e6 * t:>10.1f} {base / t:>8.1f} {diff:>10.1e}")


if __name__ == "__main__":
    main()
