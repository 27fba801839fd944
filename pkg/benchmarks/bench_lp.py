"""Time the compiled and pure-Python simplex kernels on the same problems.

    python benchmarks/bench_lp.py [--repeat 5] [--random 300]

Two workloads: the programs solved for one full worked-example analysis
(yield, dark and single-photon error bounds), and a batch of random boxed
LPs.  Each kernel is run on identical inputs and the results are compared.
"""
from __future__ import annotations

import argparse
import statistics
import sys
import time

import numpy as np

from decoykit.bounds import B1Search, _b1_problem, _yield_program
from decoykit.channel import expected_tally
from decoykit.lp import _simplex_py
from decoykit.model import ProtocolSpec, SystemParams
from decoykit.stats import observation_bounds

try:
    from decoykit.lp import _simplex as _simplex_c
except ImportError:
    _simplex_c = None


def decoy_problems():
    params = SystemParams(1e-7, 1e10, 2e-6, 0.98, 1e-3)
    proto = ProtocolSpec.from_lists((0.0, 0.063, 0.655), (0.01, 0.0275, 0.9625))
    obs = observation_bounds(expected_tally(proto, params), params.epsilon)
    out = []
    for k in (0, 1):
        p = _yield_program(proto.mus, obs, 9, k)
        out.append((p.c, p.A, p.row_lo, p.row_hi, p.lo, p.hi, False))
    search = B1Search(proto, obs, 9)
    for t in np.linspace(0.0, 0.05, 20):
        p = _b1_problem(search.A, search.rl, search.ru, 9, t, search.y1_min)
        out.append((p.c, p.A, p.row_lo, p.row_hi, p.lo, p.hi, True))
    return out


def random_problems(n, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        nv, m = int(rng.integers(4, 19)), int(rng.integers(3, 13))
        A = rng.normal(size=(m, nv))
        xl = np.zeros(nv)
        xu = rng.uniform(0.5, 2.0, nv)
        act = A @ rng.uniform(xl, xu)
        out.append((rng.normal(size=nv), A, act - rng.uniform(0, 1, m), act + rng.uniform(0, 1, m), xl, xu, False))
    return out


def run(kernel, problems):
    results = []
    for c, A, rl, ru, xl, xu, phase1 in problems:
        results.append(kernel.solve_bounded(c, A, rl, ru, xl, xu, phase1, 1e-9, 1e-9, 1e-11, 5000))
    return results


def best_time(kernel, problems, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        run(kernel, problems)
        times.append(time.perf_counter() - t0)
    return min(times), statistics.median(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--random", type=int, default=300, help="number of random LPs")
    args = ap.parse_args(argv)
    if _simplex_c is None:
        print("compiled kernel not built; run `pip install -e . --no-build-isolation` first", file=sys.stderr)
        return 1

    workloads = {"decoy analysis": decoy_problems(), f"{args.random} random LPs": random_problems(args.random)}
    print(f"{'workload':<20s} {'problems':>8s} {'python ms':>10s} {'cython ms':>10s} {'speedup':>8s}  agree")
    for name, probs in workloads.items():
        a, b = run(_simplex_py, probs), run(_simplex_c, probs)
        agree = all(x[0] == y[0] and x[4] == y[4] and np.allclose(x[1], y[1], atol=1e-12) for x, y in zip(a, b))
        tp, _ = best_time(_simplex_py, probs, args.repeat)
        tc, _ = best_time(_simplex_c, probs, args.repeat)
        print(f"{name:<20s} {len(probs):>8d} {1e3 * tp:>10.2f} {1e3 * tc:>10.2f} {tp / tc:>7.1f}x  {agree}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
