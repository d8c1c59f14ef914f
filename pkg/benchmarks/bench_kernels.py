"""Time the secular-equation kernels: compiled extension vs pure Python.

Usage:
    python3 benchmarks/bench_kernels.py [--repeats 5] [--tables 200] \
        [--sizes 1,2,4,8,12]

For each table size P the same batch of random pole/weight tables is solved by
both backends; outputs are checked for bitwise equality before timings are
reported (median over repeats).
"""

import argparse
import time

import numpy as np

from mws._kernels import load_backend


def make_batch(rng, tables, p_count):
    batch = []
    for _ in range(tables):
        gaps = rng.uniform(0.1, 10.0, size=p_count)
        poles = rng.uniform(-50.0, 0.0) + np.cumsum(gaps)
        weights = rng.uniform(0.05, 20.0, size=p_count)
        eps0 = float(rng.uniform(-60.0, 60.0))
        batch.append((poles, weights, eps0))
    return batch


def run_batch(backend, batch):
    t0 = time.perf_counter()
    results = [backend.solve_secular(p, w, e) for p, w, e in batch]
    return time.perf_counter() - t0, results


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--tables", type=int, default=200)
    ap.add_argument("--sizes", default="1,2,4,8,12")
    ap.add_argument("--seed", type=int, default=1234)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]

    pure = load_backend("pure")
    try:
        compiled = load_backend("compiled")
    except ImportError:
        print("compiled backend not built; run pip install -e . first")
        return 1

    print(f"{'P':>3}  {'roots':>6}  {'pure ms':>9}  {'compiled ms':>11}  {'speedup':>7}")
    rng = np.random.default_rng(args.seed)
    for p_count in sizes:
        batch = make_batch(rng, args.tables, p_count)
        t_pure = min(run_batch(pure, batch)[0] for _ in range(args.repeats))
        t_comp = min(run_batch(compiled, batch)[0] for _ in range(args.repeats))
        _, r_pure = run_batch(pure, batch)
        _, r_comp = run_batch(compiled, batch)
        for a, b in zip(r_pure, r_comp):
            for xa, xb in zip(a, b):
                if not np.array_equal(np.asarray(xa), np.asarray(xb)):
                    raise SystemExit(f"backend mismatch at P={p_count}")
        n_roots = args.tables * (p_count + 1)
        print(f"{p_count:>3}  {n_roots:>6}  {t_pure * 1e3:>9.2f}  "
              f"{t_comp * 1e3:>11.2f}  {t_pure / t_comp:>6.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
