"""Compare the compiled kernels against the numpy/scipy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints the best-of-N wall time per case and the speedup.  Also times a
whole-diagram evaluation with each backend selected.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from zwinf import _kernels_py
from zwinf import hamiltonians as ham
from zwinf import qudit

try:
    from zwinf import _kernels as compiled
except ImportError:
    compiled = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def sparse_cases(rng):
    for L, k_in, R, k_out, nnz in [(1, 64, 64, 64, 200), (8, 256, 16, 256, 2000),
                                   (64, 100, 64, 100, 400), (1, 4096, 1, 4096, 20000)]:
        rows = rng.integers(0, k_out, nnz).astype(np.int64)
        cols = rng.integers(0, k_in, nnz).astype(np.int64)
        vals = rng.normal(size=nnz) + 1j * rng.normal(size=nnz)
        state = rng.normal(size=(L, k_in, R)) + 1j * rng.normal(size=(L, k_in, R))
        yield f"sparse_apply L={L} k_in={k_in} R={R} nnz={nnz}", (state, rows, cols, vals, k_out)


def run_diagram(backend, d):
    # swap the kernel used by the evaluator, then evaluate a gate diagram
    old = qudit.kernels.sparse_apply
    qudit.kernels.sparse_apply = backend.sparse_apply
    try:
        return ham.truncated_matrix(ham.beam_splitter(0.7, 0.2), d)
    finally:
        qudit.kernels.sparse_apply = old


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    if compiled is None:
        print("compiled extension not built; only the fallback is timed")
    rng = np.random.default_rng(0)
    rows = []
    for name, case in sparse_cases(rng):
        t_py = best_of(lambda: _kernels_py.sparse_apply(*case), args.repeat)
        t_c = best_of(lambda: compiled.sparse_apply(*case), args.repeat) if compiled else float("nan")
        if compiled:
            assert np.allclose(compiled.sparse_apply(*case), _kernels_py.sparse_apply(*case))
        rows.append((name, t_py, t_c))
    for m, n, j, d in [(2, 2, 1, 6), (3, 3, 0, 5), (4, 2, 2, 6)]:
        name = f"xspider_coo m={m} n={n} d={d}"
        t_py = best_of(lambda: _kernels_py.xspider_coo(m, n, j, d), args.repeat)
        t_c = best_of(lambda: compiled.xspider_coo(m, n, j, d), args.repeat) if compiled else float("nan")
        rows.append((name, t_py, t_c))
    for d in (6, 10):
        name = f"beam splitter truncated matrix d={d}"
        t_py = best_of(lambda: run_diagram(_kernels_py, d), args.repeat)
        t_c = best_of(lambda: run_diagram(compiled, d), args.repeat) if compiled else float("nan")
        rows.append((name, t_py, t_c))

    width = max(len(r[0]) for r in rows)
    print(f"{'case':<{width}}  {'python ms':>10}  {'cython ms':>10}  {'speedup':>8}")
    for name, t_py, t_c in rows:
        print(f"{name:<{width}}  {t_py * 1e3:10.3f}  {t_c * 1e3:10.3f}  {t_py / t_c:8.2f}x")


if __name__ == "__main__":
    main()
