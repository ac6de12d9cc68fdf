"""Timing comparison of the compiled and reference kernel backends.

Runs each hot kernel on both implementations over a grid of sizes and prints
throughput plus the speedup of the compiled extension. The two backends are
imported directly, so this works regardless of which one the package selected
at import time; if the extension is missing only the reference column runs.

Usage:
    python benchmarks/bench_kernels.py [--repeats 7] [--quick]
"""

import argparse
import time

import numpy as np

from sepex.kernels import _ref

try:
    from sepex.kernels import _fast
except ImportError:
    _fast = None


def _best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _cases(quick):
    sizes = [1_000, 100_000] if quick else [1_000, 100_000, 2_000_000]
    rng = np.random.default_rng(0)
    for n in sizes:
        coords = rng.integers(0, 2**62, size=(n, 3)).astype(np.uint64)
        hashes = _ref.hash_tuples(np.uint64(7), coords)
        cols = np.ascontiguousarray(rng.standard_normal((n, 2)))
        yield f"hash_tuples    n={n:>9,}", n, lambda m, c=coords: m.hash_tuples(np.uint64(7), c)
        yield f"uniform_block  n={n:>9,}", 4 * n, lambda m, h=hashes: m.uniform_block(h, 4)
        yield (
            f"hash_float_cols n={n:>8,}",
            n,
            lambda m, h=hashes, c=cols: m.hash_float_columns(h, c),
        )
    m = 600 if quick else 1500
    pts = rng.random((m, 2))
    d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
    yield f"greedy_cover   m={m:>9,}", m * m, lambda mod, d=d2: mod.greedy_cover(d, 0.01)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=7, help="timing repeats, best-of")
    parser.add_argument("--quick", action="store_true", help="smaller sizes for smoke runs")
    args = parser.parse_args()

    header = f"{'kernel':<26} {'ref':>12} {'fast':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for label, units, call in _cases(args.quick):
        t_ref = _best_of(lambda: call(_ref), args.repeats)
        ref_rate = units / t_ref / 1e6
        if _fast is None:
            print(f"{label:<26} {ref_rate:>9.1f} M/s {'-':>12} {'-':>9}")
            continue
        out_ref = call(_ref)
        out_fast = call(_fast)
        if not np.array_equal(np.asarray(out_ref), np.asarray(out_fast)):
            raise AssertionError(f"backend mismatch in {label}")
        t_fast = _best_of(lambda: call(_fast), args.repeats)
        fast_rate = units / t_fast / 1e6
        print(
            f"{label:<26} {ref_rate:>9.1f} M/s {fast_rate:>9.1f} M/s {t_ref / t_fast:>8.2f}x"
        )
    if _fast is None:
        print("\ncompiled backend not built; showing reference only")


if __name__ == "__main__":
    main()
