"""Compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from levy_domains import _fallback

try:
    from levy_domains import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def stream_case():
    return "stream_block_sums(2, 2^24)", (2, 1 << 24, False)


def accumulate_case(seed=0, n_paths=2000, jumps=400):
    rng = np.random.default_rng(seed)
    counts = rng.poisson(jumps, n_paths)
    offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    times = np.concatenate([np.sort(rng.uniform(0, 1e3, c)) for c in counts])
    contrib = rng.standard_normal((times.size, 1))
    cps = np.geomspace(1.0, 1e3, 16)
    edges = np.sort(rng.uniform(0, 1e3, 40))
    labels = rng.integers(0, 3, edges.size + 1).astype(np.int64)
    return (f"accumulate_paths({n_paths} paths, {times.size} jumps)",
            (offsets, times, contrib, cps, edges, labels, 3))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled extension not built; only the fallback is timed")
    print(f"{'kernel':48s} {'fallback s':>11s} {'cython s':>10s} {'speedup':>8s}  agree")
    for name, fn_name, (label, call) in [("stream", "stream_block_sums", stream_case()),
                                         ("accum", "accumulate_paths", accumulate_case())]:
        tf, of = best_of(lambda: getattr(_fallback, fn_name)(*call), args.repeat)
        if _kernels is None:
            print(f"{label:48s} {tf:11.3f} {'-':>10s} {'-':>8s}  -")
            continue
        tc, oc = best_of(lambda: getattr(_kernels, fn_name)(*call), args.repeat)
        agree = np.allclose(np.asarray(of), np.asarray(oc), rtol=1e-12, atol=1e-12)
        print(f"{label:48s} {tf:11.3f} {tc:10.3f} {tf / tc:8.1f}x  {agree}")


if __name__ == "__main__":
    main()
