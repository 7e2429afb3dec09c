"""Compare the compiled and pure-Python kernels.

    python benchmarks/bench_kernels.py [--repeat 3] [--sample 20000]

Python-backend timings on the larger workloads use a random sample of the
masks and report throughput, so both columns are in sets per second.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from hkstar import kernels
from hkstar.trees import Forest, build_perfect, leftmost_path


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        n = fn()
        best = min(best, time.perf_counter() - start)
    return n / best if best > 0 else float("inf"), best


def workloads(sample, rng):
    for r, h in [(2, 4), (3, 3), (2, 5)]:
        t = build_perfect(r, h)
        yield f"enumerate perfect({r},{h})", lambda b, t=t: len(kernels.independent_masks(t, backend=b)), None
        path = leftmost_path(t, 0)
        for v in (path[0], path[-2]):
            masks = kernels.independent_masks(t, forced=[v], forbidden=[path[-1]])
            small = rng.choice(masks, size=min(sample, len(masks)), replace=False)
            yield (f"star map perfect({r},{h}) v={v}",
                   lambda b, t=t, v=v, m=masks: len(kernels.star_images(t, v, m, backend=b)),
                   lambda b, t=t, v=v, m=small: len(kernels.star_images(t, v, m, backend=b)))
    host = Forest((build_perfect(2, 3), build_perfect(2, 5)))
    d, u = host.roots
    masks = kernels.independent_masks(host, forced=[u], forbidden=[d])
    small = rng.choice(masks, size=min(sample, len(masks)), replace=False)
    yield ("cas perfect(2,3)|perfect(2,5)",
           lambda b: len(kernels.cas_images(host, d, u, masks, backend=b)),
           lambda b: len(kernels.cas_images(host, d, u, small, backend=b)))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--sample", type=int, default=20000)
    args = ap.parse_args()
    if kernels.BACKEND != "cython":
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
    rng = np.random.default_rng(1)
    print(f"{'workload':40s} {'cython sets/s':>14s} {'python sets/s':>14s} {'speedup':>8s}")
    for name, full, sampled in workloads(args.sample, rng):
        fast, _ = _best(lambda: full("cython"), args.repeat)
        slow, _ = _best(lambda: (sampled or full)("python"), 1)
        print(f"{name:40s} {fast:14.3g} {slow:14.3g} {fast / slow:7.0f}x")


if __name__ == "__main__":
    main()
