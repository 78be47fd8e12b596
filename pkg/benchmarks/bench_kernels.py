#!/usr/bin/env python3
"""Benchmark the jitted kernels against the fallback path.

The backend is chosen at import time from FAIRCLUSTER_NUMBA, so the
orchestrator re-invokes this script as a subprocess per mode and prints a
comparison table. Run directly:

    python benchmarks/bench_kernels.py            # compare both modes
    python benchmarks/bench_kernels.py --scale 2  # larger workloads
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def _blob_dataset(n, separation=8.0, seed=3):
    from faircluster.core import ColoredDataset
    rng = np.random.default_rng(seed)
    half = n // 2
    coords = np.vstack([rng.normal(0, 1, (half, 2)),
                        rng.normal(0, 1, (half, 2)) + [separation, 0.0]])
    colors = np.array([1] * half + [0] * half, dtype=np.uint8)
    perm = rng.permutation(n)
    return ColoredDataset.from_points(coords[perm], colors[perm])


def bench_mcf(scale):
    from faircluster import mcf
    from faircluster.core import Objective
    from faircluster.fairlets import build_fairlet_network
    ds = _blob_dataset(120 * scale)
    net = build_fairlet_network(ds, 2, Objective.MEDIAN)

    def run():
        sol = mcf.solve(net)
        assert sol.feasible
    return run


def bench_matching(scale):
    from faircluster.matching import BipartiteGraph, bottleneck_perfect_matching
    ds = _blob_dataset(120 * scale)
    g = BipartiteGraph.from_dataset(ds)

    def run():
        bottleneck_perfect_matching(g)
    return run


def bench_local_search(scale):
    from faircluster._kernels import local_search_core
    rng = np.random.default_rng(5)
    m = 150 * scale
    pts = rng.uniform(0, 1, (m, 2))
    d = np.ascontiguousarray(np.sqrt(
        ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1)))
    w = rng.integers(1, 4, m).astype(float)
    init = np.sort(rng.choice(m, size=10, replace=False)).astype(np.int64)

    def run():
        local_search_core(d, w, init.copy(), 1e-9)
    return run


WORKLOADS = {
    "mcf_solve": bench_mcf,
    "bottleneck_matching": bench_matching,
    "kmedian_local_search": bench_local_search,
}


def worker(scale, repeats):
    from faircluster._kernels import NUMBA_ENABLED, warm_up
    warm_up()
    results = {"numba": NUMBA_ENABLED, "timings": {}}
    for name, factory in WORKLOADS.items():
        run = factory(scale)
        run()  # warm caches (and jit specializations) outside the timing
        best = min(_timed(run) for _ in range(repeats))
        results["timings"][name] = best
    print(json.dumps(results))


def _timed(fn):
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


def orchestrate(scale, repeats):
    out = {}
    for mode, flag in (("numba", "1"), ("fallback", "0")):
        env = dict(os.environ, FAIRCLUSTER_NUMBA=flag)
        proc = subprocess.run(
            [sys.executable, __file__, "--worker", "--scale", str(scale),
             "--repeats", str(repeats)],
            env=env, capture_output=True, text=True, check=True)
        out[mode] = json.loads(proc.stdout.strip().splitlines()[-1])
    if out["numba"]["numba"] is False:
        print("note: numba unavailable; both columns ran the fallback")
    width = max(map(len, WORKLOADS)) + 2
    print(f"{'kernel':<{width}}{'numba':>12}{'fallback':>12}{'speedup':>10}")
    for name in WORKLOADS:
        tn = out["numba"]["timings"][name]
        tf = out["fallback"]["timings"][name]
        print(f"{name:<{width}}{tn:>11.4f}s{tf:>11.4f}s{tf / tn:>9.1f}x")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    ap.add_argument("--scale", type=int, default=1)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    if args.worker:
        worker(args.scale, args.repeats)
    else:
        orchestrate(args.scale, args.repeats)


if __name__ == "__main__":
    main()
