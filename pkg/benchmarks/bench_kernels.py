"""Timing comparison of the numba-compiled piece-scan kernels against the
pure-Python fallback (PIECES_LAB_NO_NUMBA=1), plus an agreement check.

Run:  python3 benchmarks/bench_kernels.py
"""

import json
import os
import subprocess
import sys
import time

WORKER = r"""
import json, sys, time
from pieces_lab.disorder import (sample_pieces, count_pair_clusters,
                                 count_neighbor_pairs, count_triplets)

cfg = sample_pieces(0, 1e6, 1.0)
results, times = {}, {}
# warm-up triggers any JIT compilation outside the timed region
count_pair_clusters(cfg, 1.0, 2.0, 1.0, 2.0, 0.0, 1.0)

t0 = time.perf_counter()
results["pair_clusters"] = count_pair_clusters(cfg, 1.0, 3.0, 1.0, 3.0, 0.0, 2.0)
times["pair_clusters"] = time.perf_counter() - t0

t0 = time.perf_counter()
results["neighbor_pairs"] = count_neighbor_pairs(cfg, 2.0, 2.0, 0.5)
times["neighbor_pairs"] = time.perf_counter() - t0

t0 = time.perf_counter()
results["triplets"] = count_triplets(cfg, 1.5, 1.5, 1.5, 0.5)
times["triplets"] = time.perf_counter() - t0

json.dump({"results": results, "times": times}, sys.stdout)
"""


def run(no_numba):
    env = dict(os.environ, PIECES_LAB_NO_NUMBA="1" if no_numba else "0")
    out = subprocess.run([sys.executable, "-c", WORKER], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main():
    accel = run(no_numba=False)
    plain = run(no_numba=True)
    print(f"{'kernel':<16} {'numba [s]':>10} {'fallback [s]':>13} {'speedup':>8}")
    for name in accel["times"]:
        ta, tp = accel["times"][name], plain["times"][name]
        print(f"{name:<16} {ta:>10.4f} {tp:>13.4f} {tp / ta:>8.1f}x")
        if accel["results"][name] != plain["results"][name]:
            print(f"  MISMATCH: {accel['results'][name]} vs "
                  f"{plain['results'][name]}")
            return 1
    print("results identical on both paths")
    return 0


if __name__ == "__main__":
    sys.exit(main())
