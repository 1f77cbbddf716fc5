"""Time the compiled kernels against the pure numpy/Python fallback.

Each backend runs in its own interpreter because the backend is chosen at
import time from ``CORRDECAY_DISABLE_NUMBA``.

    python3 benchmarks/bench_kernels.py [--n 18] [--depth 10] [--repeat 3]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

_WORKER = r"""
import json, sys, time
import numpy as np
from corrdecay import NUMBA_ENABLED, SpinSystem, exact_partition, saw_interval, to_ising
from corrdecay.corpus import random_connected_graph

n, depth, repeat = (int(a) for a in sys.argv[1:4])
g = random_connected_graph(np.random.default_rng(7), n, max_degree=4, extra_edges=n)
system = SpinSystem(0.6, 0.4, 1.3)
view = to_ising(system, g)

def best(fn):
    fn()  # warm-up, includes compilation
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out

t_exact, log_z = best(lambda: exact_partition(system, g))
t_saw, res = best(lambda: saw_interval(view, g, 0, depth))
print(json.dumps({"numba": NUMBA_ENABLED, "exact_s": t_exact, "log_Z": log_z,
                  "saw_s": t_saw, "saw_nodes": res.nodes, "saw_lo": res.interval.lo}))
"""


def run(disable: bool, n: int, depth: int, repeat: int) -> dict:
    env = dict(os.environ)
    if disable:
        env["CORRDECAY_DISABLE_NUMBA"] = "1"
    else:
        env.pop("CORRDECAY_DISABLE_NUMBA", None)
    out = subprocess.run([sys.executable, "-c", _WORKER, str(n), str(depth), str(repeat)],
                         env=env, check=True, capture_output=True, text=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=18, help="vertices for the enumeration benchmark")
    ap.add_argument("--depth", type=int, default=10, help="SAW-tree depth limit")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    fast = run(False, args.n, args.depth, args.repeat)
    slow = run(True, args.n, args.depth, args.repeat)
    print(f"{'kernel':<22}{'numba s':>12}{'fallback s':>14}{'speedup':>10}")
    for key, label in (("exact_s", f"enumerate n={args.n}"), ("saw_s", f"saw depth={args.depth}")):
        print(f"{label:<22}{fast[key]:>12.4f}{slow[key]:>14.4f}{slow[key] / fast[key]:>10.1f}")
    print(f"log_Z agreement: {abs(fast['log_Z'] - slow['log_Z']):.2e}")
    print(f"saw nodes: {fast['saw_nodes']} (fallback {slow['saw_nodes']})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
