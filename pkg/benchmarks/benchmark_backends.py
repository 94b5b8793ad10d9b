"""Compare the compiled (numba) and pure-numpy simulation backends.

The backend is chosen at import time from FVLAB_NO_NUMBA, so each timing
runs in a fresh subprocess.  Both backends draw from the same Mersenne
Twister stream, so the workloads are sample-for-sample identical and the
script also cross-checks that the outputs agree bit for bit.

Usage: python benchmarks/benchmark_backends.py [--N 50] [--replicas 200]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from fvlab import BACKEND, Configuration, SimulationSpec, cg_model, sample_paths
from fvlab.coupling import CoupledPair, wasserstein_decay

N, replicas = json.loads(sys.argv[1])
model = cg_model(5, 1.0)
eta0 = Configuration(eta=np.array([N, 0, 0, 0, 0]), N=N)
times = np.linspace(0.1, 2.0, 8)

# warm-up triggers jit compilation so it is not timed
sample_paths(SimulationSpec(model=model, N=N, t_end=2.0, seed=1, replicas=2), eta0, times)

t0 = time.perf_counter()
paths = sample_paths(
    SimulationSpec(model=model, N=N, t_end=2.0, seed=7, replicas=replicas), eta0, times
)
t_single = time.perf_counter() - t0

pair0 = CoupledPair(
    eta=Configuration(eta=np.array([N, 0, 0, 0, 0]), N=N),
    eta_prime=Configuration(eta=np.array([0, 0, 0, 0, N]), N=N),
)
wasserstein_decay(model, N, pair0, times, 2, 1)  # warm-up
t0 = time.perf_counter()
curve = wasserstein_decay(model, N, pair0, times, replicas, 7)
t_pair = time.perf_counter() - t0

print(json.dumps({
    "backend": BACKEND,
    "single_copy_s": t_single,
    "coupled_pair_s": t_pair,
    "paths_checksum": int(paths.sum()),
    "decay_checksum": float(curve.estimate.sum()),
}))
"""


def run(no_numba: bool, N: int, replicas: int) -> dict:
    env = dict(os.environ)
    if no_numba:
        env["FVLAB_NO_NUMBA"] = "1"
    else:
        env.pop("FVLAB_NO_NUMBA", None)
    out = subprocess.run(
        [sys.executable, "-c", WORKER, json.dumps([N, replicas])],
        capture_output=True,
        text=True,
        env=env,
        check=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--N", type=int, default=50)
    parser.add_argument("--replicas", type=int, default=200)
    args = parser.parse_args()

    results = [run(no_numba, args.N, args.replicas) for no_numba in (False, True)]
    width = max(len(r["backend"]) for r in results)
    print(f"N={args.N}, replicas={args.replicas}")
    for r in results:
        print(
            f"{r['backend']:<{width}}  single-copy {r['single_copy_s']:8.3f}s"
            f"  coupled-pair {r['coupled_pair_s']:8.3f}s"
        )
    a, b = results
    if a["backend"] != b["backend"]:
        for key in ("paths_checksum", "decay_checksum"):
            if a[key] != b[key]:
                print(f"MISMATCH: {key} differs across backends")
                return 1
        print("outputs identical across backends")
        speedup = b["single_copy_s"] / a["single_copy_s"]
        print(f"speedup ({a['backend']} over {b['backend']}): {speedup:.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
