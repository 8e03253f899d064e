"""Event-loop throughput of the numba kernel against the pure-numpy fallback.

    python3 benchmarks/bench_kernel.py [--n 2000] [--events 200000]

Each backend runs in its own interpreter because the backend is fixed at
import time by ``ECHOSIM_PURE_NUMPY``.  Both runs use the same seed, so the
script also checks that the two final states hash identically.
"""
import argparse
import json
import os
import subprocess
import sys

CHILD = """
import hashlib, json, sys, time
import numpy as np
from echosim import backend_name
from echosim.model import ModelParams, init_state, run
from echosim.netgen import generate_er_directed

n, events = int(sys.argv[1]), int(sys.argv[2])

def once(k):
    rng = np.random.default_rng(7)
    g = generate_er_directed(n, 8.0 / (n - 1), rng)
    s = init_state(n, rng, priority_fraction=0.05, stubborn_fraction=0.02, stubborn_are_priority=True)
    t0 = time.perf_counter()
    run(s, g, ModelParams(iterations=k), rng)
    return time.perf_counter() - t0, hashlib.sha256(s.opinions.tobytes() + g.edges().tobytes()).hexdigest()

once(10)  # compile or warm caches
dt, h = once(events)
print(json.dumps({"backend": backend_name(), "seconds": dt, "events_per_s": events / dt, "hash": h}))
"""


def measure(pure: bool, n: int, events: int) -> dict:
    env = dict(os.environ, ECHOSIM_PURE_NUMPY="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", CHILD, str(n), str(events)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--events", type=int, default=200_000)
    args = ap.parse_args()
    fast = measure(False, args.n, args.events)
    slow = measure(True, args.n, args.events)
    for r in (fast, slow):
        print(f"{r['backend']:>6}: {r['seconds']:8.3f} s  {r['events_per_s']:12.0f} events/s")
    print(f"speed-up: {slow['seconds'] / fast['seconds']:.1f}x")
    print("states identical" if fast["hash"] == slow["hash"] else "STATES DIFFER")
    return 0 if fast["hash"] == slow["hash"] else 1


if __name__ == "__main__":
    sys.exit(main())
