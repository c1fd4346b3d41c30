"""Time the numba and numpy block kernels on the same inputs.

    python3 benchmarks/bench_backends.py [--runs 4096] [--agents 800] [--repeat 3]
"""
import argparse
import time

import numpy as np

from socialdiv import _kernels
from socialdiv.belief_engine import make_belief_engine
from socialdiv.diversity_models import gaussian_noise
from socialdiv.signal_models import make_binary_symmetric, make_symmetric_gaussian
from socialdiv.simulator import BLOCK_RUNS, RunConfig, draw_block

CASES = {
    "binary, no diversity": (make_binary_symmetric(0.25), gaussian_noise(0)),
    "binary, var 0.5": (make_binary_symmetric(0.25), gaussian_noise(0.5)),
    "gaussian, var 0.1": (make_symmetric_gaussian(1.0, 4.0), gaussian_noise(0.1)),
}


def time_backend(backend, inputs, table, bounded, repeat):
    best = float("inf")
    outputs = None
    for _ in range(repeat):
        elapsed = 0.0
        outputs = []
        for worlds, lam, xi, coins in inputs:
            dec = np.empty(lam.shape, dtype=np.int8)
            onset = np.empty(lam.shape[0], dtype=np.int32)
            tau = np.empty(lam.shape[0])
            t0 = time.perf_counter()
            _kernels.simulate_block(backend, worlds, lam, xi, coins, *table, bounded, dec, onset, tau)
            elapsed += time.perf_counter() - t0
            outputs.append(dec)
        best = min(best, elapsed)
    return best, outputs


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--runs", type=int, default=4 * BLOCK_RUNS)
    ap.add_argument("--agents", type=int, default=800)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    backends = ["numpy"] + (["numba"] if _kernels.HAVE_NUMBA else [])
    print(f"{args.runs} runs x {args.agents} agents, best of {args.repeat}")
    print(f"{'case':24s} " + " ".join(f"{b + ' ns/step':>15s}" for b in backends) + "   speedup  agreement")
    for name, (sig, div) in CASES.items():
        cfg = RunConfig(sig, div, args.agents, args.runs, master_seed=1)
        e = make_belief_engine(sig, div)
        inputs = [draw_block(cfg, b) for b in range(-(-args.runs // BLOCK_RUNS))]
        table = e.components()
        if "numba" in backends:  # compile outside the timed region
            small = [a[:1, :2] if a.ndim == 2 else a[:1] for a in inputs[0]]
            _kernels.simulate_block("numba", *small, *table, e.bounded, np.empty((1, 2), np.int8),
                                    np.empty(1, np.int32), np.empty(1))
        res = {b: time_backend(b, inputs, table, e.bounded, args.repeat) for b in backends}
        steps = args.runs * args.agents
        cols = " ".join(f"{res[b][0] / steps * 1e9:15.1f}" for b in backends)
        if len(backends) == 2:
            speed = res["numpy"][0] / res["numba"][0]
            agree = np.mean([np.mean(x == y) for x, y in zip(res["numpy"][1], res["numba"][1])])
            print(f"{name:24s} {cols}   {speed:6.2f}x  {agree:.6f}")
        else:
            print(f"{name:24s} {cols}")


if __name__ == "__main__":
    main()
