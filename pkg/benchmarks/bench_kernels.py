"""Time the compiled kernels against the numpy fallback on identical inputs.

    python benchmarks/bench_kernels.py [--repeat 3] [--scale 1.0] [--json out.json]

Each row reports the best-of-``repeat`` wall time per backend, the speedup
and the largest absolute difference between the two outputs.
"""

import argparse
import json
import math
import time

import numpy as np

from levywind import kernels
from levywind.levy import ExpJumps, LevySpec, draw_jumps
from levywind.stats import replica_rng
from levywind.winding import sample_bridge


def _events_case(n, horizon):
    spec = LevySpec.from_drift(0.0, jumps=ExpJumps(1.0, 1.0))
    gaps, jumps, counts = [], [], []
    for i in range(n):
        pos, size = draw_jumps(replica_rng(1, i), spec.jumps, horizon)
        gaps.append(np.diff(np.concatenate([[0.0], pos, [horizon]])))
        jumps.append(np.concatenate([size, [0.0]]))
        counts.append(pos.size + 1)
    offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    return np.zeros(n), offsets, np.concatenate(gaps), np.concatenate(jumps)


def cases(scale):
    n_ev = max(10, int(20_000 * scale))
    z0, off, gaps, jumps = _events_case(n_ev, 30.0)
    rng = np.random.default_rng(7)
    n_h, steps = max(4, int(200 * scale)), 5000
    dB = math.sqrt(1e-3) * rng.standard_normal((n_h, steps))
    bridge = sample_bridge(1.0, 2**14, 3)
    bx, by = bridge[:, 0].copy(), bridge[:, 1].copy()
    x0, y0 = bx.min() - 0.01, by.min() - 0.01
    side = max(bx.max() - x0, by.max() - y0) + 0.01
    n_w = max(4, int(64 * scale))
    walk_buf = np.random.default_rng(9).standard_normal((n_w, 20_000))

    def walk(mod):
        state = np.zeros((n_w, 8))
        state[:, 0] = 1.0
        mod.winding_walk(state, walk_buf, 1e4, 1e-3, 1.0, 1e-2, 0.25)
        return state[:, 3:5]

    return [
        ("riccati_events", lambda m: m.riccati_events(z0, 1.0, 0.0, off, gaps, jumps)),
        ("exp_functional_events", lambda m: m.exp_functional_events(0.5, off, gaps, jumps)),
        ("riccati_heun", lambda m: m.riccati_heun(np.zeros(n_h), 1.0, 0.0, math.sqrt(2), 1e-3, dB,
                                                  np.zeros((0, 0)))),
        ("exp_functional_grid", lambda m: m.exp_functional_grid(1.0, 1.0, 1e-3, dB)),
        ("winding_walk", walk),
        ("winding_raster", lambda m: m.winding_raster(bx, by, x0, y0, side / 512, 512)[0]),
        ("boundary_mask", lambda m: m.boundary_mask(bx, by, x0, y0, side / 512, 512,
                                                    math.sqrt(2) * side / 512)),
    ]


def best_time(fn, repeat):
    best, out = math.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--scale", type=float, default=1.0, help="problem size multiplier")
    ap.add_argument("--json", default=None, help="also write results here")
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    if "compiled" not in backends:
        print("compiled extension not built; only the numpy fallback is available")
    rows = []
    print(f"{'kernel':24s} {'pure [s]':>10s} {'compiled [s]':>13s} {'speedup':>8s} {'max |diff|':>11s}")
    for name, fn in cases(args.scale):
        tp, outp = best_time(lambda: fn(backends["pure"]), args.repeat)
        if "compiled" in backends:
            tc, outc = best_time(lambda: fn(backends["compiled"]), args.repeat)
            diff = float(np.max(np.abs(np.asarray(outp, dtype=float) - np.asarray(outc, dtype=float))))
        else:
            tc, diff = math.nan, math.nan
        rows.append({"kernel": name, "pure_s": tp, "compiled_s": tc, "speedup": tp / tc, "max_abs_diff": diff})
        print(f"{name:24s} {tp:10.4f} {tc:13.4f} {tp / tc:8.1f} {diff:11.2e}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)
    return rows


if __name__ == "__main__":
    main()
