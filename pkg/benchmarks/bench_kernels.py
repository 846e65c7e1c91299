"""Benchmark the jitted kernels against their pure interpretations.

Run a couple of times: the first invocation pays numba's compilation cost
(cached afterwards).  Use LPOR_NUMBA=0 to confirm the package works
without numba at all.

    python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from lpor import NUMBA_ENABLED, kernels
from lpor import ScenarioConfig, run_single


def bench(label, fn, args, repeat=2000):
    fn(*args)  # warm (and compile, when jitted)
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    dt = (time.perf_counter() - t0) / repeat
    print(f"  {label:32s} {dt * 1e6:10.2f} us/call")
    return dt


def main():
    print(f"numba enabled: {NUMBA_ENABLED}")
    rng = np.random.default_rng(1)
    n = 160
    ids = np.arange(n, dtype=np.int64)
    xs = rng.random(n) * 800
    ys = rng.random(n) * 800
    k = 0.28 * 0.328 ** 2

    cases = [
        ("distances_to",
         (xs, ys, 400.0, 400.0),
         kernels.distances_to,
         kernels.PURE_KERNELS["distances_to"]),
        ("pick_forwarder_power",
         (ids, xs, ys, 400.0, 400.0, 790.0, 400.0, k, kernels.EMPTY_IDS),
         kernels.pick_forwarder_power,
         kernels.PURE_KERNELS["pick_forwarder_power"]),
        ("pick_candidates",
         (ids, xs, ys, 400.0, 400.0, 500.0, 400.0, 3, 790.0, 400.0, 225.0, k),
         kernels.pick_candidates,
         kernels.PURE_KERNELS["pick_candidates"]),
    ]
    for label, args, fast, pure in cases:
        print(label)
        t_fast = bench("selected backend", fast, args)
        t_pure = bench("pure python loop", pure, args)
        print(f"  {'speedup':32s} {t_pure / t_fast:10.1f}x")

    print("advance_legs")
    state = lambda: (rng.random(n) * 800, rng.random(n) * 800,
                     rng.random(n) * 800, rng.random(n) * 800,
                     np.full(n, 50.0), np.zeros(n), np.zeros(n))

    def adv(fn):
        x, y, wx, wy, sp, pu, tl = state()
        arrived = np.zeros(n, dtype=np.bool_)
        t0 = time.perf_counter()
        for step in range(2000):
            fn(x, y, wx, wy, sp, pu, tl, 0.0, 0.01 * (step + 1), arrived)
        return (time.perf_counter() - t0) / 2000

    kernels.warmup()
    t_fast = adv(kernels.advance_legs)
    t_pure = adv(kernels.PURE_KERNELS["advance_legs"])
    print(f"  {'selected backend':32s} {t_fast * 1e6:10.2f} us/call")
    print(f"  {'pure python loop':32s} {t_pure * 1e6:10.2f} us/call")
    print(f"  {'speedup':32s} {t_pure / t_fast:10.1f}x")

    print("end-to-end: 160 nodes, 30 s simulated, speed 50")
    cfg = ScenarioConfig(speeds=(50.0,), seeds=(1,), protocols=("lpor",),
                         sim_time=30.0)
    run_single(cfg, "lpor", 50.0, 1)  # warm
    t0 = time.perf_counter()
    sim = run_single(cfg, "lpor", 50.0, 1)
    dt = time.perf_counter() - t0
    print(f"  wall {dt:.2f}s, pdr {sim.metrics.pdr():.3f} "
          f"(set LPOR_NUMBA=0 and rerun to compare)")


if __name__ == "__main__":
    main()
