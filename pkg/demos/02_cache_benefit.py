"""NDN caching on the convoy grid.

Consumer 1 starts fetching the file at t=0. Consumer 2 joins later. If it
joins early it finds recent chunks cached along consumer 1's path and gets
them in fewer hops. At 50 s the two flows collide with the convoy departure
and delay peaks.

    python demos/02_cache_benefit.py [n_seeds]
"""

import sys

from adhocsim.metrics import aggregate_seeds
from adhocsim.scenario import preset_config, run_scenario

n_seeds = int(sys.argv[1]) if len(sys.argv) > 1 else 2

print(f"{'start':>6} | {'c1 delay':>8} {'c1 hops':>7} | {'c2 delay':>8} {'c2 hops':>7} | c2 goodput")
for start in (5, 10, 50, 100, 200):
    cfg = preset_config("controlledGrid", "ndn", start)
    runs = [run_scenario(cfg, seed) for seed in range(1, n_seeds + 1)]
    c1 = aggregate_seeds([r.summaries["consumer1"] for r in runs])
    c2 = aggregate_seeds([r.summaries["consumer2"] for r in runs])
    print(f"{start:6d} | {c1['meanDelay'].mean:8.3f} {c1['meanHopCount'].mean:7.2f} | "
          f"{c2['meanDelay'].mean:8.3f} {c2['meanHopCount'].mean:7.2f} | "
          f"{c2['goodputBps'].mean:9.0f} bit/s")
