"""What each stack delivers while the network is split.

At 60 s the producer leaves with the convoy and comes back later. While the
consumers have no path to it, OLSR with a reliable transport cannot move any
new data, but NDN consumers keep getting chunks that are cached on their side.

    python demos/03_partition.py [seed]
"""

import sys

from adhocsim.engine import S
from adhocsim.scenario import build_scenario, preset_config

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 1

for stack in ("ndn", "olsr-tcp"):
    inst = build_scenario(preset_config("controlledGrid", stack, 5), seed)
    sc = inst.convoy
    cuts = {rec.flow: inst.partition_intervals(rec.node, inst.layout.producer,
                                               sc.depart_at, sc.cycle_end)[0]
            for rec in inst.records}
    res = inst.run()
    print(f"{stack}: run ended at {(res.end_time - res.epoch) / S:.1f} s")
    for rec in res.records:
        cut, back = cuts[rec.flow]
        during = [c for c in rec.chunks.values()
                  if c.delivered_at is not None and cut <= c.delivered_at <= back
                  and c.last_expressed_at >= cut]
        print(f"  {rec.flow}: cut {(cut - res.epoch) / S:.1f}-{(back - res.epoch) / S:.1f} s, "
              f"chunks requested and received meanwhile: {len(during)}, "
              f"completion {res.summaries[rec.flow]['completionFraction']:.3f}")
