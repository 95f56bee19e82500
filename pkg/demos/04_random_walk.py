"""Random walk: no path is guaranteed.

All 21 nodes wander in a 500 m square. NDN fetches from whichever neighbour
has a copy and keeps making progress. OLSR stalls whenever the route to the
producer disappears. The stall intervals come from the event log.

    python demos/04_random_walk.py [seed]
"""

import sys

from adhocsim.engine import S
from adhocsim.eventlog import route_stalls
from adhocsim.scenario import build_scenario, preset_config

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 1

for stack in ("ndn", "olsr-tcp", "olsr-udp"):
    inst = build_scenario(preset_config("randomWalk", stack, 0), seed, log_events=True)
    res = inst.run()
    parts = [f"{f} {s['completionFraction']:.3f}" for f, s in res.summaries.items()]
    print(f"{stack:9s} completion: {', '.join(parts)}")
    if stack != "ndn":
        stalls = route_stalls(res.log.records, inst.layout.producer, res.end_time)
        for flow, spans in stalls.items():
            total = sum(b - a for a, b in spans) / S
            print(f"          {flow}: {len(spans)} no-route stalls, {total:.0f} s in total")
