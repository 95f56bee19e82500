"""Radio budget and the convoy grid.

With 5 dBm transmit power, -80 dBm sensitivity, 2.412 GHz and 4.2 dB of
system loss, free-space propagation gives a range just over 100 m. On a grid
with 100 m spacing only horizontal and vertical neighbours can hear each other,
which fixes the hop counts from the two consumers to the producer.

    python demos/01_radio_and_grid.py
"""

from adhocsim.radio import RadioConfig, friis_rx_power
from adhocsim.scenario import check_controlled_grid, controlled_grid
from adhocsim.scenario.layout import adjacency

cfg = RadioConfig()
print(f"range: {cfg.range_m():.2f} m")
for d in (50, 100, 108, 110, 141.4, 200):
    p = friis_rx_power(cfg.tx_power_dbm, d, cfg)
    heard = "heard" if p >= cfg.rx_sensitivity_dbm else "lost"
    print(f"  {d:6.1f} m -> {p:7.2f} dBm  {heard}")

print(f"data frame (1040 B + 48 B header) airtime: {cfg.airtime(1088) / 1e6:.3f} ms")
print(f"interest frame (32 B + 48 B header) airtime: {cfg.airtime(80) / 1e6:.3f} ms")

layout = controlled_grid()
print("\ngrid layout (x, y in m):")
for node, (x, y) in enumerate(layout.positions):
    print(f"  node {node:2d} {layout.role(node):9s} ({x:6.0f}, {y:4.0f})")
hops = check_controlled_grid(layout, cfg)
print(f"hops to producer: consumer 1 = {hops[0]}, consumer 2 = {hops[1]}")
links = sum(len(n) for n in adjacency(layout.positions, cfg)) // 2
print(f"links in the grid: {links}")
