"""Node placements for the two scenario families.

controlledGrid (two rows, 100 m spacing, x to the right)::

    y=100        C2  F   F   F   F   M   P   M   M   M
    y=0     C1   F   F   F   F   F   M   M   M   M   M
            0   100 200 300 400 500 600 700 800 900 1000

C1/C2 consumers, P producer, F fixed routers, M mobile routers (convoy with
P). With the default ~108 m radio range only horizontal and vertical
neighbours are linked; diagonals (141 m) are not. Shortest paths to P are
8 hops from C1 and 6 from C2.
"""

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ..radio import SPEED_OF_LIGHT

CONSUMER1 = 0
CONSUMER2 = 1
PRODUCER = 2


class LayoutError(ValueError):
    pass


@dataclass
class TopologyLayout:
    positions: np.ndarray
    consumers: tuple = (CONSUMER1, CONSUMER2)
    producer: int = PRODUCER
    fixed: frozenset = field(default_factory=frozenset)
    mobile: frozenset = field(default_factory=frozenset)

    @property
    def n(self):
        return len(self.positions)

    def role(self, node):
        if node in self.consumers:
            return f"consumer{self.consumers.index(node) + 1}"
        if node == self.producer:
            return "producer"
        return "mobile" if node in self.mobile else "fixed"


def controlled_grid(spacing=100.0):
    pos = {CONSUMER1: (0, 0), CONSUMER2: (1, 1), PRODUCER: (7, 1)}
    fixed_cells = [(x, 0) for x in range(1, 6)] + [(x, 1) for x in range(2, 6)]
    mobile_cells = [(x, 0) for x in range(6, 11)] + [(x, 1) for x in (6, 8, 9, 10)]
    node = 3
    fixed, mobile = set(), set()
    for cell in fixed_cells:
        pos[node] = cell
        fixed.add(node)
        node += 1
    for cell in mobile_cells:
        pos[node] = cell
        mobile.add(node)
        node += 1
    positions = np.array([[pos[i][0] * spacing, pos[i][1] * spacing] for i in range(node)])
    return TopologyLayout(positions, fixed=frozenset(fixed), mobile=frozenset(mobile))


def random_layout(n_nodes, rng, bounds=(0.0, 0.0, 500.0, 500.0)):
    xmin, ymin, xmax, ymax = bounds
    positions = np.column_stack([rng.uniform(xmin, xmax, n_nodes), rng.uniform(ymin, ymax, n_nodes)])
    return TopologyLayout(positions, mobile=frozenset(range(n_nodes)))


def adjacency(positions, radio):
    """Unit-disk links: ``j`` in ``adj[i]`` iff i hears j above sensitivity."""
    pos = np.asarray(positions, dtype=float)
    d = np.hypot(pos[:, None, 0] - pos[None, :, 0], pos[:, None, 1] - pos[None, :, 1])
    np.fill_diagonal(d, np.inf)
    # same budget as friis_rx_power, evaluated for every pair at once
    loss = 20.0 * np.log10(4.0 * np.pi * d * radio.carrier_freq_hz / SPEED_OF_LIGHT)
    rx = radio.tx_power_dbm - loss - radio.system_loss_db
    return [np.flatnonzero(row >= radio.rx_sensitivity_dbm).tolist() for row in rx]


def hop_distances(adj, src):
    dist = {src: 0}
    todo = deque([src])
    while todo:
        u = todo.popleft()
        for v in adj[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                todo.append(v)
    return dist


def check_controlled_grid(layout, radio, expected=(8, 6)):
    """Raise LayoutError unless consumer->producer hop counts match."""
    adj = adjacency(layout.positions, radio)
    dist = hop_distances(adj, layout.producer)
    got = tuple(dist.get(c) for c in layout.consumers)
    if got != tuple(expected):
        raise LayoutError(f"consumer->producer hop counts {got}, expected {tuple(expected)}")
    return got
