"""OLSR state and message processing (RFC 3626 subset).

One interface per node, default willingness, no HNA/MID. Tuples carry absolute
expiry times in ns and are purged lazily whenever the state is read.
"""

from collections import deque
from dataclasses import dataclass, field

from ..engine import S

SYM = "SYM"
ASYM = "ASYM"


@dataclass
class OlsrTimers:
    hello_interval: int = 2 * S
    tc_interval: int = 5 * S
    neighbor_hold: int = 6 * S
    topology_hold: int = 15 * S
    duplicate_hold: int = 30 * S

    def __post_init__(self):
        for name in ("hello_interval", "tc_interval", "neighbor_hold", "topology_hold"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class HelloMessage:
    origin: int
    links: tuple  # ((neighbor, SYM|ASYM), ...) sorted by neighbor
    mprs: frozenset = frozenset()

    def size_bytes(self):
        return 8 + 4 * len(self.links)


@dataclass(frozen=True)
class TcMessage:
    origin: int
    seq: int
    ansn: int
    advertised: frozenset
    ttl: int = 255
    hop_count: int = 0

    def size_bytes(self):
        return 12 + 4 * len(self.advertised)

    def relayed(self):
        return TcMessage(self.origin, self.seq, self.ansn, self.advertised,
                         self.ttl - 1, self.hop_count + 1)


@dataclass
class OlsrState:
    node: int
    links: dict = field(default_factory=dict)         # nbr -> [heard_until, sym_until]
    two_hop: dict = field(default_factory=dict)       # nbr -> (frozenset, expiry)
    mpr_set: frozenset = frozenset()
    mpr_selectors: dict = field(default_factory=dict)  # selector -> expiry
    topology: dict = field(default_factory=dict)      # (dest, last_hop) -> (ansn, expiry)
    duplicates: dict = field(default_factory=dict)    # (origin, seq) -> (expiry, relayed)
    routes: dict = field(default_factory=dict)        # dest -> (next_hop, hops)
    ansn: int = 0
    msg_seq: int = 0
    version: int = 0

    def sym_neighbors(self, now):
        return frozenset(n for n, (_, sym) in self.links.items() if sym > now)

    def purge(self, now):
        """Drop expired tuples; True if anything route-relevant went away."""
        changed = False
        for n in [n for n, (heard, sym) in self.links.items() if heard <= now and sym <= now]:
            del self.links[n]
            changed = True
        for n, (_, sym) in self.links.items():
            if sym <= now and n in self.two_hop:
                del self.two_hop[n]
                changed = True
        for n in [n for n, (_, exp) in self.two_hop.items() if exp <= now]:
            del self.two_hop[n]
            changed = True
        for k in [k for k, (_, exp) in self.topology.items() if exp <= now]:
            del self.topology[k]
            changed = True
        for k in [k for k, exp in self.mpr_selectors.items() if exp <= now]:
            del self.mpr_selectors[k]
        for k in [k for k, (exp, _) in self.duplicates.items() if exp <= now]:
            del self.duplicates[k]
        return changed


def select_mprs(neighbors, two_hop, node=None):
    """MPR heuristic of RFC 3626 8.3.1.

    ``neighbors`` is the symmetric 1-hop set, ``two_hop`` maps each neighbor
    to the nodes it reports as symmetric neighbors. Returns the MPR set.
    """
    neighbors = frozenset(neighbors)
    cover = {}
    for n in sorted(neighbors):
        reach = set(two_hop.get(n, ())) - neighbors
        reach.discard(node)
        cover[n] = reach
    strict = set().union(*cover.values()) if cover else set()
    if not strict:
        return frozenset()
    mprs = set()
    uncovered = set(strict)
    for target in sorted(strict):
        coverers = [n for n in cover if target in cover[n]]
        if len(coverers) == 1:
            mprs.add(coverers[0])
    for m in mprs:
        uncovered -= cover[m]
    degree = {n: len(cover[n]) for n in cover}
    while uncovered:
        best = max(
            (n for n in cover if n not in mprs),
            key=lambda n: (len(cover[n] & uncovered), degree[n], -n),
        )
        mprs.add(best)
        uncovered -= cover[best]
    return frozenset(mprs)


def covers_all(neighbors, two_hop, mprs, node=None):
    """True if every strict 2-hop neighbor is reached through some MPR."""
    neighbors = frozenset(neighbors)
    strict = set()
    for n in neighbors:
        strict |= set(two_hop.get(n, ()))
    strict -= neighbors
    strict.discard(node)
    reached = set()
    for m in mprs:
        reached |= set(two_hop.get(m, ()))
    return strict <= reached and set(mprs) <= neighbors


def compute_routes(node, neighbors, two_hop, topology):
    """Hop-count shortest paths from ``node``.

    ``topology`` is an iterable of (dest, last_hop) pairs. Returns
    ``{dest: (next_hop, hops)}``; unreachable destinations are absent. Ties
    resolve to the lowest-id next hop.
    """
    adj = {}
    for n in neighbors:
        adj.setdefault(node, set()).add(n)
        for m in two_hop.get(n, ()):
            if m != node:
                adj.setdefault(n, set()).add(m)
    for dest, last in topology:
        if dest != node:
            adj.setdefault(last, set()).add(dest)
    routes = {}
    frontier = deque()
    for n in sorted(neighbors):
        routes[n] = (n, 1)
        frontier.append(n)
    while frontier:
        u = frontier.popleft()
        nh, hops = routes[u]
        for v in sorted(adj.get(u, ())):
            if v == node or v in routes:
                continue
            routes[v] = (nh, hops + 1)
            frontier.append(v)
    return routes


def emit_hello(state, now):
    """HELLO advertising every currently heard link and our MPR choices."""
    links = []
    for n in sorted(state.links):
        heard, sym = state.links[n]
        if sym > now:
            links.append((n, SYM))
        elif heard > now:
            links.append((n, ASYM))
    return HelloMessage(state.node, tuple(links), frozenset(state.mpr_set))


def process_hello(state, msg, now, timers):
    """Link sensing, 2-hop set and MPR-selector updates from one HELLO.

    Returns True when the symmetric neighborhood or 2-hop set changed.
    """
    me = state.node
    origin = msg.origin
    hold = now + timers.neighbor_hold
    before = state.links.get(origin)
    was_sym = before is not None and before[1] > now
    link = state.links.setdefault(origin, [0, 0])
    link[0] = hold
    listed = {n: status for n, status in msg.links}
    if me in listed:
        link[1] = hold
    is_sym = link[1] > now
    changed = was_sym != is_sym
    if is_sym:
        reach = frozenset(n for n, status in msg.links if status == SYM and n != me)
        old = state.two_hop.get(origin)
        if old is None or old[0] != reach:
            changed = True
        state.two_hop[origin] = (reach, hold)
        if me in msg.mprs:
            if origin not in state.mpr_selectors:
                state.ansn += 1
            state.mpr_selectors[origin] = hold
        elif state.mpr_selectors.pop(origin, None) is not None:
            state.ansn += 1
    elif origin in state.two_hop:
        del state.two_hop[origin]
        changed = True
    return changed


def originate_tc(state, now):
    """A TC listing our MPR selectors, or None when we have none."""
    selectors = frozenset(k for k, exp in state.mpr_selectors.items() if exp > now)
    if not selectors:
        return None
    state.msg_seq = (state.msg_seq + 1) % 65536
    return TcMessage(state.node, state.msg_seq, state.ansn, selectors)


def relay_tc(state, tc, sender, now, timers):
    """Process a received TC.

    Returns ``(changed, relay)`` where ``relay`` is the message to rebroadcast
    (or None). Only the MPRs of ``sender`` relay, and each (origin, seq) at
    most once.
    """
    if tc.origin == state.node:
        return False, None
    sym = state.links.get(sender)
    if sym is None or sym[1] <= now:
        return False, None
    key = (tc.origin, tc.seq)
    if key in state.duplicates:
        return False, None
    state.duplicates[key] = (now + timers.duplicate_hold, False)
    changed = False
    stale = any(last == tc.origin and ansn > tc.ansn
                for (_, last), (ansn, _) in state.topology.items())
    if not stale:
        for k in [k for k, (ansn, _) in state.topology.items() if k[1] == tc.origin and ansn < tc.ansn]:
            del state.topology[k]
            changed = True
        expiry = now + timers.topology_hold
        for dest in tc.advertised:
            k = (dest, tc.origin)
            if k not in state.topology:
                changed = True
            state.topology[k] = (tc.ansn, expiry)
    relay = None
    selected = state.mpr_selectors.get(sender, 0) > now
    if selected and tc.ttl > 1:
        state.duplicates[key] = (now + timers.duplicate_hold, True)
        relay = tc.relayed()
    return changed, relay


def refresh(state, now):
    """Purge expired tuples, reselect MPRs and recompute routes."""
    state.purge(now)
    nbrs = state.sym_neighbors(now)
    two = {n: reach for n, (reach, exp) in state.two_hop.items() if n in nbrs and exp > now}
    state.mpr_set = select_mprs(nbrs, two, state.node)
    topo = [k for k, (_, exp) in state.topology.items() if exp > now]
    state.routes = compute_routes(state.node, nbrs, two, topo)
    state.version += 1
    return state.routes
