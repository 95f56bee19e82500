"""Per-node OLSR agent: HELLO/TC timers, control processing and hop-by-hop
forwarding of transport packets along the current route table."""

from ..radio import Frame, FrameKind
from . import protocol
from .protocol import HelloMessage, OlsrState, OlsrTimers, TcMessage


class OlsrNode:
    def __init__(self, node_id, sim, mac, timers=None, rng=None, header_bytes=48,
                 log=None, check_mprs=False):
        self.node = node_id
        self.sim = sim
        self.mac = mac
        self.timers = timers or OlsrTimers()
        self.rng = rng
        self.header_bytes = header_bytes
        self.log = log
        self.check_mprs = check_mprs
        self.state = OlsrState(node_id)
        self.transports = {}
        self._dirty = True
        self._valid_until = 0
        self.stats = dict.fromkeys(
            ("hello_sent", "tc_sent", "tc_relayed", "forwarded", "noroute", "ttl_expired",
             "delivered"), 0)
        mac.medium.attach(node_id, self.on_frame)

    # -- timers -------------------------------------------------------------

    def _jitter(self, interval):
        if self.rng is None:
            return 0
        return int(self.rng.integers(0, max(interval // 4, 1)))

    def start(self):
        t = self.timers
        self.sim.schedule(self._jitter(t.hello_interval), self._hello_timer)
        self.sim.schedule(t.hello_interval + self._jitter(t.tc_interval), self._tc_timer)

    def _hello_timer(self):
        self._broadcast(protocol.emit_hello(self.state, self.sim.now))
        self.stats["hello_sent"] += 1
        t = self.timers.hello_interval
        self.sim.schedule(t - self._jitter(t), self._hello_timer)

    def _tc_timer(self):
        self.routes()
        tc = protocol.originate_tc(self.state, self.sim.now)
        if tc is not None:
            self.state.duplicates[(tc.origin, tc.seq)] = (
                self.sim.now + self.timers.duplicate_hold, True)
            self._broadcast(tc)
            self.stats["tc_sent"] += 1
        t = self.timers.tc_interval
        self.sim.schedule(t - self._jitter(t), self._tc_timer)

    def _broadcast(self, msg):
        frame = Frame(self.node, msg.size_bytes() + self.header_bytes, FrameKind.OLSR_CONTROL, msg)
        self.mac.enqueue(frame)

    # -- state --------------------------------------------------------------

    def _next_expiry(self):
        st = self.state
        now = self.sim.now
        times = [x for link in st.links.values() for x in link if x > now]
        times += [exp for _, exp in st.two_hop.values()]
        times += [exp for _, exp in st.topology.values()]
        return min(times, default=now + self.timers.neighbor_hold)

    def routes(self):
        """Current route table, recomputed when state changed or expired."""
        now = self.sim.now
        if self._dirty or now >= self._valid_until:
            protocol.refresh(self.state, now)
            if self.check_mprs:
                st = self.state
                nbrs = st.sym_neighbors(now)
                two = {n: r for n, (r, _) in st.two_hop.items() if n in nbrs}
                assert protocol.covers_all(nbrs, two, st.mpr_set, self.node)
            self._dirty = False
            self._valid_until = self._next_expiry()
        return self.state.routes

    def next_hop(self, dst):
        route = self.routes().get(dst)
        return None if route is None else route[0]

    # -- frames -------------------------------------------------------------

    def on_frame(self, frame, outcome):
        kind = frame.kind
        if kind is FrameKind.OLSR_CONTROL:
            msg = frame.inner
            now = self.sim.now
            if isinstance(msg, HelloMessage):
                if protocol.process_hello(self.state, msg, now, self.timers):
                    self._dirty = True
            elif isinstance(msg, TcMessage):
                self.routes()
                changed, relay = protocol.relay_tc(self.state, msg, frame.src, now, self.timers)
                if changed:
                    self._dirty = True
                if relay is not None:
                    self.stats["tc_relayed"] += 1
                    self.sim.schedule(self._jitter(self.timers.hello_interval),
                                      self._broadcast, relay)
        elif kind is FrameKind.TRANSPORT_SEGMENT and frame.target == self.node:
            packet = frame.inner.hopped()
            if packet.dst == self.node:
                self.stats["delivered"] += 1
                t = self.transports.get(packet.segment.flow)
                if t is not None:
                    t.on_segment(packet)
            elif packet.ttl <= 0:
                self.stats["ttl_expired"] += 1
            else:
                self.stats["forwarded"] += 1
                self.send(packet)

    def send(self, packet):
        """Route ``packet`` one hop towards its destination; False if there is
        no route (the packet is dropped here)."""
        nh = self.next_hop(packet.dst)
        if nh is None:
            self.stats["noroute"] += 1
            if self.log is not None:
                self.log.add("noroute", self.sim.now, self.node, packet.dst)
            return False
        nbytes = packet.segment.payload_bytes + self.header_bytes
        frame = Frame(self.node, nbytes, FrameKind.TRANSPORT_SEGMENT, packet, target=nh)
        return self.mac.enqueue(frame)
