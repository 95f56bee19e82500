"""Transports carried over OLSR routes: a minimal Reno (cumulative ACKs, slow
start, congestion avoidance, fast retransmit, RTO) and a constant-rate sender.

Either transfer starts when the receiver's request reaches the producer; the
request is retried on a timer until the first segment arrives.
"""

import enum
from dataclasses import dataclass

from ..engine import S


class SegmentKind(enum.Enum):
    REQUEST = "req"
    DATA = "data"
    ACK = "ack"


@dataclass(frozen=True)
class Segment:
    flow: str
    kind: SegmentKind
    seq: int = 0
    payload_bytes: int = 0


@dataclass(frozen=True)
class IpPacket:
    src: int
    dst: int
    segment: Segment
    ttl: int = 64
    hops: int = 0

    def hopped(self):
        return IpPacket(self.src, self.dst, self.segment, self.ttl - 1, self.hops + 1)


class TransportEvent(enum.Enum):
    ACK = "Ack"
    TIMEOUT = "Timeout"
    DUP_ACK3 = "DupAck3"


class RenoState:
    """Congestion window bookkeeping in segments.

    ``snd_una`` is the lowest unacknowledged sequence number and ``snd_nxt``
    the next new one to send.
    """

    def __init__(self, n_segments, initial_ssthresh=64.0, initial_cwnd=1.0):
        self.n = n_segments
        self.cwnd = float(initial_cwnd)
        self.ssthresh = float(initial_ssthresh)
        self.snd_una = 0
        self.snd_nxt = 0
        self.dupacks = 0

    @property
    def in_flight(self):
        return self.snd_nxt - self.snd_una

    @property
    def done(self):
        return self.snd_una >= self.n

    def window_sends(self):
        out = []
        while self.snd_nxt < self.n and self.in_flight < int(self.cwnd):
            out.append(self.snd_nxt)
            self.snd_nxt += 1
        return out

    def on_ack(self, ack):
        """Cumulative ACK meaning "next expected is ``ack``". Returns
        ``(event, sends)``; ``event`` is None for stale or sub-threshold
        duplicate ACKs."""
        if ack > self.snd_una:
            self.snd_una = min(ack, self.n)
            self.snd_nxt = max(self.snd_nxt, self.snd_una)
            self.dupacks = 0
            if self.cwnd < self.ssthresh:
                self.cwnd += 1.0
            else:
                self.cwnd += 1.0 / self.cwnd
            return TransportEvent.ACK, self.window_sends()
        if ack == self.snd_una and self.in_flight > 0:
            self.dupacks += 1
            if self.dupacks == 3:
                self.ssthresh = max(self.cwnd / 2.0, 2.0)
                self.cwnd = self.ssthresh
                return TransportEvent.DUP_ACK3, [self.snd_una] + self.window_sends()
        return None, []

    def on_timeout(self):
        self.ssthresh = max(self.cwnd / 2.0, 2.0)
        self.cwnd = 1.0
        self.dupacks = 0
        if self.done:
            return []
        self.snd_nxt = self.snd_una + 1
        return [self.snd_una]


def reliable_send(flow, event, ack=None):
    """Apply one transport event to ``flow`` (a RenoState) and return the
    sequence numbers to transmit."""
    if event is TransportEvent.TIMEOUT:
        return flow.on_timeout()
    if event is TransportEvent.DUP_ACK3:
        flow.ssthresh = max(flow.cwnd / 2.0, 2.0)
        flow.cwnd = flow.ssthresh
        flow.dupacks = 0
        return [flow.snd_una] + flow.window_sends()
    if event is TransportEvent.ACK:
        if ack is None:
            ack = flow.snd_una + 1
        return flow.on_ack(ack)[1]
    raise ValueError(f"unknown transport event {event!r}")


class _Sender:
    def __init__(self, sim, node, flow, dst, record, n_segments, payload_bytes, log):
        self.sim = sim
        self.node = node
        self.flow = flow
        self.dst = dst
        self.record = record
        self.n = n_segments
        self.payload_bytes = payload_bytes
        self.log = log
        self.started = False
        node.transports[flow] = self

    def _send(self, seq):
        now = self.sim.now
        rec = self.record.expressed(seq, now)
        if self.log is not None:
            self.log.add("express", now, self.node.node, self.flow, seq, rec.tx_attempts)
        seg = Segment(self.flow, SegmentKind.DATA, seq, self.payload_bytes)
        return self.node.send(IpPacket(self.node.node, self.dst, seg))

    def on_segment(self, packet):
        seg = packet.segment
        if seg.kind is SegmentKind.REQUEST:
            if not self.started:
                self.started = True
                self.start()
        elif seg.kind is SegmentKind.ACK:
            self.on_ack(seg.seq)

    def on_ack(self, ack):
        pass


class ReliableSender(_Sender):
    """Reno sender. RTT is measured on one segment at a time and the
    measurement is abandoned whenever anything is retransmitted (Karn)."""

    def __init__(self, sim, node, flow, dst, record, rtt, n_segments=1000,
                 payload_bytes=1040, initial_ssthresh=64.0, log=None):
        super().__init__(sim, node, flow, dst, record, n_segments, payload_bytes, log)
        self.rtt = rtt
        self.reno = RenoState(n_segments, initial_ssthresh)
        self.sent_at = {}
        self.retransmitted = set()
        self.timed = None  # (seq, sent_at) of the one segment being timed
        self.timer = None
        self.timeouts = 0
        self.fast_retransmits = 0

    def start(self):
        self._transmit(self.reno.window_sends())

    def _transmit(self, seqs):
        now = self.sim.now
        for seq in seqs:
            if seq in self.sent_at:
                self.retransmitted.add(seq)
                # any retransmission invalidates the sample in progress
                self.timed = None
            elif self.timed is None:
                self.timed = (seq, now)
            self.sent_at[seq] = now
            self._send(seq)
        if seqs and self.timer is None:
            self._arm()

    def _arm(self):
        if self.timer is not None:
            self.sim.cancel(self.timer)
        self.timer = self.sim.schedule(self.rtt.rto, self._timeout)

    def _timeout(self):
        self.timer = None
        if self.reno.done:
            return
        self.timeouts += 1
        self.rtt.backoff()
        self._transmit(self.reno.on_timeout())
        if self.timer is None:
            self._arm()

    def on_ack(self, ack):
        reno = self.reno
        if self.timed is not None and ack > self.timed[0]:
            self.rtt.sample(self.sim.now - self.timed[1])
            self.timed = None
        event, seqs = reno.on_ack(ack)
        if event is TransportEvent.DUP_ACK3:
            self.fast_retransmits += 1
            self.retransmitted.add(reno.snd_una)
        if event is TransportEvent.ACK:
            if reno.done:
                if self.timer is not None:
                    self.sim.cancel(self.timer)
                    self.timer = None
                return
            self._arm()
        if seqs:
            self._transmit(seqs)


class ConstantRateSender(_Sender):
    """Sends every segment once, ``segment_bits / rate`` apart, never
    adapting to losses."""

    def __init__(self, sim, node, flow, dst, record, rate_bps=200_000, n_segments=1000,
                 payload_bytes=1040, log=None):
        super().__init__(sim, node, flow, dst, record, n_segments, payload_bytes, log)
        if rate_bps <= 0:
            raise ValueError("rate_bps must be positive")
        self.rate_bps = rate_bps
        self.gap = int(round(payload_bytes * 8 * S / rate_bps))
        self.next_seq = 0
        self.finished_at = None
        self.on_finished = None

    def start(self):
        self._tick()

    def _tick(self):
        self._send(self.next_seq)
        self.next_seq += 1
        if self.next_seq < self.n:
            self.sim.schedule(self.gap, self._tick)
        else:
            self.finished_at = self.sim.now
            if self.on_finished is not None:
                self.on_finished(self)


class TransportReceiver:
    """Consumer end: asks for the file, records first receipt of each
    segment and (for reliable flows) returns cumulative ACKs."""

    def __init__(self, sim, node, flow, src, record, reliable=True, request_rtt=None,
                 log=None, on_complete=None):
        self.sim = sim
        self.node = node
        self.flow = flow
        self.src = src
        self.record = record
        self.reliable = reliable
        self.request_rtt = request_rtt
        self.log = log
        self.on_complete = on_complete
        self.received = set()
        self.rcv_next = 0
        self.requests = 0
        self._request_timer = None
        node.transports[flow] = self

    @property
    def complete(self):
        return len(self.received) >= self.record.n_chunks

    def start(self):
        if self.log is not None:
            self.log.add("flow", self.sim.now, self.node.node, self.flow,
                         self.record.n_chunks, self.record.payload_bytes)
        self.record.time_first_tx = self.sim.now
        self._request()

    def _request(self):
        self._request_timer = None
        if self.received:
            return
        self.requests += 1
        if self.log is not None:
            self.log.add("request", self.sim.now, self.node.node, self.flow)
        seg = Segment(self.flow, SegmentKind.REQUEST)
        self.node.send(IpPacket(self.node.node, self.src, seg))
        delay = S if self.request_rtt is None else self.request_rtt.rto
        if self.request_rtt is not None:
            self.request_rtt.backoff()
        self._request_timer = self.sim.schedule(delay, self._request)

    def on_segment(self, packet):
        seg = packet.segment
        if seg.kind is not SegmentKind.DATA:
            return
        if self._request_timer is not None:
            self.sim.cancel(self._request_timer)
            self._request_timer = None
        now = self.sim.now
        if seg.seq not in self.received:
            self.received.add(seg.seq)
            self.record.delivered(seg.seq, now, packet.hops)
            if self.log is not None:
                self.log.add("deliver", now, self.node.node, self.flow, seg.seq, packet.hops)
            while self.rcv_next in self.received:
                self.rcv_next += 1
        if self.reliable:
            ack = Segment(self.flow, SegmentKind.ACK, self.rcv_next)
            self.node.send(IpPacket(self.node.node, self.src, ack))
        if self.complete and self.on_complete is not None:
            cb, self.on_complete = self.on_complete, None
            cb(self)
