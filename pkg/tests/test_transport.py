import pytest
from hypothesis import given, settings, strategies as st

from adhocsim.engine import MS, S, RngStreams, Simulator
from adhocsim.metrics import MetricsRecord
from adhocsim.mobility import StaticMobility
from adhocsim.olsr import (ConstantRateSender, IpPacket, OlsrNode, OlsrTimers, ReliableSender,
                           RenoState, Segment, SegmentKind, TransportEvent, TransportReceiver,
                           reliable_send)
from adhocsim.radio import Mac, Medium, RadioConfig
from adhocsim.rtt import RttEstimator


def test_slow_start_first_ack_doubles_window():
    r = RenoState(100)
    assert r.window_sends() == [0]
    event, sends = r.on_ack(1)
    assert event is TransportEvent.ACK
    assert r.cwnd == 2
    assert sends == [1, 2]


def test_timeout_halves_ssthresh_and_resets_window():
    r = RenoState(100)
    r.cwnd = 8
    r.window_sends()
    assert reliable_send(r, TransportEvent.TIMEOUT) == [0]
    assert r.ssthresh == 4
    assert r.cwnd == 1


def test_ssthresh_floor_is_two():
    r = RenoState(100)
    r.on_timeout()
    assert r.ssthresh == 2


def test_congestion_avoidance_grows_by_one_over_cwnd():
    r = RenoState(100, initial_ssthresh=2, initial_cwnd=4)
    r.window_sends()
    r.on_ack(1)
    assert r.cwnd == pytest.approx(4.25)


def test_three_dupacks_fast_retransmit():
    r = RenoState(100, initial_cwnd=8)
    r.window_sends()
    r.on_ack(2)
    events = [r.on_ack(2)[0] for _ in range(3)]
    assert events[:2] == [None, None]
    assert events[2] is TransportEvent.DUP_ACK3
    assert r.cwnd == r.ssthresh == 4.5


def test_reliable_send_events():
    r = RenoState(10)
    r.window_sends()
    assert reliable_send(r, TransportEvent.ACK) == [1, 2]
    with pytest.raises(ValueError):
        reliable_send(r, "bogus")


@settings(max_examples=200, deadline=None)
@given(st.lists(st.one_of(st.integers(0, 60), st.just(-1)), max_size=100))
def test_window_invariants(acks):
    r = RenoState(50)
    r.window_sends()
    for a in acks:
        if a < 0:
            r.on_timeout()
        else:
            r.on_ack(a)
        assert 0 <= r.snd_una <= r.snd_nxt <= r.n
        assert r.cwnd >= 1 and r.ssthresh >= 2


def test_constant_rate_gap():
    sim = Simulator()

    class Node:
        node = 0
        transports = {}

        def __init__(self):
            self.sent = []

        def send(self, packet):
            self.sent.append((sim.now, packet.segment.seq))
            return True

    node = Node()
    rec = MetricsRecord("f", 1, 5, 1040)
    tx = ConstantRateSender(sim, node, "f", 1, rec, 200_000, 5, 1040)
    assert tx.gap == int(41.6 * MS)
    tx.start()
    sim.run_until(S)
    assert [t for t, _ in node.sent] == [i * int(41.6 * MS) for i in range(5)]
    assert tx.finished_at == 4 * tx.gap


class Loopback:
    """Transport endpoint stub that hands packets straight to a peer."""

    def __init__(self, sim, node_id):
        self.sim = sim
        self.node = node_id
        self.transports = {}
        self.peer = None
        self.drop = set()
        self.sent = []

    def send(self, packet):
        self.sent.append(packet)
        key = (packet.segment.kind, packet.segment.seq)
        if key in self.drop:
            self.drop.discard(key)
            return True
        self.sim.schedule(10 * MS, self.peer.deliver, packet.hopped())
        return True

    def deliver(self, packet):
        self.transports[packet.segment.flow].on_segment(packet)


def loopback_pair(n=20, drop=()):
    sim = Simulator()
    prod, cons = Loopback(sim, 1), Loopback(sim, 0)
    prod.peer, cons.peer = cons, prod
    prod.drop = set(drop)
    rec = MetricsRecord("f", 0, n, 1040)
    tx = ReliableSender(sim, prod, "f", 0, rec, RttEstimator(), n, 1040)
    rx = TransportReceiver(sim, cons, "f", 1, rec, True, RttEstimator())
    return sim, tx, rx, rec, prod


def test_reliable_transfer_completes_in_order():
    sim, tx, rx, rec, _ = loopback_pair(20)
    sim.schedule_at(0, rx.start)
    sim.run_until(10 * S)
    assert rx.complete and tx.reno.done
    assert rec.time_first_tx == 0
    assert tx.timeouts == 0


def test_lost_segment_recovered_without_duplicates():
    sim, tx, rx, rec, prod = loopback_pair(20, drop={(SegmentKind.DATA, 3)})
    sim.schedule_at(0, rx.start)
    sim.run_until(30 * S)
    assert rx.complete
    assert rec.delivered_count == 20
    assert rec.chunks[3].tx_attempts == 2
    assert tx.fast_retransmits + tx.timeouts >= 1
    data_sent = [p.segment.seq for p in prod.sent if p.segment.kind is SegmentKind.DATA]
    assert data_sent.count(3) == 2


def test_rtt_not_sampled_across_retransmission():
    sim, tx, rx, rec, prod = loopback_pair(1, drop={(SegmentKind.DATA, 0)})
    sim.schedule_at(0, rx.start)
    sim.run_until(10 * S)
    assert rx.complete
    assert tx.rtt.srtt is None


def test_request_retried_until_data_arrives():
    sim = Simulator()
    cons = Loopback(sim, 0)

    class Silent:
        def deliver(self, packet):
            pass

    cons.peer = Silent()
    rec = MetricsRecord("f", 0, 5, 1040)
    rx = TransportReceiver(sim, cons, "f", 1, rec, True, RttEstimator())
    sim.schedule_at(0, rx.start)
    sim.run_until(8 * S)
    # request at 0, then backoff 1 s, 2 s, 4 s
    assert rx.requests == 4
    assert all(p.segment.kind is SegmentKind.REQUEST for p in cons.sent)


def test_receiver_acks_cumulatively():
    sim = Simulator()
    cons = Loopback(sim, 0)
    cons.peer = Loopback(sim, 1)
    cons.peer.transports = {}
    rec = MetricsRecord("f", 0, 5, 1040)
    rx = TransportReceiver(sim, cons, "f", 1, rec, True)
    for seq in (0, 2, 1, 1):
        rec.expressed(seq, 0)
        rx.on_segment(IpPacket(1, 0, Segment("f", SegmentKind.DATA, seq, 1040), hops=2))
    acks = [p.segment.seq for p in cons.sent if p.segment.kind is SegmentKind.ACK]
    assert acks == [1, 1, 3, 3]
    assert rec.delivered_count == 3


def test_tcp_over_olsr_chain():
    positions = [(100 * i, 0) for i in range(4)]
    sim = Simulator()
    med = Medium(sim, RadioConfig(), StaticMobility(positions), 4)
    rngs = RngStreams(1)
    nodes = [OlsrNode(i, sim, Mac(i, med, rngs[f"mac/{i}"]), OlsrTimers(), rngs[f"olsr/{i}"])
             for i in range(4)]
    for n in nodes:
        n.start()
    rec = MetricsRecord("f", 0, 30, 1040)
    ReliableSender(sim, nodes[3], "f", 0, rec, RttEstimator(), 30, 1040)
    rx = TransportReceiver(sim, nodes[0], "f", 3, rec, True, RttEstimator())
    sim.schedule_at(20 * S, rx.start)
    sim.run_until(60 * S)
    assert rx.complete
    assert {c.hop_count for c in rec.chunks.values()} == {3}


def test_no_route_drops_packet():
    sim = Simulator()
    med = Medium(sim, RadioConfig(), StaticMobility([(0, 0), (500, 0)]), 2)
    node = OlsrNode(0, sim, Mac(0, med, RngStreams(1)["mac/0"]))
    assert not node.send(IpPacket(0, 1, Segment("f", SegmentKind.REQUEST)))
    assert node.stats["noroute"] == 1
