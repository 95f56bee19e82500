import math

import pytest
from hypothesis import given, settings, strategies as st

from adhocsim.engine import MS, S, US, RngStreams, Simulator
from adhocsim.mobility import StaticMobility
from adhocsim.radio import (Frame, FrameKind, Mac, Medium, RadioConfig, Status, frame_lost,
                            friis_rx_power)

C = 299_792_458.0


def hand_friis(tx, d, f, loss):
    # free-space path loss written out independently: (4*pi*d*f/c)^2 in dB
    ratio = 4.0 * math.pi * d * f / C
    return tx - 10.0 * math.log10(ratio * ratio) - loss


@pytest.mark.parametrize("d", [1.0, 100.0, 300.0])
def test_friis_closed_form(d):
    cfg = RadioConfig()
    got = friis_rx_power(5.0, d, cfg)
    assert abs(got - hand_friis(5.0, d, 2.412e9, 4.2)) < 1e-9


def test_friis_100m_no_loss():
    cfg = RadioConfig(system_loss_db=0.0)
    assert friis_rx_power(5.0, 100.0, cfg) == pytest.approx(-75.095, abs=0.01)


def test_doubling_distance_costs_6db():
    cfg = RadioConfig()
    drop = friis_rx_power(5, 50, cfg) - friis_rx_power(5, 100, cfg)
    assert drop == pytest.approx(20 * math.log10(2), abs=1e-12)


def test_friis_rejects_nonpositive_distance():
    with pytest.raises(ValueError):
        friis_rx_power(5, 0, RadioConfig())


def test_range_just_over_100m():
    r = RadioConfig().range_m()
    assert 100 < r < 120
    assert r == pytest.approx(109, abs=1)
    cfg = RadioConfig()
    assert friis_rx_power(5, r - 0.01, cfg) > -80 > friis_rx_power(5, r + 0.01, cfg)


def test_airtime():
    cfg = RadioConfig()
    assert cfg.airtime(1088) == 192 * US + 8704 * US
    assert cfg.airtime(1088) == pytest.approx(8.896 * MS)


def test_config_validation():
    with pytest.raises(ValueError):
        RadioConfig(channel_bps=0)
    with pytest.raises(ValueError):
        RadioConfig(system_loss_db=-1)


def make_medium(positions, **kw):
    sim = Simulator()
    cfg = RadioConfig(**kw)
    med = Medium(sim, cfg, StaticMobility(positions), len(positions))
    got = {i: [] for i in range(len(positions))}
    for i in range(len(positions)):
        med.attach(i, lambda f, o, i=i: got[i].append(f))
    return sim, med, got


def statuses(outcomes):
    return {o.receiver: o.status for o in outcomes}


def test_single_frame_delivered_and_out_of_range():
    sim, med, got = make_medium([(0, 0), (100, 0), (300, 0)])
    out = med.transmit(0, Frame(0, 100, FrameKind.NDN_INTEREST))
    sim.run_until(S)
    st_ = statuses(out)
    assert st_ == {1: Status.DELIVERED, 2: Status.BELOW_SENSITIVITY}
    assert len(got[1]) == 1 and got[2] == []


def test_simultaneous_frames_collide():
    sim, med, got = make_medium([(0, 0), (100, 0), (200, 0)])
    a = med.transmit(0, Frame(0, 100, FrameKind.NDN_DATA))
    b = med.transmit(2, Frame(2, 100, FrameKind.NDN_DATA))
    sim.run_until(S)
    assert statuses(a)[1] is Status.COLLIDED
    assert statuses(b)[1] is Status.COLLIDED
    assert got[1] == []


def test_locked_frame_survives_equal_power_late_interferer():
    sim, med, got = make_medium([(0, 0), (100, 0), (200, 0)])
    a = med.transmit(0, Frame(0, 1000, FrameKind.NDN_DATA))
    sim.run_until(MS)
    b = med.transmit(2, Frame(2, 1000, FrameKind.NDN_DATA))
    sim.run_until(S)
    assert statuses(a)[1] is Status.DELIVERED
    assert statuses(b)[1] is Status.COLLIDED


def test_strict_mode_overlap_destroys_both():
    sim, med, got = make_medium([(0, 0), (100, 0), (200, 0)], capture_threshold_db=None)
    a = med.transmit(0, Frame(0, 1000, FrameKind.NDN_DATA))
    sim.run_until(MS)
    b = med.transmit(2, Frame(2, 1000, FrameKind.NDN_DATA))
    sim.run_until(S)
    assert statuses(a)[1] is Status.COLLIDED
    assert statuses(b)[1] is Status.COLLIDED


def test_stronger_late_interferer_breaks_lock():
    # receiver 1 at 100 m from node 0, 30 m from node 2
    sim, med, got = make_medium([(0, 0), (100, 0), (130, 0)])
    a = med.transmit(0, Frame(0, 1000, FrameKind.NDN_DATA))
    sim.run_until(MS)
    med.transmit(2, Frame(2, 1000, FrameKind.NDN_DATA))
    sim.run_until(S)
    assert statuses(a)[1] is Status.COLLIDED


def test_receiver_transmitting_is_collided():
    sim, med, got = make_medium([(0, 0), (100, 0)])
    med.transmit(1, Frame(1, 1000, FrameKind.NDN_DATA))
    a = med.transmit(0, Frame(0, 100, FrameKind.NDN_DATA))
    sim.run_until(S)
    assert statuses(a)[1] is Status.COLLIDED


def test_tx_local_busy():
    sim, med, got = make_medium([(0, 0), (100, 0)])
    med.transmit(0, Frame(0, 1000, FrameKind.NDN_DATA))
    f = Frame(0, 10, FrameKind.NDN_DATA)
    out = med.transmit(0, f)
    assert all(o.status is Status.TX_LOCAL_BUSY for o in out)
    assert frame_lost(f, out)


def test_carrier_busy():
    sim, med, got = make_medium([(0, 0), (100, 0), (400, 0), (500, 0)])
    assert not med.carrier_busy(1)
    med.transmit(0, Frame(0, 1000, FrameKind.NDN_DATA))
    med.transmit(3, Frame(3, 1000, FrameKind.NDN_DATA))
    assert med.carrier_busy(1)
    # node 3's transmitter at 500 m is below sensitivity at node 0's side
    assert not med.carrier_busy(0) or med.transmitting(0)
    sim.run_until(S)
    assert not med.carrier_busy(1)


def test_unicast_loss_rule():
    sim, med, got = make_medium([(0, 0), (100, 0), (0, 100)])
    f = Frame(0, 100, FrameKind.TRANSPORT_SEGMENT, target=1)
    out = med.transmit(0, f)
    sim.run_until(S)
    assert not frame_lost(f, out)
    f2 = Frame(0, 100, FrameKind.TRANSPORT_SEGMENT, target=5)
    out2 = med.transmit(0, f2)
    sim.run_until(2 * S)
    assert frame_lost(f2, out2)


def test_mac_defers_on_busy_channel():
    sim, med, got = make_medium([(0, 0), (100, 0), (200, 0)])
    macs = [Mac(i, med, RngStreams(1)[f"mac/{i}"]) for i in range(3)]
    macs[0].enqueue(Frame(0, 1000, FrameKind.NDN_DATA))
    sim.run_until(US)
    macs[1].enqueue(Frame(1, 1000, FrameKind.NDN_DATA))
    sim.run_until(S)
    assert len(got[1]) == 1 and len(got[0]) == 1 and len(got[2]) == 1


def test_mac_queue_limit():
    sim, med, got = make_medium([(0, 0), (100, 0)], mac_queue_limit=3)
    mac = Mac(0, med, RngStreams(1)["mac/0"])
    results = [mac.enqueue(Frame(0, 100, FrameKind.NDN_DATA)) for _ in range(5)]
    # the first frame goes straight to the air, three more fit in the queue
    assert results.count(False) == 1 and mac.queue_drops == 1


@settings(max_examples=40, deadline=None)
@given(st.floats(1, 2000), st.floats(1, 2000), st.floats(0, 2000), st.floats(0, 2000))
def test_reciprocity(ax, ay, bx, by):
    d = math.hypot(ax - bx, ay - by)
    if d <= 0:
        return
    cfg = RadioConfig()
    sim = Simulator()
    med = Medium(sim, cfg, StaticMobility([(ax, ay), (bx, by)]), 2)
    assert med.rx_powers(0)[1] == pytest.approx(med.rx_powers(1)[0], abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 400), st.integers(0, 400)), min_size=2, max_size=8, unique=True),
       st.lists(st.tuples(st.integers(0, 7), st.integers(0, 3000)), min_size=1, max_size=12))
def test_one_outcome_per_receiver(points, sends):
    sim, med, got = make_medium(points)
    n = len(points)
    results = []

    def fire(src):
        f = Frame(src, 200, FrameKind.NDN_DATA)
        results.append((f, med.transmit(src, f)))

    for src, t in sends:
        sim.schedule(t * US, fire, src % n)
    sim.run_until(S)
    for f, outs in results:
        assert sorted(o.receiver for o in outs) == [i for i in range(n) if i != f.src]
        assert all(o.status is not None for o in outs)
