import pytest

from adhocsim.eventlog import EventLog, read_ndjson, replay, route_stalls
from adhocsim.scenario import build_scenario, preset_config

SMALL = {"fileChunks": 30, "simDurationS": 200.0}


@pytest.fixture(scope="module", params=["ndn", "olsr-tcp", "olsr-udp"])
def run(request):
    cfg = preset_config("controlledGrid", request.param, 5, **SMALL)
    inst = build_scenario(cfg, 2, log_events=True)
    return inst, inst.run()


def test_replay_is_bit_exact(run):
    _, res = run
    rp = replay(res.log.records)
    assert rp["pSent"] == res.counters["pSent"]
    assert rp["pLoss"] == res.counters["pLoss"]
    for flow, s in res.summaries.items():
        f = rp["flows"][flow]
        assert f["goodputBps"] == s["goodputBps"]
        assert f["meanDelay"] == s["meanDelay"]
        assert f["rxBytes"] == s["rxBytes"]
        assert f["completionFraction"] == s["completionFraction"]
        assert rp["lossRate"] == s["lossRate"]


def test_replay_hops_match_records(run):
    _, res = run
    rp = replay(res.log.records)
    for rec in res.records:
        hops = rp["flows"][rec.flow]["hops"]
        assert hops == {c: r.hop_count for c, r in rec.chunks.items()
                        if r.delivered_at is not None}


def test_ndjson_round_trip(run, tmp_path):
    _, res = run
    path = tmp_path / "events.ndjson"
    res.log.write_ndjson(path)
    assert read_ndjson(path) == res.log.records
    assert replay(read_ndjson(path)) == replay(res.log.records)


def test_replay_with_control_frames(run):
    inst, res = run
    rp = replay(res.log.records, include_control=True)
    assert rp["pSent"] == res.counters["pSent"] + res.counters["controlSent"]


def test_replay_loss_rule_by_hand():
    log = EventLog()
    log.records += [
        ("tx", 0, 0, 1, "NdnData", -1, 100, 10),
        ("rx", 10, 1, 1, "Delivered"),
        ("rx", 10, 2, 1, "Collided"),
        ("tx", 20, 0, 2, "TransportSegment", 1, 100, 30),
        ("rx", 30, 1, 2, "Delivered"),
        ("tx", 40, 0, 3, "TransportSegment", 2, 100, 50),
        ("rx", 50, 1, 3, "Delivered"),
        ("drop", 60, 0, 4, "NdnInterest", -1),
        ("tx", 70, 0, 5, "OlsrControl", -1, 40, 80),
    ]
    rp = replay(log.records)
    # broadcast collided at one receiver, unicast missed its target, local drop
    assert (rp["pSent"], rp["pLoss"]) == (4, 3)


def test_route_stalls_from_log():
    records = [
        ("flow", 0, 0, "consumer1", 10, 1040),
        ("flow", 0, 1, "consumer2", 10, 1040),
        ("noroute", 5, 0, 2),
        ("noroute", 6, 0, 2),
        ("deliver", 9, 0, "consumer1", 0, 3),
        ("noroute", 12, 2, 1),
        ("noroute", 13, 7, 2),
    ]
    assert route_stalls(records, producer=2, end=20) == {
        "consumer1": [(5, 9)], "consumer2": [(12, 20)]}
