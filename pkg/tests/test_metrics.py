import csv

import pytest
from hypothesis import given, strategies as st

from adhocsim.engine import MS, S
from adhocsim.metrics import (AGGREGATE_COLUMNS, RUN_COLUMNS, FrameCounter, MetricsRecord,
                              aggregate_seeds, completion_fraction, goodput, loss_rate,
                              retrieval_delay, summarize, write_aggregate_csv, write_run_csv)
from adhocsim.radio import Frame, FrameKind, RadioConfig, ReceptionOutcome, Status


def full_file(last_rx):
    rec = MetricsRecord("consumer1", 0, 1000, 1040)
    for c in range(1000):
        rec.expressed(c, 0)
        rec.delivered(c, last_rx if c == 999 else S, 3)
    return rec


def test_goodput_full_file_100s():
    rec = full_file(100 * S)
    assert rec.rx_bytes == 1_040_000
    assert goodput(rec) == 83_200.0


def test_goodput_halves_with_doubled_span():
    assert goodput(full_file(200 * S)) == 41_600.0


def test_goodput_undefined_is_zero():
    rec = MetricsRecord("f", 0, 10, 1040)
    assert goodput(rec) == 0.0
    rec.expressed(0, 0)
    assert goodput(rec) == 0.0


def test_goodput_span_starts_at_first_transmission():
    rec = MetricsRecord("f", 0, 2, 1000)
    rec.time_first_tx = 0
    rec.expressed(0, 5 * S)
    rec.delivered(0, 10 * S, 1)
    assert goodput(rec) == 1000 * 8 / 10


def test_retrieval_delay_anchored_at_first_expression():
    rec = MetricsRecord("f", 0, 1, 1040)
    rec.expressed(0, 1 * S)
    rec.expressed(0, 4 * S)
    rec.delivered(0, int(4.3 * S), 2)
    assert retrieval_delay(rec, 0) == pytest.approx(3.3)
    assert rec.chunks[0].tx_attempts == 2
    assert rec.chunks[0].retries == 1


def test_delay_at_least_one_hop_airtime():
    airtime = RadioConfig().airtime(1040 + 48)
    assert airtime == pytest.approx(8.896 * MS)


def test_undelivered_delay_is_none_and_duplicate_ignored():
    rec = MetricsRecord("f", 0, 2, 1040)
    rec.expressed(0, 0)
    assert retrieval_delay(rec, 0) is None
    assert rec.delivered(0, S, 1)
    assert not rec.delivered(0, 2 * S, 1)
    assert rec.rx_bytes == 1040
    assert completion_fraction(rec) == 0.5
    with pytest.raises(KeyError):
        rec.delivered(1, S, 1)


@pytest.mark.parametrize("lost,sent,rate", [(0, 10, 0.0), (25, 100, 0.25)])
def test_loss_rate(lost, sent, rate):
    rec = MetricsRecord("f", 0, 1, 1040, p_sent=sent, p_loss=lost)
    assert loss_rate(rec) == rate


def test_loss_rate_undefined_without_frames():
    assert loss_rate(MetricsRecord("f", 0, 1, 1040)) is None


def outcome(receiver, status):
    return ReceptionOutcome(receiver, status, -60.0)


def test_frame_counter_data_plane_only_by_default():
    c = FrameCounter()
    data = Frame(0, 100, FrameKind.NDN_DATA, None)
    ctrl = Frame(0, 60, FrameKind.OLSR_CONTROL, None)
    c(data, [outcome(1, Status.COLLIDED)])
    c(data, [outcome(1, Status.DELIVERED)])
    c(ctrl, [outcome(1, Status.COLLIDED)])
    assert (c.p_sent, c.p_loss) == (2, 1)
    assert (c.control_sent, c.control_lost) == (1, 1)
    both = FrameCounter(include_control=True)
    both(ctrl, [outcome(1, Status.COLLIDED)])
    assert (both.p_sent, both.p_loss) == (1, 1)


def test_aggregate_examples():
    runs = [{"x": 1.0}, {"x": 2.0}, {"x": 3.0}]
    a = aggregate_seeds(runs)["x"]
    assert (a.mean, a.min, a.max, a.n_runs) == (2.0, 1.0, 3.0, 3)
    single = aggregate_seeds([{"x": 5.0}])["x"]
    assert single.mean == single.min == single.max == 5.0
    with pytest.raises(ValueError):
        aggregate_seeds([])


def test_aggregate_skips_undefined():
    a = aggregate_seeds([{"x": None, "y": 1}, {"x": 4.0, "y": 3}])
    assert a["x"].n_runs == 1 and a["x"].mean == 4.0
    assert a["y"].mean == 2


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=20))
def test_aggregate_identical_and_ordered(values):
    a = aggregate_seeds([{"m": v} for v in values])["m"]
    assert a.min <= a.mean + 1e-6 and a.mean <= a.max + 1e-6
    same = aggregate_seeds([{"m": values[0]}] * 3)["m"]
    assert same.mean == same.min == same.max


@given(st.integers(0, 10 * S), st.lists(st.integers(1, 5 * S), max_size=5), st.integers(0, 5 * S))
def test_first_anchor_never_shorter_than_last(first, gaps, extra):
    rec = MetricsRecord("f", 0, 1, 1040)
    t = first
    rec.expressed(0, t)
    for g in gaps:
        t += g
        rec.expressed(0, t)
    rec.delivered(0, t + extra, 1)
    assert retrieval_delay(rec, 0) >= (t + extra - rec.chunks[0].last_expressed_at) / S


def test_summary_fields():
    rec = full_file(100 * S)
    rec.p_sent, rec.p_loss = 4, 1
    s = summarize(rec)
    assert s["goodputBps"] == 83_200.0
    assert s["lossRate"] == 0.25
    assert s["completionFraction"] == 1.0
    assert s["meanHopCount"] == 3
    assert s["meanTxAttempts"] == 1 and s["meanRetries"] == 0


def test_run_csv_layout(tmp_path):
    rec = MetricsRecord("consumer1", 0, 2, 1040)
    rec.expressed(0, 11 * S)
    rec.delivered(0, 12 * S, 4)
    path = tmp_path / "run.csv"
    write_run_csv(path, [rec], epoch=10 * S)
    rows = list(csv.reader(open(path)))
    assert tuple(rows[0]) == RUN_COLUMNS
    assert rows[0][:9] == ["record", "flow", "chunkId", "firstExpressedAt", "deliveredAt",
                           "delay", "hopCount", "txAttempts", "retries"]
    chunk = dict(zip(rows[0], rows[1]))
    assert chunk["firstExpressedAt"] == "1.000000000"
    assert chunk["delay"] == "1.000000000"
    summary = dict(zip(rows[0], rows[2]))
    assert summary["record"] == "summary"
    assert summary["rxBytes"] == "1040"
    assert summary["lossRate"] == ""


def test_aggregate_csv_layout(tmp_path):
    path = tmp_path / "agg.csv"
    write_aggregate_csv(path, aggregate_seeds([{"m": 1.0}, {"m": 3.0}]))
    rows = list(csv.reader(open(path)))
    assert tuple(rows[0]) == AGGREGATE_COLUMNS
    assert rows[1] == ["m", "2.0", "1.0", "3.0", "2"]
