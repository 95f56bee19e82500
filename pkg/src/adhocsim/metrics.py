"""Per-flow traces and the derived metrics: retrieval delay, hop count,
transmission attempts, goodput and loss rate, plus multi-seed aggregation."""

import csv
import math
from dataclasses import dataclass, field

from .engine import S
from .radio import DATA_PLANE, frame_lost


@dataclass
class ChunkRecord:
    first_expressed_at: int
    delivered_at: int = None
    hop_count: int = None
    tx_attempts: int = 0
    last_expressed_at: int = None

    @property
    def retries(self):
        return max(self.tx_attempts - 1, 0)


@dataclass
class MetricsRecord:
    """Trace of one flow (an NDN consumer or a transport receiver).

    ``p_sent``/``p_loss`` are run-wide frame counters copied in when the run
    finishes; all times are integer nanoseconds of simulator time.
    """

    flow: str
    node: int
    n_chunks: int
    payload_bytes: int
    chunks: dict = field(default_factory=dict)
    rx_bytes: int = 0
    time_first_tx: int = None
    time_last_rx: int = None
    p_sent: int = 0
    p_loss: int = 0

    def expressed(self, chunk, t):
        rec = self.chunks.get(chunk)
        if rec is None:
            rec = self.chunks[chunk] = ChunkRecord(t)
        rec.tx_attempts += 1
        rec.last_expressed_at = t
        if self.time_first_tx is None:
            self.time_first_tx = t
        return rec

    def delivered(self, chunk, t, hops):
        """Record first delivery of ``chunk``; returns False for duplicates."""
        rec = self.chunks.get(chunk)
        if rec is None:
            raise KeyError(f"chunk {chunk} delivered but never expressed")
        if rec.delivered_at is not None:
            return False
        rec.delivered_at = t
        rec.hop_count = hops
        self.rx_bytes += self.payload_bytes
        self.time_last_rx = t
        return True

    @property
    def delivered_count(self):
        return sum(1 for r in self.chunks.values() if r.delivered_at is not None)


def retrieval_delay(record, chunk):
    """Seconds from the first expression of ``chunk`` to its delivery; None if
    it never arrived."""
    rec = record.chunks.get(chunk)
    if rec is None or rec.delivered_at is None:
        return None
    return (rec.delivered_at - rec.first_expressed_at) / S


def goodput(record):
    """Delivered payload bits over (last reception - first transmission)."""
    if record.rx_bytes == 0 or record.time_first_tx is None:
        return 0.0
    span = record.time_last_rx - record.time_first_tx
    if span <= 0:
        return 0.0
    return record.rx_bytes * 8 * S / span


def loss_rate(record):
    if record.p_sent == 0:
        return None
    return record.p_loss / record.p_sent


def completion_fraction(record):
    return record.delivered_count / record.n_chunks


class FrameCounter:
    """Medium listener tallying data-plane frames sent and lost."""

    def __init__(self, include_control=False):
        self.include_control = include_control
        self.p_sent = 0
        self.p_loss = 0
        self.control_sent = 0
        self.control_lost = 0

    def __call__(self, frame, outcomes):
        lost = frame_lost(frame, outcomes)
        if frame.kind in DATA_PLANE or self.include_control:
            self.p_sent += 1
            self.p_loss += lost
        else:
            self.control_sent += 1
            self.control_lost += lost


SUMMARY_METRICS = ("meanDelay", "meanHopCount", "meanTxAttempts", "meanRetries",
                   "goodputBps", "lossRate", "rxBytes", "pSent", "pLoss",
                   "completionFraction")


def summarize(record):
    """Scalar metrics of one flow; entries are None when undefined."""
    done = [r for r in record.chunks.values() if r.delivered_at is not None]
    n = len(done)
    if n:
        delay_ns = sum(r.delivered_at - r.first_expressed_at for r in done)
        mean_delay = delay_ns / (n * S)
        mean_hops = sum(r.hop_count for r in done) / n
        mean_tx = sum(r.tx_attempts for r in done) / n
        mean_retries = sum(r.retries for r in done) / n
    else:
        mean_delay = mean_hops = mean_tx = mean_retries = None
    return {
        "meanDelay": mean_delay,
        "meanHopCount": mean_hops,
        "meanTxAttempts": mean_tx,
        "meanRetries": mean_retries,
        "goodputBps": goodput(record),
        "lossRate": loss_rate(record),
        "rxBytes": record.rx_bytes,
        "pSent": record.p_sent,
        "pLoss": record.p_loss,
        "completionFraction": completion_fraction(record),
    }


@dataclass
class SeedAggregate:
    mean: float
    min: float
    max: float
    n_runs: int


def aggregate_seeds(runs):
    """Mean/min/max per metric across runs (each a mapping metric -> value).

    Undefined (None) values are skipped; ``n_runs`` counts the runs that
    contributed.
    """
    runs = list(runs)
    if not runs:
        raise ValueError("aggregate_seeds needs at least one run")
    keys = []
    for run in runs:
        for k in run:
            if k not in keys:
                keys.append(k)
    out = {}
    for k in keys:
        vals = [run[k] for run in runs if run.get(k) is not None]
        if not vals:
            continue
        lo = min(vals)
        # offsets from the minimum keep mean == min == max for identical runs
        mean = lo + math.fsum(v - lo for v in vals) / len(vals)
        out[k] = SeedAggregate(mean, lo, max(vals), len(vals))
    return out


RUN_COLUMNS = ("record", "flow", "chunkId", "firstExpressedAt", "deliveredAt", "delay",
               "hopCount", "txAttempts", "retries") + SUMMARY_METRICS
AGGREGATE_COLUMNS = ("metric", "mean", "min", "max", "nRuns")


def _t(t_ns, epoch):
    return "" if t_ns is None else f"{(t_ns - epoch) / S:.9f}"


def _v(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def run_rows(records, epoch=0):
    """CSV rows for one run: every chunk of every flow, then one summary row
    per flow. Times are seconds relative to ``epoch``."""
    rows = []
    for rec in records:
        for chunk in sorted(rec.chunks):
            c = rec.chunks[chunk]
            delay = None if c.delivered_at is None else (c.delivered_at - c.first_expressed_at) / S
            rows.append(["chunk", rec.flow, str(chunk), _t(c.first_expressed_at, epoch),
                         _t(c.delivered_at, epoch), "" if delay is None else f"{delay:.9f}",
                         _v(c.hop_count), str(c.tx_attempts), str(c.retries)]
                        + [""] * len(SUMMARY_METRICS))
    for rec in records:
        summary = summarize(rec)
        rows.append(["summary", rec.flow] + [""] * 7 + [_v(summary[k]) for k in SUMMARY_METRICS])
    return rows


def write_run_csv(path, records, epoch=0):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RUN_COLUMNS)
        w.writerows(run_rows(records, epoch))


def write_aggregate_csv(path, aggregate):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AGGREGATE_COLUMNS)
        for metric, agg in aggregate.items():
            w.writerow([metric, repr(float(agg.mean)), repr(float(agg.min)),
                        repr(float(agg.max)), str(agg.n_runs)])


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
