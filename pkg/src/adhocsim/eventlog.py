"""Newline-delimited event log and an independent replayer.

The replayer recomputes goodput, loss rate and per-chunk delays from raw
records only. It deliberately shares no code with ``metrics`` so the two can
be cross-checked.
"""

import json

from .radio import Status

# field names per record kind; the first two fields are always (t, node)
SCHEMA = {
    "tx": ("t", "node", "frame", "frameKind", "target", "bytes", "tEnd"),
    "rx": ("t", "node", "frame", "outcome"),
    "drop": ("t", "node", "frame", "frameKind", "target"),
    "flow": ("t", "node", "flow", "chunks", "payload"),
    "request": ("t", "node", "flow"),
    "express": ("t", "node", "flow", "chunk", "attempt"),
    "deliver": ("t", "node", "flow", "chunk", "hops"),
    "fwd": ("t", "node", "packet", "name", "nonce"),
    "serve": ("t", "node", "name", "source"),
    "noroute": ("t", "node", "dst"),
}

DATA_PLANE_KINDS = ("NdnInterest", "NdnData", "TransportSegment")


class EventLog:
    """In-memory list of ``(kind, t, node, ...)`` tuples."""

    def __init__(self):
        self.records = []

    def add(self, kind, *fields):
        self.records.append((kind,) + fields)

    def on_frame_end(self, frame, outcomes):
        add = self.records.append
        target = -1 if frame.target is None else frame.target
        if outcomes and outcomes[0].status is Status.TX_LOCAL_BUSY:
            add(("drop", frame.tx_start, frame.src, frame.frame_id, frame.kind.value, target))
            return
        add(("tx", frame.tx_start, frame.src, frame.frame_id, frame.kind.value, target,
             frame.payload_bytes, frame.tx_end))
        for o in outcomes:
            if o.status is not Status.BELOW_SENSITIVITY:
                add(("rx", frame.tx_end, o.receiver, frame.frame_id, o.status.value))

    def of_kind(self, kind):
        return [r for r in self.records if r[0] == kind]

    def write_ndjson(self, path):
        with open(path, "w") as fh:
            for rec in self.records:
                fh.write(json.dumps(to_dict(rec), separators=(",", ":")))
                fh.write("\n")


def to_dict(rec):
    kind = rec[0]
    out = {"kind": kind}
    out.update(zip(SCHEMA[kind], rec[1:]))
    return out


def from_dict(d):
    kind = d["kind"]
    return (kind,) + tuple(d[f] for f in SCHEMA[kind])


def read_ndjson(path):
    with open(path) as fh:
        return [from_dict(json.loads(line)) for line in fh if line.strip()]


def replay(records, include_control=False):
    """Recompute flow metrics from raw records.

    Returns ``{"pSent", "pLoss", "lossRate", "flows": {flow: {...}}}``.
    """
    frames = {}
    rx = {}
    dropped = 0
    dropped_counted = 0
    flows = {}
    for rec in records:
        kind = rec[0]
        if kind == "tx":
            _, t, node, fid, fkind, target, nbytes, t_end = rec
            frames[fid] = (fkind, target)
        elif kind == "rx":
            _, t, node, fid, outcome = rec
            rx.setdefault(fid, []).append((node, outcome))
        elif kind == "drop":
            _, t, node, fid, fkind, target = rec
            dropped += 1
            if include_control or fkind in DATA_PLANE_KINDS:
                dropped_counted += 1
        elif kind == "flow":
            _, t, node, flow, n_chunks, payload = rec
            flows[flow] = {"node": node, "n": n_chunks, "payload": payload,
                           "first": {}, "delivered": {}, "attempts": {}, "firstTx": None}
        elif kind == "request":
            _, t, node, flow = rec
            f = flows[flow]
            if f["firstTx"] is None or t < f["firstTx"]:
                f["firstTx"] = t
        elif kind == "express":
            _, t, node, flow, chunk, attempt = rec
            f = flows[flow]
            f["first"].setdefault(chunk, t)
            f["attempts"][chunk] = f["attempts"].get(chunk, 0) + 1
            if f["firstTx"] is None or t < f["firstTx"]:
                f["firstTx"] = t
        elif kind == "deliver":
            _, t, node, flow, chunk, hops = rec
            f = flows[flow]
            if chunk not in f["delivered"]:
                f["delivered"][chunk] = (t, hops)

    sent = dropped_counted
    lost = dropped_counted
    for fid, (fkind, target) in frames.items():
        if not include_control and fkind not in DATA_PLANE_KINDS:
            continue
        sent += 1
        heard = rx.get(fid, [])
        if target != -1:
            ok = any(node == target and outcome == "Delivered" for node, outcome in heard)
            lost += not ok
        else:
            lost += any(outcome == "Collided" for _, outcome in heard)

    result = {"pSent": sent, "pLoss": lost,
              "lossRate": (lost / sent) if sent else None, "flows": {}}
    for flow, f in flows.items():
        delivered = f["delivered"]
        rx_bytes = f["payload"] * len(delivered)
        delays = {c: t - f["first"][c] for c, (t, _) in delivered.items()}
        if delivered:
            last_rx = max(t for t, _ in delivered.values())
            span = last_rx - f["firstTx"]
            gp = rx_bytes * 8 * 1_000_000_000 / span if span > 0 else 0.0
            mean_delay = sum(delays.values()) / (len(delays) * 1_000_000_000)
        else:
            gp = 0.0
            mean_delay = None
        result["flows"][flow] = {
            "rxBytes": rx_bytes,
            "goodputBps": gp,
            "meanDelay": mean_delay,
            "delaysNs": delays,
            "hops": {c: h for c, (_, h) in delivered.items()},
            "txAttempts": dict(f["attempts"]),
            "completionFraction": len(delivered) / f["n"],
        }
    return result


def route_stalls(records, producer, end=None):
    """Intervals during which a flow was stuck for lack of a route.

    A stall opens at a ``noroute`` drop of a packet travelling between the
    producer and a flow's consumer (either direction) and closes at that
    flow's next ``deliver``; stalls still open at the end of the log close at
    ``end`` (or the last record time). Returns ``{flow: [(start, end), ...]}``.
    """
    consumers = {}
    for rec in records:
        if rec[0] == "flow":
            consumers[rec[3]] = rec[2]
    stalls = {flow: [] for flow in consumers}
    open_at = {}
    last_t = 0
    for rec in records:
        kind, t = rec[0], rec[1]
        last_t = max(last_t, t)
        if kind == "noroute":
            _, t, node, dst = rec
            for flow, c in consumers.items():
                towards_consumer = dst == c
                towards_producer = dst == producer and node == c
                if (towards_consumer or towards_producer) and flow not in open_at:
                    open_at[flow] = t
        elif kind == "deliver":
            flow = rec[3]
            if flow in open_at:
                stalls[flow].append((open_at.pop(flow), t))
    close = last_t if end is None else end
    for flow, t in open_at.items():
        stalls[flow].append((t, close))
    return stalls
