"""Shared broadcast medium: Friis reception, airtime, carrier sense, collisions
and a 1-persistent slotted-backoff CSMA MAC."""

import enum
import itertools
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .engine import US

SPEED_OF_LIGHT = 299_792_458.0


@dataclass
class RadioConfig:
    tx_power_dbm: float = 5.0
    rx_sensitivity_dbm: float = -80.0
    channel_bps: int = 1_000_000
    carrier_freq_hz: float = 2.412e9
    system_loss_db: float = 4.2
    slot_time: int = 20 * US
    preamble_time: int = 192 * US
    header_bytes: int = 48
    backoff_slots: int = 32
    mac_queue_limit: int = 100
    capture_threshold_db: float = 0.0

    def __post_init__(self):
        if self.channel_bps <= 0:
            raise ValueError("channel_bps must be positive")
        if self.slot_time <= 0:
            raise ValueError("slot_time must be positive")
        if self.system_loss_db < 0:
            raise ValueError("system_loss_db must be >= 0")
        if self.backoff_slots < 1:
            raise ValueError("backoff_slots must be >= 1")

    def airtime(self, frame_bytes):
        """Preamble plus serialization time of ``frame_bytes`` (ns, integer)."""
        return self.preamble_time + (frame_bytes * 8 * 1_000_000_000) // self.channel_bps

    def range_m(self):
        """Distance at which received power equals the sensitivity."""
        budget = self.tx_power_dbm - self.system_loss_db - self.rx_sensitivity_dbm
        return 10 ** (budget / 20.0) * SPEED_OF_LIGHT / (4 * math.pi * self.carrier_freq_hz)


def friis_rx_power(tx_power_dbm, distance, cfg):
    """Received power (dBm) for isotropic antennas at ``distance`` metres."""
    if distance <= 0:
        raise ValueError(f"distance must be positive, got {distance}")
    path_loss = 20.0 * math.log10(4.0 * math.pi * distance * cfg.carrier_freq_hz / SPEED_OF_LIGHT)
    return tx_power_dbm - path_loss - cfg.system_loss_db


class FrameKind(enum.Enum):
    NDN_INTEREST = "NdnInterest"
    NDN_DATA = "NdnData"
    OLSR_CONTROL = "OlsrControl"
    TRANSPORT_SEGMENT = "TransportSegment"


DATA_PLANE = frozenset({FrameKind.NDN_INTEREST, FrameKind.NDN_DATA, FrameKind.TRANSPORT_SEGMENT})


class Status(enum.Enum):
    DELIVERED = "Delivered"
    BELOW_SENSITIVITY = "BelowSensitivity"
    COLLIDED = "Collided"
    TX_LOCAL_BUSY = "TxLocalBusy"


class Frame:
    """On-air unit. ``payload_bytes`` is the full frame size including the
    fixed MAC/protocol header; ``target`` is None for broadcast."""

    __slots__ = ("src", "payload_bytes", "kind", "inner", "target",
                 "tx_start", "tx_end", "frame_id", "cancelled")

    def __init__(self, src, payload_bytes, kind, inner=None, target=None):
        self.src = src
        self.payload_bytes = payload_bytes
        self.kind = kind
        self.inner = inner
        self.target = target
        self.tx_start = None
        self.tx_end = None
        self.frame_id = None
        self.cancelled = False

    def __repr__(self):
        return (f"Frame(id={self.frame_id}, src={self.src}, kind={self.kind.value}, "
                f"bytes={self.payload_bytes}, target={self.target})")


class ReceptionOutcome:
    __slots__ = ("receiver", "status", "rx_power_dbm", "collided", "interference_mw")

    def __init__(self, receiver, status=None, rx_power_dbm=None):
        self.receiver = receiver
        self.status = status
        self.rx_power_dbm = rx_power_dbm
        self.collided = False
        self.interference_mw = 0.0

    def __repr__(self):
        status = self.status.value if self.status else "pending"
        return f"ReceptionOutcome({self.receiver}, {status})"


def frame_lost(frame, outcomes):
    """Loss rule used for the loss-rate metric.

    Unicast: lost unless the intended next hop got it. Broadcast: lost if any
    in-range receiver saw a collision. A frame dropped at a busy sender is lost.
    """
    if outcomes and outcomes[0].status is Status.TX_LOCAL_BUSY:
        return True
    if frame.target is not None:
        for o in outcomes:
            if o.receiver == frame.target:
                return o.status is not Status.DELIVERED
        return True
    return any(o.status is Status.COLLIDED for o in outcomes)


class Medium:
    """Single shared channel. Reception is decided from positions at the start
    of each frame.

    A receiver that is idle when a frame starts locks onto it; any frame
    arriving while the receiver already hears something is lost there. The
    locked frame survives only if its power stays at least
    ``capture_threshold_db`` above the summed power of everything that
    overlapped it. Frames starting at the same instant never lock. With
    ``capture_threshold_db=None`` every overlap destroys all frames involved.
    """

    def __init__(self, sim, cfg, mobility, n_nodes):
        self.sim = sim
        self.cfg = cfg
        self.mobility = mobility
        self.n = n_nodes
        self.handlers = [None] * n_nodes
        self.tx_done = [None] * n_nodes
        self.listeners = []
        self._current = [None] * n_nodes
        self._incoming = [dict() for _ in range(n_nodes)]
        self._lock = [None] * n_nodes
        self._ids = itertools.count()
        thr = cfg.capture_threshold_db
        self._capture_ratio = None if thr is None else 10.0 ** (thr / 10.0)
        self._k = 4.0 * math.pi * cfg.carrier_freq_hz / SPEED_OF_LIGHT
        self._reach_cache_key = None
        self._reach_cache = {}

    def attach(self, node_id, handler, tx_done=None):
        self.handlers[node_id] = handler
        if tx_done is not None:
            self.tx_done[node_id] = tx_done

    def rx_powers(self, src, t=None):
        """Received power (dBm) at every node from ``src``; NaN at ``src``."""
        pos = self.mobility.positions(self.sim.now if t is None else t)
        d = np.hypot(pos[:, 0] - pos[src, 0], pos[:, 1] - pos[src, 1])
        d[src] = np.nan
        if np.any(d == 0):
            raise ValueError(f"node co-located with transmitter {src}")
        cfg = self.cfg
        return cfg.tx_power_dbm - 20.0 * np.log10(self._k * d) - cfg.system_loss_db

    def _reach(self, src):
        key = self.mobility.static_key(self.sim.now)
        if key is not None and key == self._reach_cache_key:
            hit = self._reach_cache.get(src)
            if hit is not None:
                return hit
        elif key is not None:
            self._reach_cache_key = key
            self._reach_cache = {}
        p = self.rx_powers(src)
        with np.errstate(invalid="ignore"):
            mask = p >= self.cfg.rx_sensitivity_dbm
        idx = np.flatnonzero(mask).tolist()
        result = (idx, [float(p[i]) for i in idx])
        if key is not None:
            self._reach_cache[src] = result
        return result

    def neighbors(self, node):
        """Nodes currently within reception range of ``node``."""
        return list(self._reach(node)[0])

    def transmitting(self, node):
        return self._current[node] is not None

    def carrier_busy(self, node):
        return bool(self._incoming[node])

    def idle_at(self, node):
        """Time at which every frame currently heard at ``node`` has ended."""
        incoming = self._incoming[node]
        if not incoming:
            return self.sim.now
        return max(f.tx_end for f, _ in incoming.values())

    def transmit(self, src, frame):
        sim = self.sim
        frame.src = src
        frame.frame_id = next(self._ids)
        frame.tx_start = sim.now
        if self._current[src] is not None:
            frame.tx_end = sim.now
            outcomes = [ReceptionOutcome(r, Status.TX_LOCAL_BUSY) for r in range(self.n) if r != src]
            for listener in self.listeners:
                listener(frame, outcomes)
            return outcomes
        frame.tx_end = sim.now + self.cfg.airtime(frame.payload_bytes)
        receivers, powers = self._reach(src)
        in_range = {}
        current = self._current
        lock = self._lock
        ratio = self._capture_ratio
        now = sim.now
        for r, p in zip(receivers, powers):
            o = ReceptionOutcome(r, None, p)
            incoming = self._incoming[r]
            if current[r] is not None:
                o.collided = True
            elif not incoming:
                lock[r] = (frame, o)
            else:
                o.collided = True
                held = lock[r]
                for other, other_o in incoming.values():
                    if held is None or other_o is not held[1]:
                        other_o.collided = True
                if held is not None:
                    locked_frame, locked = held
                    if ratio is None or locked_frame.tx_start == now:
                        locked.collided = True
                    else:
                        locked.interference_mw += 10.0 ** (p / 10.0)
                        if 10.0 ** (locked.rx_power_dbm / 10.0) < ratio * locked.interference_mw:
                            locked.collided = True
            incoming[frame.frame_id] = (frame, o)
            in_range[r] = o
        # half duplex: anything src was receiving is lost
        for _, other in self._incoming[src].values():
            other.collided = True
        outcomes = []
        for r in range(self.n):
            if r == src:
                continue
            o = in_range.get(r)
            if o is None:
                o = ReceptionOutcome(r, Status.BELOW_SENSITIVITY)
            outcomes.append(o)
        current[src] = frame
        sim.schedule_at(frame.tx_end, self._end, frame, outcomes, receivers)
        return outcomes

    def _end(self, frame, outcomes, receivers):
        src = frame.src
        self._current[src] = None
        delivered = []
        for o in outcomes:
            if o.status is not None:
                continue
            r = o.receiver
            del self._incoming[r][frame.frame_id]
            held = self._lock[r]
            if held is not None and held[1] is o:
                self._lock[r] = None
            if o.collided:
                o.status = Status.COLLIDED
            else:
                o.status = Status.DELIVERED
                delivered.append(o)
        for listener in self.listeners:
            listener(frame, outcomes)
        handlers = self.handlers
        for o in delivered:
            h = handlers[o.receiver]
            if h is not None:
                h(frame, o)
        done = self.tx_done[src]
        if done is not None:
            done(frame)


class Mac:
    """1-persistent CSMA: send at once on an idle channel; on a busy channel
    wait for the current activity to end plus a uniform random number of slots
    in ``[0, backoff_slots)`` and sense again. No ACKs or link-layer retries."""

    def __init__(self, node_id, medium, rng):
        self.node = node_id
        self.medium = medium
        self.sim = medium.sim
        self.cfg = medium.cfg
        self.rng = rng
        self.queue = deque()
        self.busy = False
        self.queue_drops = 0
        medium.tx_done[node_id] = self._tx_done

    def enqueue(self, frame):
        if len(self.queue) >= self.cfg.mac_queue_limit:
            self.queue_drops += 1
            return False
        self.queue.append(frame)
        if not self.busy:
            self._attempt()
        return True

    def _attempt(self):
        queue = self.queue
        while queue and queue[0].cancelled:
            queue.popleft()
        if not queue:
            self.busy = False
            return
        self.busy = True
        medium = self.medium
        if medium.carrier_busy(self.node):
            slots = int(self.rng.integers(0, self.cfg.backoff_slots))
            wake = medium.idle_at(self.node) + slots * self.cfg.slot_time
            self.sim.schedule_at(wake, self._attempt)
            return
        medium.transmit(self.node, queue.popleft())

    def _tx_done(self, frame):
        self._attempt()
