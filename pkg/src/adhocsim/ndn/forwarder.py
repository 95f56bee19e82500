"""Controlled-flooding NDN forwarder for a single broadcast face.

Every rebroadcast (Interest or Data) waits a uniform random number of slots
in ``[0, defer_window)``; a node that overhears the same packet while waiting
drops its own copy. Unlike wired NDN, packets go back out on the face they
arrived on, since the wireless face is the only one.
"""

import enum
from dataclasses import dataclass

from ..engine import S, US
from ..radio import Frame, FrameKind
from .packets import Data
from .tables import Pit


@dataclass
class StrategyConfig:
    defer_window: int = 127
    slot_time: int = 20 * US
    pit_lifetime: int = 4 * S
    interest_bytes: int = 32

    def __post_init__(self):
        if self.defer_window < 1:
            raise ValueError("defer_window must be >= 1")
        if self.pit_lifetime <= 0:
            raise ValueError("pit_lifetime must be positive")


class ForwardDecision(enum.Enum):
    FORWARDED = "forwarded"
    AGGREGATED = "aggregated"
    CS_HIT = "cs_hit"
    PRODUCED = "produced"
    DUPLICATE = "duplicate"
    MALFORMED = "malformed"
    UNSOLICITED = "unsolicited"
    SATISFIED = "satisfied"


class _Pending:
    __slots__ = ("frame", "handle", "nonce")

    def __init__(self, frame, handle, nonce=None):
        self.frame = frame
        self.handle = handle
        self.nonce = nonce

    @property
    def on_air(self):
        return self.frame.tx_start is not None


class NdnForwarder:
    def __init__(self, node_id, sim, mac, strategy, cs, defer_rng, cache_rng=None,
                 header_bytes=48, log=None):
        self.node = node_id
        self.sim = sim
        self.mac = mac
        self.strategy = strategy
        self.cs = cs
        self.defer_rng = defer_rng
        self.cache_rng = cache_rng
        self.header_bytes = header_bytes
        self.log = log
        self.pit = Pit()
        self.seen = set()
        self.app = None
        self.producer = None
        self._pending_interest = {}
        self._pending_data = {}
        self.stats = dict.fromkeys(
            ("interests_in", "data_in", "aggregated", "duplicates", "cs_hits", "produced",
             "unsolicited", "malformed", "interest_suppressed", "data_suppressed",
             "interest_rebroadcast", "data_rebroadcast"), 0)
        mac.medium.attach(node_id, self.on_frame)

    # -- plumbing ---------------------------------------------------------

    def defer_slots(self):
        return int(self.defer_rng.integers(0, self.strategy.defer_window))

    def _defer(self, frame, packet_kind, nonce=None):
        delay = self.defer_slots() * self.strategy.slot_time
        handle = self.sim.schedule(delay, self._release, frame, packet_kind, nonce)
        return _Pending(frame, handle, nonce)

    def _release(self, frame, packet_kind, nonce):
        if frame.cancelled:
            return
        if self.log is not None:
            self.log.add("fwd", self.sim.now, self.node, packet_kind,
                         str(frame.inner.name), -1 if nonce is None else nonce)
        self.stats[packet_kind + "_rebroadcast"] += 1
        self.mac.enqueue(frame)

    def _cancel(self, pending):
        """Suppress a queued copy; True if it had not reached the air yet."""
        if pending.on_air:
            return False
        self.sim.cancel(pending.handle)
        pending.frame.cancelled = True
        return True

    def _interest_frame(self, interest):
        return Frame(self.node, self.strategy.interest_bytes + self.header_bytes,
                     FrameKind.NDN_INTEREST, interest)

    def _data_frame(self, data):
        return Frame(self.node, data.payload_bytes + self.header_bytes, FrameKind.NDN_DATA, data)

    def on_frame(self, frame, outcome):
        if frame.kind is FrameKind.NDN_INTEREST:
            self.on_interest(frame.inner.hopped())
        elif frame.kind is FrameKind.NDN_DATA:
            self.on_data(frame.inner.hopped())

    # -- Interests --------------------------------------------------------

    def _reply(self, data, source):
        name = data.name
        pending = self._pending_data.get(name)
        if pending is not None and not pending.frame.cancelled and not pending.on_air:
            return
        if self.log is not None:
            self.log.add("serve", self.sim.now, self.node, str(name), source)
        self._pending_data[name] = self._defer(self._data_frame(data), "data")

    def on_interest(self, interest):
        """Handle an Interest heard on the wireless face."""
        stats = self.stats
        stats["interests_in"] += 1
        name = interest.name
        if not name.components or name.chunk is None:
            stats["malformed"] += 1
            return ForwardDecision.MALFORMED
        key = (name, interest.nonce)
        if key in self.seen:
            stats["duplicates"] += 1
            pending = self._pending_interest.get(name)
            if pending is not None and pending.nonce == interest.nonce and self._cancel(pending):
                stats["interest_suppressed"] += 1
                del self._pending_interest[name]
            return ForwardDecision.DUPLICATE
        self.seen.add(key)

        cached = self.cs.lookup(name)
        if cached is not None:
            stats["cs_hits"] += 1
            self._reply(cached.fresh(), "cache")
            return ForwardDecision.CS_HIT
        if self.producer is not None:
            data = self.producer.on_interest(interest)
            if data is not None:
                stats["produced"] += 1
                self._reply(data, "producer")
                return ForwardDecision.PRODUCED

        now = self.sim.now
        entry = self.pit.get(name, now)
        if entry is not None:
            entry.nonces.add(interest.nonce)
            entry.remote = True
            stats["aggregated"] += 1
            return ForwardDecision.AGGREGATED
        entry = self.pit.create(name, now + self.strategy.pit_lifetime)
        entry.nonces.add(interest.nonce)
        entry.remote = True
        entry.forwarded_upstream = True
        self._pending_interest[name] = self._defer(self._interest_frame(interest), "interest",
                                                   interest.nonce)
        return ForwardDecision.FORWARDED

    def express(self, interest):
        """Interest from the local application: sent at once, never aggregated."""
        name = interest.name
        self.seen.add((name, interest.nonce))
        cached = self.cs.lookup(name)
        if cached is not None:
            self.stats["cs_hits"] += 1
            self.sim.schedule(0, self._deliver_local, cached.fresh())
            return ForwardDecision.CS_HIT
        now = self.sim.now
        entry = self.pit.get(name, now)
        if entry is None:
            entry = self.pit.create(name, now + self.strategy.pit_lifetime)
        else:
            entry.expiry = max(entry.expiry, now + self.strategy.pit_lifetime)
        entry.local = True
        entry.nonces.add(interest.nonce)
        entry.forwarded_upstream = True
        self.mac.enqueue(self._interest_frame(interest))
        return ForwardDecision.FORWARDED

    def _deliver_local(self, data):
        if self.app is not None:
            self.app.on_data(data)

    # -- Data ---------------------------------------------------------------

    def on_data(self, data):
        """Handle a Data packet heard on the wireless face."""
        stats = self.stats
        stats["data_in"] += 1
        name = data.name
        pending = self._pending_data.pop(name, None)
        if pending is not None and self._cancel(pending):
            stats["data_suppressed"] += 1
        entry = self.pit.pop(name, self.sim.now)
        if entry is None:
            stats["unsolicited"] += 1
            return ForwardDecision.UNSOLICITED
        pending = self._pending_interest.pop(name, None)
        if pending is not None:
            self._cancel(pending)
        self.cs.insert(Data(name, data.payload_bytes, 0), self.cache_rng)
        if entry.local:
            self._deliver_local(data)
        if entry.remote:
            self._pending_data[name] = self._defer(self._data_frame(data), "data")
        return ForwardDecision.SATISFIED
