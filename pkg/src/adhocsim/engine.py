"""Discrete-event engine: integer-nanosecond clock, FIFO-stable event queue and
named random streams."""

import hashlib
import heapq
import itertools

import numpy as np

NS = 1
US = 1_000
MS = 1_000_000
S = 1_000_000_000

PRNG_NAME = "numpy.PCG64 via SeedSequence(seed, spawn_key=(sha256(stream)[:4],))"


def seconds(value):
    """Convert seconds (int/float) to integer nanoseconds."""
    return int(round(value * S))


def to_seconds(t_ns):
    return t_ns / S


class EventHandle:
    __slots__ = ("fire_at", "seq", "action", "args", "cancelled", "done")

    def __init__(self, fire_at, seq, action, args):
        self.fire_at = fire_at
        self.seq = seq
        self.action = action
        self.args = args
        self.cancelled = False
        self.done = False

    @property
    def pending(self):
        return not (self.cancelled or self.done)

    def __repr__(self):
        state = "cancelled" if self.cancelled else "done" if self.done else "pending"
        return f"<EventHandle t={self.fire_at} seq={self.seq} {state}>"


class Simulator:
    """Single-threaded event loop.

    Events with the same timestamp run in insertion order. ``trace`` may be set
    to a callable receiving every executed handle (used by determinism checks).
    """

    def __init__(self):
        self.now = 0
        self._queue = []
        self._seq = itertools.count()
        self._stopped = False
        self.executed = 0
        self.trace = None

    def schedule(self, delay, action, *args):
        if delay < 0:
            raise ValueError(f"negative delay: {delay}")
        return self.schedule_at(self.now + int(delay), action, *args)

    def schedule_at(self, t, action, *args):
        if t < self.now:
            raise ValueError(f"cannot schedule in the past: {t} < {self.now}")
        handle = EventHandle(int(t), next(self._seq), action, args)
        heapq.heappush(self._queue, (handle.fire_at, handle.seq, handle))
        return handle

    def cancel(self, handle):
        if handle is None or not handle.pending:
            return False
        handle.cancelled = True
        return True

    def stop(self):
        """Halt the current ``run_until`` after the running event returns."""
        self._stopped = True

    def run_until(self, end):
        """Execute all live events with ``fire_at <= end``; returns how many ran.

        The clock ends at ``end`` unless ``stop()`` was called, in which case it
        stays at the time of the last executed event.
        """
        end = int(end)
        if end < self.now:
            raise ValueError(f"end {end} is before current time {self.now}")
        self._stopped = False
        count = 0
        queue = self._queue
        pop = heapq.heappop
        while queue and queue[0][0] <= end:
            _, _, handle = pop(queue)
            if handle.cancelled:
                continue
            self.now = handle.fire_at
            handle.done = True
            if self.trace is not None:
                self.trace(handle)
            handle.action(*handle.args)
            count += 1
            if self._stopped:
                break
        if not self._stopped:
            self.now = end
        self.executed += count
        return count

    def pending_count(self):
        return sum(1 for _, _, h in self._queue if not h.cancelled)


def _stream_key(stream_id):
    digest = hashlib.sha256(stream_id.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "little")


class RngStreams:
    """Independent generators keyed by ``(seed, stream_id)``.

    Each label gets its own PCG64 state, so drawing from one stream never
    shifts another.
    """

    def __init__(self, seed):
        self.seed = int(seed) & 0xFFFF_FFFF_FFFF_FFFF
        self._streams = {}

    def stream(self, stream_id):
        gen = self._streams.get(stream_id)
        if gen is None:
            ss = np.random.SeedSequence(self.seed, spawn_key=(_stream_key(stream_id),))
            gen = np.random.Generator(np.random.PCG64(ss))
            self._streams[stream_id] = gen
        return gen

    __getitem__ = stream
