"""Consumer (windowed, RTT-paced) and producer applications."""

from .packets import Data, Interest, Name


class ProducerApp:
    """Permanent origin of ``prefix/0 .. prefix/(n_chunks-1)``."""

    def __init__(self, prefix, n_chunks=1000, payload_bytes=1040):
        self.prefix = prefix if isinstance(prefix, Name) else Name.parse(prefix)
        self.n_chunks = n_chunks
        self.payload_bytes = payload_bytes
        self.served = 0

    def on_interest(self, interest):
        name = interest.name
        if len(name) != len(self.prefix) + 1 or not self.prefix.is_prefix_of(name):
            return None
        chunk = name.chunk
        if chunk is None or not 0 <= chunk < self.n_chunks:
            return None
        self.served += 1
        return Data(name, self.payload_bytes, 0)


def producer_on_interest(producer, interest):
    return producer.on_interest(interest)


class _Outstanding:
    __slots__ = ("nonce", "sent_at", "timer", "attempts")

    def __init__(self):
        self.nonce = None
        self.sent_at = None
        self.timer = None
        self.attempts = 0


class ConsumerApp:
    """Keeps ``window`` Interests outstanding for chunks taken in order.

    Every expression arms a timer at the current rto; expiry doubles the rto
    and re-expresses with a fresh nonce. RTT samples come only from chunks
    answered on their first expression (Karn's rule).
    """

    def __init__(self, sim, forwarder, flow, prefix, record, rtt, nonce_rng,
                 n_chunks=1000, window=4, log=None, on_complete=None):
        if window < 1:
            raise ValueError("window must be >= 1")
        self.sim = sim
        self.forwarder = forwarder
        self.flow = flow
        self.prefix = prefix if isinstance(prefix, Name) else Name.parse(prefix)
        self.record = record
        self.rtt = rtt
        self.nonce_rng = nonce_rng
        self.n_chunks = n_chunks
        self.window = window
        self.log = log
        self.on_complete = on_complete
        self.next_chunk = 0
        self.outstanding = {}
        self.used_nonces = set()
        self.done = 0
        self.retransmissions = 0
        self.started_at = None
        forwarder.app = self

    @property
    def complete(self):
        return self.done >= self.n_chunks

    def start(self):
        self.started_at = self.sim.now
        if self.log is not None:
            self.log.add("flow", self.sim.now, self.forwarder.node, self.flow,
                         self.n_chunks, self.record.payload_bytes)
        self.tick()

    def tick(self):
        """Fill the window; returns the Interests expressed."""
        sent = []
        while len(self.outstanding) < self.window and self.next_chunk < self.n_chunks:
            chunk = self.next_chunk
            self.next_chunk += 1
            self.outstanding[chunk] = _Outstanding()
            sent.append(self._express(chunk))
        return sent

    def consumer_tick(self):
        return self.tick()

    def _nonce(self):
        while True:
            nonce = int(self.nonce_rng.integers(0, 2 ** 32))
            if nonce not in self.used_nonces:
                self.used_nonces.add(nonce)
                return nonce

    def _express(self, chunk):
        state = self.outstanding[chunk]
        now = self.sim.now
        state.nonce = self._nonce()
        state.sent_at = now
        state.attempts += 1
        self.record.expressed(chunk, now)
        if self.log is not None:
            self.log.add("express", now, self.forwarder.node, self.flow, chunk, state.attempts)
        state.timer = self.sim.schedule(self.rtt.rto, self._timeout, chunk)
        interest = Interest(self.prefix.append(chunk), state.nonce, 0)
        self.forwarder.express(interest)
        return interest

    def _timeout(self, chunk):
        state = self.outstanding.get(chunk)
        if state is None:
            return
        self.rtt.backoff()
        self.retransmissions += 1
        self._express(chunk)

    def on_data(self, data):
        chunk = data.name.chunk
        if not self.prefix.is_prefix_of(data.name):
            return
        state = self.outstanding.pop(chunk, None)
        if state is None:
            return
        now = self.sim.now
        self.sim.cancel(state.timer)
        if state.attempts == 1:
            self.rtt.sample(now - state.sent_at)
        self.record.delivered(chunk, now, data.hops_travelled)
        if self.log is not None:
            self.log.add("deliver", now, self.forwarder.node, self.flow, chunk, data.hops_travelled)
        self.done += 1
        if self.complete:
            if self.on_complete is not None:
                self.on_complete(self)
            return
        self.tick()
