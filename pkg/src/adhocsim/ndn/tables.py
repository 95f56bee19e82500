"""Pending Interest Table and Content Store."""

from collections import OrderedDict


class PitEntry:
    __slots__ = ("name", "nonces", "expiry", "forwarded_upstream", "local", "remote")

    def __init__(self, name, expiry):
        self.name = name
        self.nonces = set()
        self.expiry = expiry
        self.forwarded_upstream = False
        self.local = False
        self.remote = False

    def __repr__(self):
        return f"PitEntry({self.name}, nonces={len(self.nonces)}, expiry={self.expiry})"


class Pit:
    """At most one live entry per name; expired entries vanish on access."""

    def __init__(self):
        self._entries = {}

    def get(self, name, now):
        entry = self._entries.get(name)
        if entry is not None and entry.expiry <= now:
            del self._entries[name]
            return None
        return entry

    def create(self, name, expiry):
        entry = PitEntry(name, expiry)
        self._entries[name] = entry
        return entry

    def pop(self, name, now):
        entry = self._entries.pop(name, None)
        if entry is not None and entry.expiry <= now:
            return None
        return entry

    def live(self, now):
        return [e for e in self._entries.values() if e.expiry > now]

    def __len__(self):
        return len(self._entries)


class ContentStore:
    """Recency-ordered cache.

    ``policy`` is ``"lru"`` or ``"plru"``; under pLRU a new name is admitted
    only with probability ``p`` (one uniform draw per offer).
    """

    def __init__(self, capacity=100, policy="lru", p=0.5):
        if capacity < 0:
            raise ValueError("capacity must be >= 0")
        if policy not in ("lru", "plru"):
            raise ValueError(f"unknown cache policy {policy!r}")
        if not 0.0 <= p <= 1.0:
            raise ValueError("p must be in [0, 1]")
        self.capacity = capacity
        self.policy = policy
        self.p = p
        self._entries = OrderedDict()
        self.hits = 0
        self.misses = 0

    def lookup(self, name):
        data = self._entries.get(name)
        if data is None:
            self.misses += 1
            return None
        self._entries.move_to_end(name)
        self.hits += 1
        return data

    def insert(self, data, rng=None):
        name = data.name
        if name in self._entries:
            self._entries.move_to_end(name)
            return True
        if self.policy == "plru":
            if rng is None:
                raise ValueError("pLRU admission needs a random stream")
            if not rng.random() < self.p:
                return False
        if self.capacity == 0:
            return False
        if len(self._entries) >= self.capacity:
            self._entries.popitem(last=False)
        self._entries[name] = data
        return True

    def names(self):
        """Names from least to most recently used."""
        return list(self._entries)

    def __contains__(self, name):
        return name in self._entries

    def __len__(self):
        return len(self._entries)


def cs_insert(store, data, rng=None):
    return store.insert(data, rng)
