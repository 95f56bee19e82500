from dataclasses import dataclass


@dataclass(frozen=True)
class Name:
    components: tuple

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(str(c) for c in self.components))

    @classmethod
    def parse(cls, uri):
        return cls(tuple(c for c in uri.split("/") if c))

    def append(self, component):
        return Name(self.components + (str(component),))

    def is_prefix_of(self, other):
        n = len(self.components)
        return other.components[:n] == self.components

    @property
    def chunk(self):
        """Trailing numeric component, or None."""
        if not self.components:
            return None
        last = self.components[-1]
        return int(last) if last.isdigit() else None

    def __len__(self):
        return len(self.components)

    def __str__(self):
        return "/" + "/".join(self.components)


@dataclass
class Interest:
    name: Name
    nonce: int
    hop_count: int = 0

    def hopped(self):
        return Interest(self.name, self.nonce, self.hop_count + 1)


@dataclass
class Data:
    name: Name
    payload_bytes: int = 1040
    hops_travelled: int = 0

    def hopped(self):
        return Data(self.name, self.payload_bytes, self.hops_travelled + 1)

    def fresh(self):
        """Copy as served by this node (hop counter restarts)."""
        return Data(self.name, self.payload_bytes, 0)
