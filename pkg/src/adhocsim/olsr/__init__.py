from .node import OlsrNode
from .protocol import (HelloMessage, OlsrState, OlsrTimers, TcMessage, compute_routes,
                       covers_all, emit_hello, originate_tc, process_hello, refresh, relay_tc,
                       select_mprs)
from .transport import (ConstantRateSender, IpPacket, ReliableSender, RenoState, Segment,
                        SegmentKind, TransportEvent, TransportReceiver, reliable_send)

__all__ = [
    "ConstantRateSender", "HelloMessage", "IpPacket", "OlsrNode", "OlsrState", "OlsrTimers",
    "ReliableSender", "RenoState", "Segment", "SegmentKind", "TcMessage", "TransportEvent",
    "TransportReceiver", "compute_routes", "covers_all", "emit_hello", "originate_tc",
    "process_hello", "refresh", "relay_tc", "reliable_send", "select_mprs",
]
