"""Discrete-event simulator of wireless ad hoc networks running either an NDN
stack (controlled flooding, PIT, LRU/pLRU content stores) or OLSR with
TCP-like and UDP-like transports."""

from .engine import MS, NS, S, US, RngStreams, Simulator, seconds, to_seconds
from .radio import Frame, FrameKind, Mac, Medium, RadioConfig, Status, friis_rx_power

__version__ = "0.1.0"

__all__ = [
    "Frame", "FrameKind", "MS", "Mac", "Medium", "NS", "RadioConfig", "RngStreams", "S",
    "Simulator", "Status", "US", "friis_rx_power", "seconds", "to_seconds",
]
