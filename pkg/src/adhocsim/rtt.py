"""Jacobson/Karels round-trip estimator with RFC 6298 constants."""

from .engine import S, seconds

ALPHA = 1 / 8
BETA = 1 / 4
K = 4


class RttEstimator:
    """Smoothed RTT and variance in nanoseconds.

    ``rto = srtt + 4 * rttvar`` clamped to ``[min_rto, max_rto]``; each timeout
    doubles the current rto (binary backoff) until the next valid sample.
    """

    def __init__(self, initial_rto=1 * S, min_rto=seconds(0.2), max_rto=10 * S):
        if not 0 < min_rto <= max_rto:
            raise ValueError("need 0 < min_rto <= max_rto")
        self.min_rto = int(min_rto)
        self.max_rto = int(max_rto)
        self.srtt = None
        self.rttvar = None
        self.rto = self._clamp(int(initial_rto))
        self.backoffs = 0

    def _clamp(self, value):
        return max(self.min_rto, min(self.max_rto, int(round(value))))

    def sample(self, rtt):
        if rtt < 0:
            raise ValueError("negative RTT sample")
        if self.srtt is None:
            self.srtt = float(rtt)
            self.rttvar = rtt / 2.0
        else:
            self.rttvar = (1 - BETA) * self.rttvar + BETA * abs(self.srtt - rtt)
            self.srtt = (1 - ALPHA) * self.srtt + ALPHA * rtt
        self.backoffs = 0
        self.rto = self._clamp(self.srtt + K * self.rttvar)
        return self.rto

    def backoff(self):
        self.backoffs += 1
        self.rto = self._clamp(self.rto * 2)
        return self.rto
