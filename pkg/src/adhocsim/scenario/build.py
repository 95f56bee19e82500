"""Turn a ScenarioConfig into a wired simulation and run it.

Simulated time starts with a warm-up (``warmupS``) during which nothing moves
and no flow runs, so OLSR can converge before consumer 1 starts; all
scenario times (consumer starts, convoy departure, walk start) and all CSV
timestamps are relative to the end of the warm-up, the run epoch.
"""

from dataclasses import dataclass, field

import numpy as np

from ..engine import PRNG_NAME, S, RngStreams, Simulator, seconds
from ..eventlog import EventLog
from ..metrics import FrameCounter, MetricsRecord, summarize
from ..mobility import ConvoyMobility, ConvoyScript, RandomWalkMobility, StaticMobility
from ..ndn import ConsumerApp, ContentStore, NdnForwarder, ProducerApp, StrategyConfig
from ..olsr import (ConstantRateSender, OlsrNode, OlsrTimers, ReliableSender,
                    TransportReceiver)
from ..radio import Mac, Medium, RadioConfig
from ..rtt import RttEstimator
from .config import ConfigError
from .layout import (CONSUMER1, CONSUMER2, PRODUCER, adjacency, check_controlled_grid,
                     controlled_grid, hop_distances, random_layout)

FLOWS = ("consumer1", "consumer2")


def radio_config(cfg):
    r = cfg.radio
    return RadioConfig(
        tx_power_dbm=r.txPowerDbm, rx_sensitivity_dbm=r.rxSensitivityDbm,
        channel_bps=int(r.channelBps), carrier_freq_hz=r.carrierFreqHz,
        system_loss_db=r.systemLossDb, slot_time=seconds(r.slotTimeUs * 1e-6),
        preamble_time=seconds(r.preambleTimeUs * 1e-6), header_bytes=r.headerBytes,
        backoff_slots=r.backoffSlots, mac_queue_limit=r.macQueueLimit,
        capture_threshold_db=r.captureThresholdDb,
    )


def _rtt(cfg):
    r = cfg.rto
    return RttEstimator(seconds(r.initialRtoS), seconds(r.minRtoS), seconds(r.maxRtoS))


@dataclass
class RunResult:
    seed: int
    records: list
    summaries: dict
    epoch: int
    end_time: int
    completed: bool
    events: int
    counters: dict = field(default_factory=dict)
    log: EventLog = None


class SimulationInstance:
    """A fully wired run for one (config, seed) pair."""

    def __init__(self, cfg, seed=None, log_events=False):
        if seed is None:
            seed = cfg.seeds[0]
        self.cfg = cfg
        self.seed = seed
        self.sim = Simulator()
        self.rngs = RngStreams(seed)
        self.log = EventLog() if log_events else None
        self.radio = radio_config(cfg)
        self.epoch = seconds(cfg.warmupS)
        self.layout = self._layout()
        self.mobility = self._mobility()
        n = self.layout.n
        self.medium = Medium(self.sim, self.radio, self.mobility, n)
        self.counter = FrameCounter(cfg.includeControlInLoss)
        self.medium.listeners.append(self.counter)
        if self.log is not None:
            self.medium.listeners.append(self.log.on_frame_end)
        self.macs = [Mac(i, self.medium, self.rngs[f"mac/{i}"]) for i in range(n)]
        self.records = [MetricsRecord(flow, node, cfg.fileChunks, cfg.payloadBytes)
                        for flow, node in zip(FLOWS, self.layout.consumers)]
        self.starts = {FLOWS[0]: self.epoch, FLOWS[1]: self.epoch + seconds(cfg.consumer2StartS)}
        self.forwarders = []
        self.olsr = []
        self.apps = {}
        self.senders = {}
        self._finished = set()
        if cfg.stack == "ndn":
            self._install_ndn()
        else:
            self._install_olsr()

    # -- topology & mobility ----------------------------------------------

    def _layout(self):
        cfg = self.cfg
        if cfg.topology == "controlledGrid":
            layout = controlled_grid()
            try:
                check_controlled_grid(layout, self.radio)
            except ValueError as exc:
                raise ConfigError(str(exc), "topology") from None
            return layout
        b = cfg.mobility.randomWalk.bounds
        return random_layout(cfg.nodeCount, self.rngs["layout"], b)

    def _mobility(self):
        cfg = self.cfg
        pos = self.layout.positions
        if cfg.topology == "randomWalk":
            rw = cfg.mobility.randomWalk
            rngs = [self.rngs[f"mobility/{i}"] for i in range(self.layout.n)]
            return RandomWalkMobility(pos, rngs, cfg.mobility.speed, rw.legDurationS,
                                      rw.bounds, start=cfg.warmupS)
        convoy = cfg.mobility.convoy
        if convoy is None:
            return StaticMobility(pos)
        script = ConvoyScript(
            depart_at=self.epoch + seconds(convoy.departAtS),
            away_duration=seconds(convoy.awayDurationS),
            members=self.layout.mobile | {self.layout.producer},
            speed=cfg.mobility.speed, heading=tuple(convoy.heading),
            out_distance=convoy.outDistanceM,
        )
        return ConvoyMobility(pos, script)

    @property
    def convoy(self):
        return getattr(self.mobility, "script", None)

    # -- stacks -------------------------------------------------------------

    def _plru_nodes(self):
        cache = self.cfg.cache
        if cache.cachePolicy != "plru":
            return frozenset()
        if cache.plruScope == "fixedNodesOnly":
            return self.layout.fixed
        return self.layout.mobile

    def _install_ndn(self):
        cfg = self.cfg
        st = cfg.strategy
        strategy = StrategyConfig(st.deferWindow, self.radio.slot_time,
                                  seconds(st.pitLifetimeS), st.interestBytes)
        plru = self._plru_nodes()
        for i in range(self.layout.n):
            if i in plru:
                cs = ContentStore(cfg.cache.csCapacity, "plru", cfg.cache.plruP)
            else:
                cs = ContentStore(cfg.cache.csCapacity, "lru")
            fwd = NdnForwarder(i, self.sim, self.macs[i], strategy, cs, self.rngs[f"defer/{i}"],
                               self.rngs[f"plru/{i}"], self.radio.header_bytes, self.log)
            self.forwarders.append(fwd)
        self.forwarders[self.layout.producer].producer = ProducerApp(
            cfg.prefix, cfg.fileChunks, cfg.payloadBytes)
        for rec in self.records:
            app = ConsumerApp(self.sim, self.forwarders[rec.node], rec.flow, cfg.prefix, rec,
                              _rtt(cfg), self.rngs[f"nonce/{rec.flow}"], cfg.fileChunks,
                              st.windowSize, self.log, self._on_complete)
            self.apps[rec.flow] = app
            self.sim.schedule_at(self.starts[rec.flow], app.start)

    def _install_olsr(self):
        cfg = self.cfg
        o = cfg.olsr
        timers = OlsrTimers(seconds(o.helloIntervalS), seconds(o.tcIntervalS),
                            seconds(o.neighborHoldS), seconds(o.topologyHoldS))
        for i in range(self.layout.n):
            agent = OlsrNode(i, self.sim, self.macs[i], timers, self.rngs[f"olsr/{i}"],
                             self.radio.header_bytes, self.log)
            agent.start()
            self.olsr.append(agent)
        producer = self.olsr[self.layout.producer]
        reliable = cfg.stack == "olsr-tcp"
        for rec in self.records:
            if reliable:
                sender = ReliableSender(self.sim, producer, rec.flow, rec.node, rec, _rtt(cfg),
                                        cfg.fileChunks, cfg.payloadBytes,
                                        cfg.transport.initialSsthresh, self.log)
            else:
                sender = ConstantRateSender(self.sim, producer, rec.flow, rec.node, rec,
                                            cfg.transport.rateBps, cfg.fileChunks,
                                            cfg.payloadBytes, self.log)
                sender.on_finished = self._on_sender_finished
            self.senders[rec.flow] = sender
            app = TransportReceiver(self.sim, self.olsr[rec.node], rec.flow,
                                    self.layout.producer, rec, reliable, _rtt(cfg), self.log,
                                    self._on_complete)
            self.apps[rec.flow] = app
            self.sim.schedule_at(self.starts[rec.flow], app.start)

    # -- completion ---------------------------------------------------------

    def _on_complete(self, app):
        self._finished.add(app.flow)
        if len(self._finished) == len(self.records):
            self.sim.stop()

    def _on_sender_finished(self, sender):
        self.sim.schedule(seconds(self.cfg.drainS), self._on_drained, sender.flow)

    def _on_drained(self, flow):
        self._on_complete(self.apps[flow])

    # -- running ------------------------------------------------------------

    @property
    def end_limit(self):
        return self.epoch + seconds(self.cfg.simDurationS)

    def run(self):
        self.sim.run_until(self.end_limit)
        for rec in self.records:
            rec.p_sent = self.counter.p_sent
            rec.p_loss = self.counter.p_loss
        summaries = {rec.flow: summarize(rec) for rec in self.records}
        counters = {
            "pSent": self.counter.p_sent, "pLoss": self.counter.p_loss,
            "controlSent": self.counter.control_sent, "controlLost": self.counter.control_lost,
            "macQueueDrops": sum(m.queue_drops for m in self.macs),
        }
        for group in (self.forwarders, self.olsr):
            for node in group:
                for k, v in node.stats.items():
                    counters[k] = counters.get(k, 0) + v
        return RunResult(self.seed, self.records, summaries, self.epoch, self.sim.now,
                         len(self._finished) == len(self.records), self.sim.executed,
                         counters, self.log)

    def prng_info(self):
        return {"generator": PRNG_NAME, "seed": self.seed}

    # -- connectivity helpers -------------------------------------------

    def hop_count_at(self, t, src, dst):
        """Unit-disk hop distance from ``src`` to ``dst`` at absolute time ``t``
        (None when partitioned)."""
        adj = adjacency(self.mobility.positions(t), self.radio)
        return hop_distances(adj, src).get(dst)

    def partition_intervals(self, src, dst, t0, t1, step=0.1 * S, resolution=1000):
        """Intervals within [t0, t1] during which ``src`` has no path to
        ``dst``; returns a list of (start, end) absolute ns.

        Connectivity is scanned every ``step`` and each change is then pinned
        down by bisection to ``resolution`` ns. Cuts shorter than ``step`` can
        be missed.
        """
        def cut(t):
            return self.hop_count_at(t, src, dst) is None

        def edge(lo, hi, state):
            # first instant in (lo, hi] whose state differs from ``state``
            while hi - lo > resolution:
                mid = (lo + hi) // 2
                if cut(mid) == state:
                    lo = mid
                else:
                    hi = mid
            return hi

        out = []
        prev_t = int(t0)
        prev = cut(prev_t)
        current = prev_t if prev else None
        ticks = list(range(int(t0) + int(step), int(t1), int(step))) + [int(t1)]
        for t in ticks:
            now = cut(t)
            if now != prev:
                at = edge(prev_t, t, prev)
                if now:
                    current = at
                else:
                    out.append((current, at))
                    current = None
            prev_t, prev = t, now
        if current is not None:
            out.append((current, int(t1)))
        return out


def build_scenario(cfg, seed=None, log_events=False):
    return SimulationInstance(cfg, seed, log_events)


def run_scenario(cfg, seed=None, log_events=False):
    return build_scenario(cfg, seed, log_events).run()


__all__ = ["CONSUMER1", "CONSUMER2", "FLOWS", "PRODUCER", "RunResult", "SimulationInstance",
           "build_scenario", "radio_config", "run_scenario"]
