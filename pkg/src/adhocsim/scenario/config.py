"""Scenario configuration: schema, presets and loading.

Documents are YAML or JSON with camelCase keys. Unknown keys are rejected and
every error carries the dotted key path that caused it.
"""

import json
from pathlib import Path
from typing import List, Literal, Optional, Tuple

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

CONTROLLED_STARTS = (5.0, 10.0, 50.0, 100.0, 200.0)
RANDOM_STARTS = (0.0, 10.0, 100.0)
PRESET_STARTS = {"controlledGrid": CONTROLLED_STARTS, "randomWalk": RANDOM_STARTS}
STACKS = ("ndn", "olsr-tcp", "olsr-udp")


class ConfigError(ValueError):
    """Invalid scenario configuration; ``path`` is the offending key."""

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", validate_assignment=True)


class RadioSection(_Section):
    txPowerDbm: float = 5.0
    rxSensitivityDbm: float = -80.0
    channelBps: int = Field(1_000_000, gt=0)
    carrierFreqHz: float = Field(2.412e9, gt=0)
    systemLossDb: float = Field(4.2, ge=0)
    slotTimeUs: float = Field(20.0, gt=0)
    preambleTimeUs: float = Field(192.0, ge=0)
    headerBytes: int = Field(48, ge=0)
    backoffSlots: int = Field(32, ge=1)
    macQueueLimit: int = Field(100, ge=1)
    captureThresholdDb: Optional[float] = 0.0


class ConvoySection(_Section):
    departAtS: float = Field(60.0, ge=0)
    awayDurationS: float = Field(30.0, ge=0)
    outDistanceM: float = Field(600.0, gt=0)
    heading: Tuple[float, float] = (1.0, 0.0)


class RandomWalkSection(_Section):
    legDurationS: float = Field(2.0, gt=0)
    bounds: Tuple[float, float, float, float] = (0.0, 0.0, 500.0, 500.0)

    @model_validator(mode="after")
    def _bounds(self):
        x0, y0, x1, y1 = self.bounds
        if not (x1 > x0 and y1 > y0):
            raise ValueError("bounds must be (xmin, ymin, xmax, ymax) with positive extent")
        return self


class MobilitySection(_Section):
    speed: float = Field(6.0, gt=0)
    convoy: Optional[ConvoySection] = Field(default_factory=ConvoySection)
    randomWalk: RandomWalkSection = Field(default_factory=RandomWalkSection)


class StrategySection(_Section):
    deferWindow: int = Field(127, ge=1)
    pitLifetimeS: float = Field(4.0, gt=0)
    interestBytes: int = Field(32, ge=1)
    windowSize: int = Field(4, ge=1)


class RtoSection(_Section):
    initialRtoS: float = Field(1.0, gt=0)
    minRtoS: float = Field(0.2, gt=0)
    maxRtoS: float = Field(10.0, gt=0)

    @model_validator(mode="after")
    def _order(self):
        if not self.minRtoS <= self.maxRtoS:
            raise ValueError("minRtoS must not exceed maxRtoS")
        return self


class CacheSection(_Section):
    csCapacity: int = Field(100, ge=0)
    cachePolicy: Literal["lru", "plru"] = "lru"
    plruP: float = Field(0.5, ge=0, le=1)
    plruScope: Literal["fixedNodesOnly", "allMobileNodes"] = "fixedNodesOnly"


class OlsrSection(_Section):
    helloIntervalS: float = Field(2.0, gt=0)
    tcIntervalS: float = Field(5.0, gt=0)
    neighborHoldS: float = Field(6.0, gt=0)
    topologyHoldS: float = Field(15.0, gt=0)


class TransportSection(_Section):
    rateBps: float = Field(200_000.0, gt=0)
    initialSsthresh: float = Field(64.0, ge=2)


class ScenarioConfig(_Section):
    name: str = "scenario"
    preset: Optional[Literal["controlledGrid", "randomWalk"]] = None
    stack: Literal["ndn", "olsr-tcp", "olsr-udp"] = "ndn"
    topology: Literal["controlledGrid", "randomWalk"] = "controlledGrid"
    nodeCount: int = Field(21, ge=3)
    consumer2StartS: float = Field(5.0, ge=0)
    seeds: List[int] = Field(default_factory=lambda: [1, 2, 3, 4, 5], min_length=1)
    simDurationS: float = Field(1500.0, gt=0)
    warmupS: float = Field(20.0, ge=0)
    drainS: float = Field(10.0, ge=0)
    fileChunks: int = Field(1000, ge=1)
    payloadBytes: int = Field(1040, ge=1)
    prefix: str = "/test/content"
    includeControlInLoss: bool = False
    radio: RadioSection = Field(default_factory=RadioSection)
    mobility: MobilitySection = Field(default_factory=MobilitySection)
    strategy: StrategySection = Field(default_factory=StrategySection)
    rto: RtoSection = Field(default_factory=RtoSection)
    cache: CacheSection = Field(default_factory=CacheSection)
    olsr: OlsrSection = Field(default_factory=OlsrSection)
    transport: TransportSection = Field(default_factory=TransportSection)

    @model_validator(mode="after")
    def _consistency(self):
        if self.preset is not None:
            if self.topology != self.preset:
                raise ValueError(f"preset {self.preset} requires topology {self.preset}")
            allowed = PRESET_STARTS[self.preset]
            if self.consumer2StartS not in allowed:
                raise ValueError(f"consumer2StartS must be one of {list(allowed)} for preset "
                                 f"{self.preset} (drop 'preset' for free-form values)")
        if self.topology == "controlledGrid" and self.nodeCount != 21:
            raise ValueError("controlledGrid has exactly 21 nodes")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be distinct")
        if not self.prefix.startswith("/") or self.prefix == "/":
            raise ValueError("prefix must be a non-root name such as /test/content")
        return self

    def with_overrides(self, **changes):
        data = self.model_dump()
        for dotted, value in changes.items():
            set_path(data, dotted, value)
        return parse_config(data)

    def for_seed(self, seed):
        return self.with_overrides(seeds=[seed])

    def resolved(self):
        """Fully resolved document (every default spelled out)."""
        return self.model_dump(mode="json")


def set_path(data, dotted, value):
    keys = dotted.split(".")
    node = data
    for k in keys[:-1]:
        if not isinstance(node.get(k), dict):
            raise ConfigError("not a section", dotted)
        node = node[k]
    if keys[-1] not in node:
        raise ConfigError("unknown key", dotted)
    node[keys[-1]] = value


def _error_path(err):
    return ".".join(str(p) for p in err["loc"])


def parse_config(data):
    """Validate a mapping; raise ConfigError naming the first bad key."""
    if not isinstance(data, dict):
        raise ConfigError("config document must be a mapping")
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        msg = first["msg"]
        if first["type"] == "extra_forbidden":
            msg = "unknown key"
        raise ConfigError(msg, _error_path(first)) from None


def load_document(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        if path.suffix == ".json":
            return json.loads(text)
        return yaml.safe_load(text)
    except (yaml.YAMLError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None


def _merge(base, over):
    out = dict(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def config_from_document(data):
    """Like ``parse_config`` but a ``preset`` key first pulls in that preset's
    defaults, which the rest of the document then overrides."""
    if isinstance(data, dict) and data.get("preset") is not None:
        preset = data["preset"]
        if preset not in PRESET_STARTS:
            raise ConfigError(f"unknown preset {preset!r}", "preset")
        try:
            base = preset_config(preset, data.get("stack", "ndn"), data.get("consumer2StartS"))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError("must be a number", "consumer2StartS") from None
        data = _merge(base.model_dump(), data)
    return parse_config(data)


def load_config(path):
    return config_from_document(load_document(path))


def preset_config(preset, stack="ndn", consumer2_start_s=None, **overrides):
    """Preset configuration for ``controlledGrid`` or ``randomWalk``."""
    if preset not in PRESET_STARTS:
        raise ConfigError(f"unknown preset {preset!r}", "preset")
    if consumer2_start_s is None:
        consumer2_start_s = PRESET_STARTS[preset][0]
    data = {
        "name": f"{preset}-{stack}-start{float(consumer2_start_s):g}",
        "preset": preset,
        "topology": preset,
        "stack": stack,
        "consumer2StartS": float(consumer2_start_s),
    }
    if preset == "randomWalk":
        data["mobility"] = {"convoy": None}
        data["cache"] = {"plruScope": "allMobileNodes"}
    cfg = parse_config(data)
    return cfg.with_overrides(**overrides) if overrides else cfg


def config_schema():
    """JSON schema of the scenario document."""
    return ScenarioConfig.model_json_schema()
