from .apps import ConsumerApp, ProducerApp, producer_on_interest
from .forwarder import ForwardDecision, NdnForwarder, StrategyConfig
from .packets import Data, Interest, Name
from .tables import ContentStore, Pit, PitEntry, cs_insert

__all__ = [
    "ConsumerApp", "ContentStore", "Data", "ForwardDecision", "Interest", "Name",
    "NdnForwarder", "Pit", "PitEntry", "ProducerApp", "StrategyConfig", "cs_insert",
    "producer_on_interest",
]
