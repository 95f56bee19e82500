from .build import RunResult, SimulationInstance, build_scenario, radio_config, run_scenario
from .config import (ConfigError, ScenarioConfig, config_from_document, config_schema,
                     load_config, parse_config, preset_config)
from .layout import (CONSUMER1, CONSUMER2, PRODUCER, LayoutError, TopologyLayout,
                     check_controlled_grid, controlled_grid, random_layout)
from .matrix import expand_matrix, rerun_manifest, run_matrix

__all__ = [
    "CONSUMER1", "CONSUMER2", "ConfigError", "LayoutError", "PRODUCER", "RunResult",
    "ScenarioConfig", "SimulationInstance", "TopologyLayout", "build_scenario",
    "check_controlled_grid", "config_from_document", "config_schema", "controlled_grid", "load_config",
    "expand_matrix", "parse_config", "preset_config", "radio_config", "random_layout",
    "rerun_manifest", "run_matrix", "run_scenario",
]
