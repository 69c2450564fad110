"""QoS-aware uplink resource allocation for NR-V2X with two bandwidth parts.

GSRAGS assigns resource chunks to CUEs and pairs CUEs with V2V links by
Gale-Shapley matching, with bisection power control under a VUE outage
constraint. HRAHS and GSRAHS swap in Hungarian assignment for one or
both steps.
"""

from .engine import bench_matching, run_campaign, run_once
from .scenario import ConfigError, ScenarioConfig, load_config

__all__ = ["ConfigError", "ScenarioConfig", "bench_matching", "load_config", "run_campaign", "run_once"]
__version__ = "0.1.0"
