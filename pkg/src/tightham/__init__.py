"""Tight Hamilton cycles in random r-uniform hypergraphs by the reservoir method."""
from .connector import ConnectionRequest, ConnectionResult, ConnectorConfig, connect_all
from .errors import (AlreadyExposed, InvalidInput, StageFailure, TightHamError)
from .estimator import TightCycleFinder, check_hypergraph
from .exposure import ExposureConfig, ExposureLedger, coin, split_explicit
from .hypergraph import Hypergraph, one_density, tight_cycle
from .oracle import brute_m1, dp_has_tight_hamilton_cycle, flow_m1, verify_tight_cycle, verify_tight_path
from .pipeline import PipelineConfig, RunReport, find_disjoint_tight_cycles, find_tight_hamilton_cycle
from .reservoir import build_core, build_reservoir_graph, certify_density

__version__ = "0.1.0"

__all__ = [
    "AlreadyExposed", "ConnectionRequest", "ConnectionResult", "ConnectorConfig", "ExposureConfig",
    "ExposureLedger", "Hypergraph", "InvalidInput", "PipelineConfig", "RunReport", "StageFailure",
    "TightCycleFinder", "TightHamError", "brute_m1", "build_core", "build_reservoir_graph",
    "certify_density", "check_hypergraph", "coin", "connect_all", "dp_has_tight_hamilton_cycle",
    "find_disjoint_tight_cycles", "find_tight_hamilton_cycle", "flow_m1", "one_density",
    "split_explicit", "tight_cycle", "verify_tight_cycle", "verify_tight_path",
]
