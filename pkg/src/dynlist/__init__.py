"""Deterministic simulator and verification harness for one-round,
low-bandwidth subgraph listing in dynamic networks."""

from .engine import NetworkState, RoundReport, SimParams, Trace, run_round, run_scenario
from .graph import (
    AdjacencyDiff,
    DeleteEdge,
    DeleteNode,
    Graph,
    InsertEdge,
    InsertNode,
    LegalityProfile,
    RoundUpdates,
    RoundValidationError,
    apply_round,
    diff_adjacency,
    validate_round,
)
from .messages import EncodingParams, Message, message_bits
from .oracle import (
    Verdict,
    check_round,
    enumerate_cliques,
    enumerate_induced_wedges,
    enumerate_triangles,
)
from .protocols import PROTOCOLS, CliqueParams, NodeState, ProtocolError, derive_cliques, initial_listings
from .workload import GenParams, GenerationError, SplitMix64, adversarial_corpus, gen_scenario, run_fuzz

__version__ = "0.1.0"
