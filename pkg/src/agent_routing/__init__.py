"""Priority- and context-aware routing for simulated agent networks.

The package routes tasks over a directed graph of metric-bearing agents
using a seven-term edge cost, prunes the search space heuristically,
optionally routes through a two-level cluster hierarchy, and adapts the
cost weights online from simulated workload feedback.
"""

from .cost import CostBreakdown, compute_cost, cost_matrix
from .filtering import FilterPolicy, apply_filter
from .hierarchy import Clustering, SuperGraph, build_clustering, build_supergraph, route_hierarchical
from .model import (
    EPS_DIV,
    AgentGraph,
    AgentNode,
    Link,
    RouteResult,
    Task,
    UNREACHABLE,
    Unreachable,
    WeightVector,
    build_graph,
    validate_graph,
)
from .oracle import exhaustive_best_path, random_instance
from .router import reconstruct_path, route
from .sim import RunReport, Scenario, TaskOutcome, generate_workload, run

__all__ = [
    "AgentGraph",
    "AgentNode",
    "Clustering",
    "CostBreakdown",
    "EPS_DIV",
    "FilterPolicy",
    "Link",
    "RouteResult",
    "RunReport",
    "Scenario",
    "SuperGraph",
    "Task",
    "TaskOutcome",
    "UNREACHABLE",
    "Unreachable",
    "WeightVector",
    "apply_filter",
    "build_clustering",
    "build_graph",
    "build_supergraph",
    "compute_cost",
    "cost_matrix",
    "exhaustive_best_path",
    "generate_workload",
    "random_instance",
    "reconstruct_path",
    "route",
    "route_hierarchical",
    "run",
    "validate_graph",
]
