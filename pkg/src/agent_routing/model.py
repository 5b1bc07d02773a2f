"""Domain types for the agent network: nodes, links, tasks, weights, route results.

All types are plain immutable records. Constructors do not validate domain
invariants; ``validate_graph`` reports violations as data so that callers
(loader, simulator, CLI) decide how to react.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

# Floor applied to availability, reliability and bandwidth before they are
# used as divisors. Preserves ordering while avoiding infinities.
EPS_DIV = 1e-6


@dataclass(frozen=True)
class AgentNode:
    """A vertex of the agent network carrying per-agent metrics.

    capability and model_sophistication must be strictly positive (they are
    divisors with no clamp); availability and reliability live in (0, 1];
    load_factor is a non-negative utilization level.
    """

    id: int
    capability: float
    availability: float
    load_factor: float
    model_sophistication: float
    reliability: float


@dataclass(frozen=True)
class Link:
    """A directed edge with transport metrics.

    bandwidth must be positive (divisor); latency is non-negative and is
    interpreted in milliseconds (simulation ticks during a run).
    """

    src: int
    dst: int
    bandwidth: float
    latency: float


@dataclass(frozen=True)
class Task:
    """A routing request: move work of a given complexity and priority."""

    id: int
    complexity: float
    priority: float
    source: int
    destination: int
    submit_time: int = 0


@dataclass(frozen=True)
class WeightVector:
    """The seven tunable coefficients of the edge cost function.

    Components must be non-negative. An all-zero vector is representable
    (every edge then costs zero) but is rejected by scenario validation,
    where it would make routing degenerate.
    """

    w1: float
    w2: float
    w3: float
    w4: float
    w5: float
    w6: float
    w7: float

    def __post_init__(self):
        for name, value in zip(self.field_names(), self.as_tuple()):
            if value < 0:
                raise ValueError(f"weight {name} must be >= 0, got {value}")

    @staticmethod
    def field_names() -> tuple[str, ...]:
        return ("w1", "w2", "w3", "w4", "w5", "w6", "w7")

    @classmethod
    def uniform(cls, value: float = 1.0) -> "WeightVector":
        return cls(*([value] * 7))

    def as_tuple(self) -> tuple[float, ...]:
        return (self.w1, self.w2, self.w3, self.w4, self.w5, self.w6, self.w7)

    def component(self, index: int) -> float:
        """Component by 1-based index (1..7)."""
        return self.as_tuple()[index - 1]

    def with_component(self, index: int, value: float) -> "WeightVector":
        """Copy with the 1-based component ``index`` replaced by ``value``."""
        values = list(self.as_tuple())
        values[index - 1] = value
        return WeightVector(*values)

    def scaled(self, factor: float) -> "WeightVector":
        return WeightVector(*(w * factor for w in self.as_tuple()))


@dataclass
class AgentGraph:
    """Directed graph of agents.

    ``nodes`` maps id -> AgentNode; ``edges`` holds at most one Link per
    ordered (src, dst) pair. Treated as read-only once built; the simulator
    evolves state by constructing updated copies.
    """

    nodes: dict[int, AgentNode]
    edges: tuple[Link, ...]
    _adjacency: dict[int, tuple[Link, ...]] = field(init=False, repr=False)
    _edge_map: dict[tuple[int, int], Link] = field(init=False, repr=False)

    def __post_init__(self):
        adjacency: dict[int, list[Link]] = {node_id: [] for node_id in self.nodes}
        edge_map: dict[tuple[int, int], Link] = {}
        for link in self.edges:
            adjacency.setdefault(link.src, []).append(link)
            edge_map[(link.src, link.dst)] = link
        # Neighbor iteration order is fixed (ascending dst) for determinism.
        self._adjacency = {
            src: tuple(sorted(links, key=lambda e: e.dst))
            for src, links in adjacency.items()
        }
        self._edge_map = edge_map

    def out_edges(self, node_id: int) -> tuple[Link, ...]:
        return self._adjacency.get(node_id, ())

    def edge(self, src: int, dst: int) -> Link | None:
        return self._edge_map.get((src, dst))

    def has_node(self, node_id: int) -> bool:
        return node_id in self.nodes

    def node_ids(self) -> list[int]:
        return sorted(self.nodes)

    def with_updated_nodes(self, updated: dict[int, AgentNode]) -> "AgentGraph":
        """Copy of the graph with some nodes replaced (same topology)."""
        nodes = dict(self.nodes)
        nodes.update(updated)
        return AgentGraph(nodes=nodes, edges=self.edges)

    def induced_subgraph(self, keep: set[int]) -> "AgentGraph":
        """Subgraph on ``keep``: surviving nodes and edges with both endpoints kept."""
        nodes = {i: n for i, n in self.nodes.items() if i in keep}
        edges = tuple(e for e in self.edges if e.src in keep and e.dst in keep)
        return AgentGraph(nodes=nodes, edges=edges)


def build_graph(nodes: list[AgentNode], links: list[Link]) -> AgentGraph:
    return AgentGraph(nodes={n.id: n for n in nodes}, edges=tuple(links))


@dataclass(frozen=True)
class RouteResult:
    """A routed path with per-hop costs and search statistics.

    path runs source-first to destination-last; hop_costs has one entry per
    traversed edge; total_cost is their left-to-right sum. nodes_expanded
    counts settled nodes; edges_relaxed counts relaxation attempts
    (edge-cost evaluations).
    """

    path: tuple[int, ...]
    hop_costs: tuple[float, ...]
    total_cost: float
    nodes_expanded: int
    edges_relaxed: int


class Unreachable:
    """Returned when no path exists between the requested endpoints."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Unreachable"


UNREACHABLE = Unreachable()


def validate_graph(graph: AgentGraph) -> list[str]:
    """Check every domain invariant; return one description per violation.

    An empty list means the graph is valid. Violations are data, not
    failures: this never raises.
    """
    violations: list[str] = []
    for node_id, node in sorted(graph.nodes.items()):
        if node.id != node_id:
            violations.append(f"node {node_id}: keyed under {node_id} but has id {node.id}")
        if not (node.capability > 0) or not math.isfinite(node.capability):
            violations.append(f"node {node_id}: capability {node.capability} must be > 0")
        if not (node.model_sophistication > 0) or not math.isfinite(node.model_sophistication):
            violations.append(
                f"node {node_id}: model_sophistication {node.model_sophistication} must be > 0"
            )
        if not (0 < node.availability <= 1):
            violations.append(f"node {node_id}: availability {node.availability} outside (0, 1]")
        if not (0 < node.reliability <= 1):
            violations.append(f"node {node_id}: reliability {node.reliability} outside (0, 1]")
        if not (node.load_factor >= 0) or not math.isfinite(node.load_factor):
            violations.append(f"node {node_id}: load_factor {node.load_factor} must be >= 0")

    seen_pairs: set[tuple[int, int]] = set()
    for link in graph.edges:
        label = f"edge {link.src}->{link.dst}"
        if link.src == link.dst:
            violations.append(f"{label}: self-loops are not allowed")
        if link.src not in graph.nodes:
            violations.append(f"{label}: unknown source node {link.src}")
        if link.dst not in graph.nodes:
            violations.append(f"{label}: unknown destination node {link.dst}")
        if not (link.bandwidth > 0) or not math.isfinite(link.bandwidth):
            violations.append(f"{label}: bandwidth {link.bandwidth} must be > 0")
        if not (link.latency >= 0) or not math.isfinite(link.latency):
            violations.append(f"{label}: latency {link.latency} must be >= 0")
        pair = (link.src, link.dst)
        if pair in seen_pairs:
            violations.append(f"{label}: duplicate edge for this ordered pair")
        seen_pairs.add(pair)
    return violations


def validate_weights(weights: WeightVector) -> list[str]:
    """Scenario-level weight checks (constructor already rejects negatives)."""
    if all(w == 0 for w in weights.as_tuple()):
        return ["weights: all components are zero; every edge would cost zero"]
    return []


def updated_node(node: AgentNode, **changes) -> AgentNode:
    return replace(node, **changes)
