"""Pre-search pruning of heuristically poor agents and links.

Thresholds drop edges whose latency is too high and agents whose
reliability or availability is too low, along with their incident edges.
The task's endpoints always survive. "Consistently" poor is made concrete
by an exponentially weighted moving average maintained by the simulation
harness: when a history is supplied, a metric must breach its threshold
both currently and on the EWMA to be pruned, so one-tick spikes do not
evict anyone. Without a history, current values alone decide.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import AgentGraph, Task

EWMA_DECAY = 0.9


@dataclass(frozen=True)
class FilterPolicy:
    """Pruning thresholds; absent thresholds do not prune anything."""

    max_latency: float | None = None
    min_reliability: float | None = None
    min_availability: float | None = None
    enabled: bool = True

    def validate(self) -> list[str]:
        problems = []
        if self.max_latency is not None and not self.max_latency > 0:
            problems.append(f"filter: max_latency {self.max_latency} must be > 0")
        for name, value in (
            ("min_reliability", self.min_reliability),
            ("min_availability", self.min_availability),
        ):
            if value is not None and not (0 < value <= 1):
                problems.append(f"filter: {name} {value} outside (0, 1]")
        return problems

    @property
    def is_noop(self) -> bool:
        return not self.enabled or (
            self.max_latency is None
            and self.min_reliability is None
            and self.min_availability is None
        )


class EwmaHistory:
    """Per-node and per-edge metric averages, decayed once per tick."""

    def __init__(self, decay: float = EWMA_DECAY):
        self.decay = decay
        self.node_reliability: dict[int, float] = {}
        self.node_availability: dict[int, float] = {}
        self.edge_latency: dict[tuple[int, int], float] = {}

    def observe(self, graph: AgentGraph) -> None:
        """Fold the graph's current metrics into the averages."""
        for node_id, node in graph.nodes.items():
            self._fold(self.node_reliability, node_id, node.reliability)
            self._fold(self.node_availability, node_id, node.availability)
        for link in graph.edges:
            self._fold(self.edge_latency, (link.src, link.dst), link.latency)

    def _fold(self, table: dict, key, value: float) -> None:
        prior = table.get(key)
        table[key] = value if prior is None else self.decay * prior + (1 - self.decay) * value


def apply_filter(
    graph: AgentGraph,
    policy: FilterPolicy,
    task: Task,
    history: EwmaHistory | None = None,
) -> AgentGraph:
    """Subgraph of ``graph`` with heuristically poor elements removed.

    The task's source and destination are never removed. Disabled or
    threshold-free policies return the input unchanged. Over-aggressive
    policies may make the destination unreachable downstream; that is a
    routing outcome, not an error here.
    """
    if policy.is_noop:
        return graph

    protected = {task.source, task.destination}
    keep_nodes = set()
    for node_id, node in graph.nodes.items():
        if node_id in protected:
            keep_nodes.add(node_id)
            continue
        if _breaches_floor(
            node.reliability,
            policy.min_reliability,
            history.node_reliability.get(node_id) if history else None,
        ):
            continue
        if _breaches_floor(
            node.availability,
            policy.min_availability,
            history.node_availability.get(node_id) if history else None,
        ):
            continue
        keep_nodes.add(node_id)

    keep_edges = []
    for link in graph.edges:
        if link.src not in keep_nodes or link.dst not in keep_nodes:
            continue
        if _breaches_ceiling(
            link.latency,
            policy.max_latency,
            history.edge_latency.get((link.src, link.dst)) if history else None,
        ):
            continue
        keep_edges.append(link)

    return AgentGraph(
        nodes={i: graph.nodes[i] for i in keep_nodes},
        edges=tuple(keep_edges),
    )


def _breaches_floor(current: float, threshold: float | None, ewma: float | None) -> bool:
    if threshold is None:
        return False
    breach = current < threshold
    if ewma is not None:
        breach = breach and ewma < threshold
    return breach


def _breaches_ceiling(current: float, threshold: float | None, ewma: float | None) -> bool:
    if threshold is None:
        return False
    breach = current > threshold
    if ewma is not None:
        breach = breach and ewma > threshold
    return breach
