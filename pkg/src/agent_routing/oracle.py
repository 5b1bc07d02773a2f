"""Brute-force references used to validate the optimized search on small instances.

``exhaustive_best_path`` enumerates every simple path and keeps the global
minimum; because edge costs are non-negative, the best simple path equals
the true shortest walk, so it is a valid Dijkstra reference. It assembles
its compute_cost arguments from scratch (own adjacency, own summation) so a
shared wiring bug with the router is more likely to surface.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .cost import compute_cost
from .errors import InvalidParams, TooLarge, UnknownNode
from .model import (
    AgentGraph,
    AgentNode,
    Link,
    RouteResult,
    Task,
    Unreachable,
    UNREACHABLE,
    WeightVector,
    build_graph,
)

NODE_GUARD = 10


def exhaustive_best_path(
    graph: AgentGraph, task: Task, weights: WeightVector
) -> RouteResult | Unreachable:
    """Global minimum-cost simple path via depth-first enumeration.

    Ties are broken by lexicographically smallest id sequence. Search
    statistics count DFS work: nodes_expanded is the number of path
    extensions, edges_relaxed the number of edges examined.

    Raises TooLarge above the node guard, UnknownNode for missing endpoints.
    """
    if len(graph.nodes) > NODE_GUARD:
        raise TooLarge(f"exhaustive search limited to {NODE_GUARD} nodes")
    source, destination = task.source, task.destination
    if source not in graph.nodes:
        raise UnknownNode(f"source node {source} not in graph")
    if destination not in graph.nodes:
        raise UnknownNode(f"destination node {destination} not in graph")

    adjacency: dict[int, list[Link]] = {}
    for link in graph.edges:
        adjacency.setdefault(link.src, []).append(link)
    for links in adjacency.values():
        links.sort(key=lambda e: e.dst)

    best: tuple[float, tuple[int, ...], tuple[float, ...]] | None = None
    visits = 0
    edges_seen = 0

    def extend(node: int, visited: set[int], path: list[int], hops: list[float], total: float):
        nonlocal best, visits, edges_seen
        visits += 1
        if node == destination:
            candidate = (total, tuple(path), tuple(hops))
            if best is None or candidate[:2] < best[:2]:
                best = candidate
            return
        for link in adjacency.get(node, []):
            nxt = link.dst
            if nxt in visited:
                continue
            edges_seen += 1
            step = compute_cost(
                task, graph.nodes[node], graph.nodes[nxt], link, weights
            ).total
            visited.add(nxt)
            path.append(nxt)
            hops.append(step)
            extend(nxt, visited, path, hops, total + step)
            hops.pop()
            path.pop()
            visited.remove(nxt)

    extend(source, {source}, [source], [], 0.0)
    if best is None:
        return UNREACHABLE
    total, path, hops = best
    return RouteResult(
        path=path,
        hop_costs=hops,
        total_cost=total,
        nodes_expanded=visits,
        edges_relaxed=edges_seen,
    )


@dataclass(frozen=True)
class MetricRanges:
    """Uniform draw ranges for generated instances. Lower bounds must be positive."""

    capability: tuple[float, float] = (1.0, 10.0)
    availability: tuple[float, float] = (0.2, 1.0)
    load_factor: tuple[float, float] = (0.01, 1.5)
    model_sophistication: tuple[float, float] = (0.5, 5.0)
    reliability: tuple[float, float] = (0.5, 1.0)
    bandwidth: tuple[float, float] = (0.5, 10.0)
    latency: tuple[float, float] = (0.1, 10.0)
    complexity: tuple[float, float] = (0.5, 10.0)
    priority: tuple[float, float] = (0.5, 10.0)
    weight: tuple[float, float] = (0.05, 2.0)


def random_instance(
    node_count: int,
    edge_density: float,
    ranges: MetricRanges = MetricRanges(),
    seed: int = 0,
) -> tuple[AgentGraph, Task, WeightVector]:
    """Seeded random valid instance: graph with dense ids 0..n-1, task, weights.

    Each ordered node pair carries an edge independently with probability
    ``edge_density``; all metrics are drawn uniformly from ``ranges``.
    """
    if node_count < 2:
        raise InvalidParams(f"node_count must be >= 2, got {node_count}")
    if not (0 < edge_density <= 1):
        raise InvalidParams(f"edge_density must be in (0, 1], got {edge_density}")
    for name in MetricRanges.__dataclass_fields__:
        lo, hi = getattr(ranges, name)
        if not (0 < lo <= hi):
            raise InvalidParams(f"range {name}=({lo}, {hi}) needs 0 < lo <= hi")

    rng = random.Random(seed)
    nodes = [
        AgentNode(
            id=i,
            capability=rng.uniform(*ranges.capability),
            availability=rng.uniform(*ranges.availability),
            load_factor=rng.uniform(*ranges.load_factor),
            model_sophistication=rng.uniform(*ranges.model_sophistication),
            reliability=rng.uniform(*ranges.reliability),
        )
        for i in range(node_count)
    ]
    links = []
    for i in range(node_count):
        for j in range(node_count):
            if i == j:
                continue
            if rng.random() < edge_density:
                links.append(
                    Link(
                        src=i,
                        dst=j,
                        bandwidth=rng.uniform(*ranges.bandwidth),
                        latency=rng.uniform(*ranges.latency),
                    )
                )
    source, destination = rng.sample(range(node_count), 2)
    task = Task(
        id=0,
        complexity=rng.uniform(*ranges.complexity),
        priority=rng.uniform(*ranges.priority),
        source=source,
        destination=destination,
    )
    weights = WeightVector(*(rng.uniform(*ranges.weight) for _ in range(7)))
    return build_graph(nodes, links), task, weights
