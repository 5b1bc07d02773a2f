"""Lowest-cost path search over the agent graph.

Dijkstra with the adaptive edge cost evaluated at relaxation time, early
exit when the destination is settled, and deterministic tie-breaking:
equal-key frontier entries are extracted lowest-node-id first; an
equal-cost alternative path never replaces an existing predecessor
(strict-less-than relaxation).

The frontier uses lazy deletion: improved keys are re-pushed and stale
entries skipped on extraction, which is observably equivalent to
decrease-key. nodes_expanded counts first settlements only.
"""

from __future__ import annotations

import heapq

from .cost import compute_cost
from .errors import BrokenChain, UnknownNode
from .model import AgentGraph, RouteResult, Task, Unreachable, UNREACHABLE, WeightVector


def route(
    graph: AgentGraph, task: Task, weights: WeightVector
) -> RouteResult | Unreachable:
    """Minimum-total-cost path from task.source to task.destination.

    Edge costs are non-negative by construction, so the search is
    admissible and the early exit returns the same path as running to
    full settlement. Returns UNREACHABLE when no path exists.

    Raises UnknownNode if either endpoint is absent from the graph.
    """
    source, destination = task.source, task.destination
    if not graph.has_node(source):
        raise UnknownNode(f"source node {source} not in graph")
    if not graph.has_node(destination):
        raise UnknownNode(f"destination node {destination} not in graph")

    total_cost: dict[int, float] = {source: 0.0}
    predecessor: dict[int, int] = {}
    settled: set[int] = set()
    frontier: list[tuple[float, int]] = [(0.0, source)]
    nodes = graph.nodes
    nodes_expanded = 0
    edges_relaxed = 0

    while frontier:
        cost_u, u = heapq.heappop(frontier)
        if u in settled:
            continue
        settled.add(u)
        nodes_expanded += 1
        if u == destination:
            break
        node_u = nodes[u]
        for link in graph.out_edges(u):
            v = link.dst
            if v in settled:
                continue
            edges_relaxed += 1
            step = compute_cost(task, node_u, nodes[v], link, weights).total
            alt = cost_u + step
            known = total_cost.get(v)
            if known is None or alt < known:
                total_cost[v] = alt
                predecessor[v] = u
                heapq.heappush(frontier, (alt, v))

    if destination not in settled:
        return UNREACHABLE

    path = reconstruct_path(predecessor, source, destination)
    hop_costs, total = _score_path(graph, path, task, weights)
    return RouteResult(
        path=tuple(path),
        hop_costs=tuple(hop_costs),
        total_cost=total,
        nodes_expanded=nodes_expanded,
        edges_relaxed=edges_relaxed,
    )


def reconstruct_path(
    predecessor: dict[int, int], source: int, destination: int
) -> list[int]:
    """Walk predecessor links back from destination; return the forward path.

    Raises BrokenChain if the walk fails to reach the source, which cannot
    happen for a predecessor map produced by a completed route call.
    """
    if source == destination:
        return [source]
    path = [destination]
    current = destination
    limit = len(predecessor) + 1
    for _ in range(limit):
        current = predecessor.get(current)
        if current is None:
            raise BrokenChain(
                f"predecessor walk from {destination} stalled at {path[-1]}"
            )
        path.append(current)
        if current == source:
            path.reverse()
            return path
    raise BrokenChain(f"predecessor walk from {destination} did not terminate")


def _score_path(
    graph: AgentGraph, path: list[int], task: Task, weights: WeightVector
) -> tuple[list[float], float]:
    """Per-hop costs plus their left-to-right sum for an explicit path."""
    hop_costs: list[float] = []
    total = 0.0
    for u, v in zip(path, path[1:]):
        link = graph.edge(u, v)
        if link is None:
            raise BrokenChain(f"path step {u}->{v} is not an edge of the graph")
        step = compute_cost(task, graph.nodes[u], graph.nodes[v], link, weights).total
        hop_costs.append(step)
        total += step
    return hop_costs, total


def score_path(
    graph: AgentGraph, path: list[int], task: Task, weights: WeightVector
) -> tuple[list[float], float]:
    """Public path scorer used by hierarchy expansion and reporting."""
    return _score_path(graph, path, task, weights)
